#pragma once

#include <random>

#include "gmq/gaussian.hpp"
#include "gmq/quantize1d.hpp"

namespace gmq::test {

// Mixture from the paper's listing: two visible modes, diagonal covariances.
inline GaussianMixture paper_mixture() {
  auto diag = [](double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
  };
  return GaussianMixture({0.5, 0.25, 0.25},
                         {GaussianComponent(Vector{{1.0, 1.0}}, diag(0.5, 0.6)),
                          GaussianComponent(Vector{{-1.1, -1.3}}, diag(0.4, 0.8)),
                          GaussianComponent(Vector{{-0.9, -0.8}}, diag(0.5, 0.8))});
}

inline Matrix random_orthogonal(Index d, std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  Matrix a(d, d);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = n(gen);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline Vector random_vector(Index d, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = n(gen);
  return v;
}

// Q diag(lambda) Q^T with lambda in [lo, hi]; the last `zeros` eigenvalues are zero.
inline Matrix random_psd(Index d, std::mt19937_64& gen, double lo = 0.1, double hi = 2.0, Index zeros = 0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix q = random_orthogonal(d, gen);
  Vector lam(d);
  for (Index i = 0; i < d; ++i) lam[i] = i >= d - zeros ? 0.0 : u(gen);
  Matrix s = q * lam.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

// Random mixture; with shared_basis every covariance is diagonal in one rotation.
inline GaussianMixture random_mixture(std::mt19937_64& gen, Index d, std::size_t m, bool shared_basis) {
  Matrix q = test::random_orthogonal(d, gen);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  std::vector<GaussianComponent> comps;
  std::vector<double> w;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    Matrix cov;
    if (shared_basis) {
      Vector lam(d);
      for (Index j = 0; j < d; ++j) lam[j] = u(gen);
      cov = q * lam.asDiagonal() * q.transpose();
      cov = 0.5 * (cov + cov.transpose());
    } else {
      cov = test::random_psd(d, gen, 0.2, 2.0);
    }
    comps.emplace_back(test::random_vector(d, gen, 1.5), cov);
    w.push_back(u(gen));
    total += w.back();
  }
  for (double& x : w) x /= total;
  return GaussianMixture(w, comps);
}

inline const LookupTable1D& shared_table() {
  static const LookupTable1D table = LookupTable1D::build(64);
  return table;
}

}  // namespace gmq::test
