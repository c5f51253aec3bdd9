#pragma once

// Independent numerical oracles: adaptive quadrature for the 1D cell
// integrals and seeded Monte-Carlo estimators over Gaussian mixtures.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "gmq/gaussian.hpp"

namespace gmq {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Seeded generator. std::mt19937_64 has a fully specified output sequence and
/// the uniform/normal transforms below are hand-written, so draws replay
/// bit-identically across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 mix of (seed, stream); used for per-block seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Adaptive Simpson quadrature on a finite interval, absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 60);

/// int_a^b (x - c)^2 phi(x) dx by adaptive Simpson; infinite ends truncated at +-12.
double quadrature_cell_cost(double a, double b, double c);
/// int_a^b phi(x) dx by adaptive Simpson; infinite ends truncated at +-12.
double quadrature_cell_prob(double a, double b);

/// Draws from a Gaussian mixture using the spectral square root of each
/// component, so singular covariances are supported.
class MixtureSampler {
 public:
  explicit MixtureSampler(const GaussianMixture& mix);

  Index dim() const { return dim_; }
  /// Writes one draw into out; returns the chosen component index.
  std::size_t draw(Rng& rng, Vector& out) const;

 private:
  Index dim_;
  std::vector<double> cumulative_;
  std::vector<Vector> means_;
  std::vector<Matrix> factors_;
};

/// sqrt(E min_k ||X - c_k||^2) for X from the mixture; std_error by the delta
/// method on the squared-cost mean.
McEstimate mc_coupling_cost(const GaussianMixture& mix, const Matrix& locations,
                            std::size_t samples, std::uint64_t seed);

/// sqrt(E ||X - T(X)||^2) for an arbitrary transport map T(x, component).
McEstimate mc_transport_cost(const GaussianMixture& mix,
                             const std::function<Vector(const Vector&, std::size_t)>& transport,
                             std::size_t samples, std::uint64_t seed);

/// P(X in region) with the binomial standard error.
McEstimate mc_region_prob(const GaussianComponent& component,
                          const std::function<bool(const Vector&)>& inside,
                          std::size_t samples, std::uint64_t seed);

/// Probabilities of every region of a partition from a single sample set.
std::vector<McEstimate> mc_partition_probs(const GaussianComponent& component,
                                           const std::function<std::size_t(const Vector&)>& classify,
                                           std::size_t regions, std::size_t samples,
                                           std::uint64_t seed);

inline constexpr std::size_t kMinMcSamples = 1000;

}  // namespace gmq
