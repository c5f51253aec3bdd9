#include "gmq/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gmq/error.hpp"

namespace gmq {
namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " contains non-finite values");
  }
}

// Replaces the columns [begin, end) of basis by a deterministic orthonormal
// basis of the same subspace: Gram-Schmidt on P e_0, P e_1, ... where P is the
// orthogonal projector onto the block.
void canonicalize_block(Matrix& basis, Index begin, Index end) {
  const Index d = basis.rows();
  const Index k = end - begin;
  if (k <= 1) return;
  const Matrix block = basis.middleCols(begin, k);
  const Matrix projector = block * block.transpose();
  Matrix chosen(d, k);
  Index found = 0;
  for (Index i = 0; i < d && found < k; ++i) {
    Vector v = projector.col(i);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < found; ++j) v -= chosen.col(j).dot(v) * chosen.col(j);
    }
    const double norm = v.norm();
    if (norm > 1e-6) chosen.col(found++) = v / norm;
  }
  if (found == k) basis.middleCols(begin, k) = chosen;
}

void fix_signs(Matrix& basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

}  // namespace

Matrix SpectralDecomposition::whitening() const {
  const Index r = rank;
  Matrix t = eigenvectors.leftCols(r).transpose();
  for (Index j = 0; j < r; ++j) t.row(j) /= std::sqrt(eigenvalues[j]);
  return t;
}

Matrix SpectralDecomposition::sqrt_factor() const {
  const Index r = rank;
  Matrix s = eigenvectors.leftCols(r);
  for (Index j = 0; j < r; ++j) s.col(j) *= std::sqrt(eigenvalues[j]);
  return s;
}

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

SpectralDecomposition spectral(const Matrix& covariance) {
  if (covariance.rows() != covariance.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "covariance must be square");
  }
  require_finite(covariance, "covariance");
  const Index d = covariance.rows();
  const double norm = covariance.norm();
  const double asym = (covariance - covariance.transpose()).norm();
  if (asym > kSymmetryTol * norm) {
    std::ostringstream msg;
    msg << "covariance not symmetric (asymmetry " << asym << ")";
    throw Error(ErrorKind::NonSymmetric, msg.str());
  }
  const Matrix sym = 0.5 * (covariance + covariance.transpose());

  SpectralDecomposition out;
  if (d == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonConvergence, "eigendecomposition failed");
  }
  // Eigen sorts ascending.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();

  const double lmax = std::max(out.eigenvalues[0], 0.0);
  const double lmin = out.eigenvalues[d - 1];
  if (lmin < -kPsdTol * lmax || (lmax == 0.0 && lmin < 0.0)) {
    std::ostringstream msg;
    msg << "covariance indefinite (eigenvalue " << lmin << ")";
    throw Error(ErrorKind::IndefiniteBeyondTolerance, msg.str());
  }
  for (Index i = 0; i < d; ++i) {
    if (out.eigenvalues[i] <= kRankTol * lmax) out.eigenvalues[i] = 0.0;
  }
  out.rank = (out.eigenvalues.array() > 0.0).count();

  Index begin = 0;
  for (Index i = 1; i <= d; ++i) {
    const bool split =
        i == d || out.eigenvalues[i - 1] - out.eigenvalues[i] >= kEigenGroupTol * lmax;
    if (split) {
      canonicalize_block(out.eigenvectors, begin, i);
      begin = i;
    }
  }
  fix_signs(out.eigenvectors);
  return out;
}

GaussianComponent::GaussianComponent(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "mean and covariance dimensions differ");
  }
  if (mean_.size() == 0) throw Error(ErrorKind::InvalidArgument, "zero-dimensional Gaussian");
  require_finite(mean_, "mean");
  spectrum_ = spectral(covariance_);
  covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();
  if (!singular()) {
    const auto& v = spectrum_.eigenvectors;
    const Vector inv = spectrum_.eigenvalues.cwiseInverse();
    precision_ = v * inv.asDiagonal() * v.transpose();
    const double log_det = spectrum_.eigenvalues.array().log().sum();
    log_normalizer_ =
        -0.5 * (static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi) + log_det);
  }
}

const Matrix& GaussianComponent::precision() const {
  if (singular()) throw Error(ErrorKind::SingularComponent, "covariance is singular");
  return precision_;
}

double GaussianComponent::log_density(const Vector& x) const {
  const Matrix& p = precision();
  const Vector r = x - mean_;
  return log_normalizer_ - 0.5 * r.dot(p * r);
}

GaussianMixture::GaussianMixture(std::vector<double> weights,
                                 std::vector<GaussianComponent> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorKind::InvalidArgument, "mixture has no components");
  if (weights_.size() != components_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "weights and components differ in length");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::InvalidWeights, "mixture weights must be nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw Error(ErrorKind::InvalidWeights, "mixture weights must sum to 1");
  }
  for (const auto& c : components_) {
    if (c.dim() != components_.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch, "components differ in dimension");
    }
  }
}

GaussianMixture::GaussianMixture(GaussianComponent single)
    : GaussianMixture({1.0}, {std::move(single)}) {}

GaussianMixture GaussianMixture::subset(const std::vector<std::size_t>& members) const {
  if (members.empty()) throw Error(ErrorKind::InvalidArgument, "empty component subset");
  double total = 0.0;
  for (auto i : members) total += weights_.at(i);
  std::vector<double> w;
  std::vector<GaussianComponent> c;
  for (auto i : members) {
    w.push_back(total > 0.0 ? weights_[i] / total : 1.0 / static_cast<double>(members.size()));
    c.push_back(components_[i]);
  }
  // Renormalization can leave the sum an ulp or two away from 1.
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= s;
  return GaussianMixture(std::move(w), std::move(c));
}

DiscreteDistribution::DiscreteDistribution(Matrix locations, Vector probabilities)
    : locations_(std::move(locations)), probabilities_(std::move(probabilities)) {
  if (locations_.rows() != probabilities_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "locations and probabilities differ in length");
  }
  if (probabilities_.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty discrete distribution");
  require_finite(locations_, "locations");
  if ((probabilities_.array() < 0.0).any() || !probabilities_.allFinite()) {
    throw Error(ErrorKind::InvalidWeights, "probabilities must be nonnegative");
  }
  if (std::abs(probabilities_.sum() - 1.0) > kWeightSumTol) {
    throw Error(ErrorKind::InvalidWeights, "probabilities must sum to 1");
  }
}

DiscreteDistribution DiscreteDistribution::pruned(double threshold, double* dropped_mass) const {
  std::vector<Index> keep;
  double dropped = 0.0;
  for (Index i = 0; i < size(); ++i) {
    if (probabilities_[i] >= threshold) {
      keep.push_back(i);
    } else {
      dropped += probabilities_[i];
    }
  }
  if (keep.empty()) throw Error(ErrorKind::InvalidArgument, "pruning threshold removes every atom");
  Matrix loc(static_cast<Index>(keep.size()), dim());
  Vector prob(static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    loc.row(static_cast<Index>(k)) = locations_.row(keep[k]);
    prob[static_cast<Index>(k)] = probabilities_[keep[k]];
  }
  prob /= prob.sum();
  if (dropped_mass) *dropped_mass = dropped;
  return DiscreteDistribution(std::move(loc), std::move(prob));
}

Moments mixture_moments(const GaussianMixture& mix) {
  const Index d = mix.dim();
  Moments m{Vector::Zero(d), Matrix::Zero(d, d)};
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const auto& c = mix.component(i);
    m.mean += mix.weight(i) * c.mean();
    m.covariance += mix.weight(i) * (c.covariance() + c.mean() * c.mean().transpose());
  }
  m.covariance -= m.mean * m.mean.transpose();
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose()).eval();
  return m;
}

double log_density(const GaussianMixture& mix, const Vector& x) {
  std::vector<double> terms;
  terms.reserve(mix.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (mix.weight(i) == 0.0) continue;
    terms.push_back(std::log(mix.weight(i)) + mix.component(i).log_density(x));
    top = std::max(top, terms.back());
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

LogDensityDerivatives log_density_grad_hess(const GaussianMixture& mix, const Vector& x) {
  const Index d = mix.dim();
  if (x.size() != d) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from mixture");
  const std::size_t m = mix.size();
  std::vector<double> logw(m, -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    if (mix.weight(i) == 0.0) {
      mix.component(i).precision();  // singular components are rejected regardless
      continue;
    }
    logw[i] = std::log(mix.weight(i)) + mix.component(i).log_density(x);
    top = std::max(top, logw[i]);
  }
  double sum = 0.0;
  for (double t : logw) sum += std::exp(t - top);

  LogDensityDerivatives out;
  out.log_density = top + std::log(sum);
  out.gradient = Vector::Zero(d);
  out.hessian = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = std::exp(logw[i] - top) / sum;
    if (r == 0.0) continue;
    const auto& c = mix.component(i);
    const Vector g = -(c.precision() * (x - c.mean()));
    out.gradient += r * g;
    out.hessian += r * (g * g.transpose() - c.precision());
  }
  out.hessian -= out.gradient * out.gradient.transpose();
  out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
  return out;
}

}  // namespace gmq
