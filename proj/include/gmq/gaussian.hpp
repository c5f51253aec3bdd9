#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace gmq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Relative Frobenius tolerance for covariance symmetry.
inline constexpr double kSymmetryTol = 1e-10;
/// Eigenvalues below -kPsdTol * lambda_max are rejected; above it, clamped to 0.
inline constexpr double kPsdTol = 1e-10;
/// Eigenvalues <= kRankTol * lambda_max count as zero.
inline constexpr double kRankTol = 1e-10;
/// Relative gap below which neighbouring eigenvalues are treated as one block.
inline constexpr double kEigenGroupTol = 1e-9;
/// Mixture weights must sum to one within this tolerance.
inline constexpr double kWeightSumTol = 1e-9;

/// Canonical eigendecomposition cov = V diag(lambda) V^T.
///
/// Eigenvalues are sorted descending and clamped to zero below the rank
/// tolerance. Within blocks of numerically equal eigenvalues the basis is
/// chosen by Gram-Schmidt on the projected standard basis vectors, and each
/// column is signed so that its largest-magnitude entry is positive.
struct SpectralDecomposition {
  Matrix eigenvectors;
  Vector eigenvalues;
  Index rank = 0;

  Index dim() const { return eigenvalues.size(); }
  double max_eigenvalue() const { return eigenvalues.size() ? eigenvalues[0] : 0.0; }

  /// diag(lambda)^{-1/2} V^T restricted to the nonzero block (rank x d).
  Matrix whitening() const;
  /// V diag(sqrt lambda) restricted to the nonzero block (d x rank).
  Matrix sqrt_factor() const;
  Matrix reconstruct() const;
};

SpectralDecomposition spectral(const Matrix& covariance);

/// N(mean, covariance) with a possibly singular covariance.
class GaussianComponent {
 public:
  GaussianComponent(Vector mean, Matrix covariance);

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const SpectralDecomposition& spectrum() const { return spectrum_; }
  bool singular() const { return spectrum_.rank < dim(); }

  /// Inverse covariance; throws SingularComponent when rank < d.
  const Matrix& precision() const;
  /// log N(x; mean, covariance); throws SingularComponent when rank < d.
  double log_density(const Vector& x) const;

 private:
  Vector mean_;
  Matrix covariance_;
  SpectralDecomposition spectrum_;
  Matrix precision_;
  double log_normalizer_ = 0.0;
};

class GaussianMixture {
 public:
  GaussianMixture(std::vector<double> weights, std::vector<GaussianComponent> components);
  explicit GaussianMixture(GaussianComponent single);

  Index dim() const { return components_.front().dim(); }
  std::size_t size() const { return components_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  const GaussianComponent& component(std::size_t i) const { return components_[i]; }

  /// Sub-mixture of the given members with renormalized weights.
  GaussianMixture subset(const std::vector<std::size_t>& members) const;

 private:
  std::vector<double> weights_;
  std::vector<GaussianComponent> components_;
};

/// Finite-support distribution sum_i p_i delta_{c_i}; locations are rows.
class DiscreteDistribution {
 public:
  DiscreteDistribution(Matrix locations, Vector probabilities);

  Index dim() const { return locations_.cols(); }
  Index size() const { return locations_.rows(); }
  const Matrix& locations() const { return locations_; }
  const Vector& probabilities() const { return probabilities_; }

  /// Drops atoms with probability < threshold and renormalizes; the removed
  /// mass is written to dropped_mass.
  DiscreteDistribution pruned(double threshold, double* dropped_mass = nullptr) const;

 private:
  Matrix locations_;
  Vector probabilities_;
};

struct Moments {
  Vector mean;
  Matrix covariance;
};

Moments mixture_moments(const GaussianMixture& mix);

struct LogDensityDerivatives {
  double log_density = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// Value, gradient and Hessian of log p(x) for the mixture density p.
/// Requires every component to be nonsingular.
LogDensityDerivatives log_density_grad_hess(const GaussianMixture& mix, const Vector& x);

double log_density(const GaussianMixture& mix, const Vector& x);

}  // namespace gmq
