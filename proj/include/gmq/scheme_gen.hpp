#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gmq/gaussian.hpp"
#include "gmq/quantize1d.hpp"
#include "gmq/schemes.hpp"

namespace gmq {

enum class Configuration { Grid, Cross };

/// Per-dimension grid sizes and their predicted squared W2 error
/// sum_j lambda_j * distortion(n_j).
struct LayoutCandidate {
  std::vector<int> sizes;
  double predicted_sq_error = 0.0;

  std::size_t total() const;
};

/// Layout of at most `budget` grid points minimizing the predicted error.
/// Uses exact enumeration for <= 4 nonzero eigenvalues and budget <= 1e4,
/// otherwise select_layout_greedy. Zero eigenvalues always get one point.
LayoutCandidate select_layout(std::span<const double> eigenvalues, std::size_t budget,
                              const LookupTable1D& table);

/// Exhaustive search over non-increasing layouts (branch and bound).
LayoutCandidate select_layout_exact(std::span<const double> eigenvalues, std::size_t budget,
                                    const LookupTable1D& table);

/// Marginal-gain greedy allocation followed by pairwise exchange moves.
LayoutCandidate select_layout_greedy(std::span<const double> eigenvalues, std::size_t budget,
                                     const LookupTable1D& table);

/// Grid scheme for N(mean, V diag(lambda) V^T) in the given orthonormal basis.
/// Columns are reordered by descending lambda.
GridScheme grid_scheme_in_basis(const Vector& mean, const Matrix& basis, const Vector& lambda,
                                std::size_t budget, const LookupTable1D& table);

/// Cross scheme for N(mean, V diag(lambda) V^T): a center point plus as many
/// shells of 2r axis points as the budget allows, with equal-mass shells.
CrossScheme cross_scheme_in_basis(const Vector& mean, const Matrix& basis, const Vector& lambda,
                                  std::size_t budget);

Scheme generate_scheme_gaussian(const GaussianComponent& component, std::size_t budget,
                                Configuration configuration, const LookupTable1D& table);

struct Homogeneity {
  bool homogeneous = false;
  std::optional<Matrix> shared_basis;
};

/// Pairwise commutator test ||S_i S_j - S_j S_i||_F <= tol ||S_i||_F ||S_j||_F.
/// The shared basis diagonalizes sum_i w_i S_i, refined inside repeated
/// eigenvalue blocks so that it diagonalizes every member.
Homogeneity homogeneity_check(const std::vector<const GaussianComponent*>& components,
                              const std::vector<double>& weights, double tol);

struct ModeCluster {
  Vector mode_location;
  std::vector<std::size_t> members;
  double cluster_weight = 0.0;
  bool homogeneous = false;
  std::optional<Matrix> shared_basis;
};

inline constexpr double kDefaultHomogeneityTol = 1e-8;

/// Default mode merge tolerance: 1e-2 * sqrt(mean eigenvalue of the mixture covariance).
double default_merge_tolerance(const GaussianMixture& mix);

/// Groups components by the mode their mean flows to under fixed-point mean
/// shift. Mixtures with singular components are grouped by mean distance.
std::vector<ModeCluster> cluster_modes(const GaussianMixture& mix,
                                       std::optional<double> merge_tol = std::nullopt,
                                       double homogeneity_tol = kDefaultHomogeneityTol);

/// Largest-remainder apportionment of budget by weights with a floor of 1.
std::vector<std::size_t> allocate_budget(std::span<const double> weights, std::size_t budget);

/// Laplace approximation of the members' sub-mixture at the mode, as
/// per-basis-direction variances (falls back to the weighted member covariance).
Vector local_gaussian_variances(const GaussianMixture& mix, const std::vector<std::size_t>& members,
                                const Vector& mode, const Matrix& basis);

struct MixtureSchemeOptions {
  Configuration configuration = Configuration::Grid;
  bool per_mode = true;
  std::optional<double> mode_merge_tol;
  double homogeneity_tol = kDefaultHomogeneityTol;
};

SchemeSet generate_scheme_mixture(const GaussianMixture& mix, std::size_t budget,
                                  const MixtureSchemeOptions& options, const LookupTable1D& table);

}  // namespace gmq
