#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gmq/gaussian.hpp"
#include "gmq/schemes.hpp"

namespace gmq {

enum class CertificateKind { Exact, UpperBound, Unavailable };

std::string_view to_string(CertificateKind kind) noexcept;

/// Bound on W2 (not squared) between the mixture and its discretization.
/// Statistical certificates carry a Monte-Carlo standard error.
struct W2Certificate {
  double value = 0.0;  // NaN when unavailable
  CertificateKind kind = CertificateKind::Exact;
  bool statistical = false;
  double std_error = 0.0;
};

struct QuantizationResult {
  DiscreteDistribution discrete;
  W2Certificate certificate;
  std::optional<std::vector<double>> per_component_sq_errors;
};

inline constexpr double kDefaultAlignmentTol = 1e-8;

struct DiscretizeOptions {
  bool compress = false;
  std::size_t cross_mc_samples = 100000;  // 0 disables the cross certificate
  std::uint64_t seed = 0x5eed;
  double alignment_tol = kDefaultAlignmentTol;
};

/// Per-dimension cell probabilities of a component on a grid and the exact
/// squared W2 cost of the grid's Voronoi coupling.
struct GridMarginals {
  std::vector<std::vector<double>> probs;  // probs[j][k]: P(local coordinate j in cell k)
  double sq_error = 0.0;
};

/// Throws NotAligned when the grid axes do not diagonalize the covariance and
/// OffSupport when a zero-variance local coordinate misses every grid point.
GridMarginals grid_marginals(const GaussianComponent& component, const GridScheme& scheme,
                             double alignment_tol = kDefaultAlignmentTol);

QuantizationResult discretize_gaussian_grid(const GaussianComponent& component, const GridScheme& scheme,
                                            double alignment_tol = kDefaultAlignmentTol);

/// Requires the scheme frame to standardize the component: offset at the mean,
/// R^T cov R = diag(scales^2) on the first rank axes and zero elsewhere.
QuantizationResult discretize_gaussian_cross(const GaussianComponent& component, const CrossScheme& scheme,
                                             const DiscretizeOptions& options = {});

QuantizationResult discretize_mixture(const GaussianMixture& mix, const Scheme& scheme,
                                      const DiscretizeOptions& options = {});

QuantizationResult discretize_mixture(const GaussianMixture& mix, const SchemeSet& schemes,
                                      const DiscretizeOptions& options = {});

/// Index of the scheme-set entry serving each component: stored member sets
/// first, then nearest anchor (ties to the lowest entry index).
std::vector<std::size_t> assign_entries(const GaussianMixture& mix, const SchemeSet& schemes);

struct KMeansResult {
  DiscreteDistribution compressed;
  double transport_cost = 0.0;          // W2 of the assignment coupling
  std::vector<std::size_t> assignment;  // input atom -> output atom
};

/// Probability-weighted Lloyd iterations from the k most probable atoms
/// (ties by index) until assignments stop changing. Empty clusters are dropped.
KMeansResult weighted_kmeans(const DiscreteDistribution& atoms, std::size_t k);

}  // namespace gmq
