#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "gmq/gaussian.hpp"

namespace gmq {

/// Affine reference frame. World to local is y = diag(scales)^{-1} R^T (x - offset).
class Axes {
 public:
  Axes(Matrix rotation, Vector scales, Vector offset);
  static Axes identity(Index dim);

  Index dim() const { return offset_.size(); }
  const Matrix& rotation() const { return rotation_; }
  const Vector& scales() const { return scales_; }
  const Vector& offset() const { return offset_; }

  Vector to_local(const Vector& world) const;
  Vector to_world(const Vector& local) const;

  /// Applies an orthogonal map q to the frame: rotation -> q R, offset -> q offset.
  Axes rotated(const Matrix& q) const;

 private:
  Matrix rotation_;
  Vector scales_;
  Vector offset_;
};

struct GridCell {
  Vector location;                                // world frame
  std::vector<std::pair<double, double>> bounds;  // local frame, per dimension
};

/// Cartesian product of per-dimension point sets in a local frame, with
/// per-dimension Voronoi (midpoint) edges.
class GridScheme {
 public:
  GridScheme(std::vector<std::vector<double>> points_per_dim, Axes axes);

  Index dim() const { return axes_.dim(); }
  const Axes& axes() const { return axes_; }
  const std::vector<std::vector<double>>& points_per_dim() const { return points_; }
  const std::vector<double>& points(Index j) const { return points_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& edges(Index j) const { return edges_[static_cast<std::size_t>(j)]; }
  std::vector<std::size_t> sizes() const;
  /// Total number of cells; saturates at SIZE_MAX.
  std::size_t size() const;

  GridCell cell(std::span<const std::size_t> multi_index) const;
  Vector location(std::span<const std::size_t> multi_index) const;
  /// Multi-index of the cell containing a world point.
  std::vector<std::size_t> locate(const Vector& world) const;

  /// Row-major flat index (last dimension fastest).
  std::size_t flatten(std::span<const std::size_t> multi_index) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  GridScheme with_axes(Axes axes) const { return GridScheme(points_, std::move(axes)); }

 private:
  Axes axes_;
  std::vector<std::vector<double>> points_;
  std::vector<std::vector<double>> edges_;
};

struct CrossRegion {
  bool center = false;
  int shell = 0;      // index into the radial intervals
  Index axis = 0;     // dominant local axis (sectors only)
  int sign = 1;       // +1 / -1 (sectors only)
  double lower = 0.0; // squared Mahalanobis radius range (lower, upper]
  double upper = 0.0;
  double mass = 0.0;  // probability under the frame's reference Gaussian
  Vector location;    // world frame
};

/// Sigma-point style partition: an optional central ellipsoid plus
/// Mahalanobis shells, each split into the 2r signed dominant-axis sectors of
/// the first `rank` local axes. Locations sit on the axes at the conditional
/// mean radius of the shell.
class CrossScheme {
 public:
  CrossScheme(Axes axes, std::vector<double> shell_thresholds, bool include_center, Index rank);

  Index dim() const { return axes_.dim(); }
  Index rank() const { return rank_; }
  const Axes& axes() const { return axes_; }
  const std::vector<double>& shell_thresholds() const { return thresholds_; }
  bool include_center() const { return include_center_; }

  const std::vector<CrossRegion>& regions() const { return regions_; }
  std::size_t size() const { return regions_.size(); }
  std::size_t locate(const Vector& world) const;

  CrossScheme with_axes(Axes axes) const {
    return CrossScheme(std::move(axes), thresholds_, include_center_, rank_);
  }

 private:
  Axes axes_;
  std::vector<double> thresholds_;
  bool include_center_;
  Index rank_;
  std::vector<CrossRegion> regions_;
};

using Scheme = std::variant<GridScheme, CrossScheme>;

const Axes& scheme_axes(const Scheme& scheme);
std::size_t scheme_size(const Scheme& scheme);
/// All scheme locations as rows, in region order.
Matrix scheme_locations(const Scheme& scheme);
/// Index of the region containing a world point.
std::size_t scheme_locate(const Scheme& scheme, const Vector& world);

/// Scheme(s) for one mode. A single scheme is shared by every member; several
/// schemes are matched one-to-one with the members (per-component quantization).
struct SchemeEntry {
  Vector anchor;
  std::optional<std::vector<std::size_t>> members;
  std::vector<Scheme> schemes;
  std::size_t budget = 0;  // 0: sum of scheme sizes
};

struct SchemeSet {
  std::vector<SchemeEntry> entries;
};

/// True iff R^T cov R is diagonal up to tol * ||cov||_F of off-diagonal mass.
bool alignment_check(const Axes& axes, const GaussianComponent& component, double tol = 1e-8);

}  // namespace gmq
