#include "gmq/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmq/error.hpp"
#include "gmq/quantize1d.hpp"
#include "gmq/special.hpp"

namespace gmq {
namespace {

constexpr double kOrthogonalityTol = 1e-8;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Axes::Axes(Matrix rotation, Vector scales, Vector offset)
    : rotation_(std::move(rotation)), scales_(std::move(scales)), offset_(std::move(offset)) {
  const Index d = offset_.size();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "axes need at least one dimension");
  if (rotation_.rows() != d || rotation_.cols() != d || scales_.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "axes rotation/scales/offset dimensions differ");
  }
  if (!rotation_.allFinite() || !scales_.allFinite() || !offset_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "axes contain non-finite values");
  }
  if ((rotation_.transpose() * rotation_ - Matrix::Identity(d, d)).norm() > kOrthogonalityTol) {
    throw Error(ErrorKind::InvalidArgument, "axes rotation is not orthogonal");
  }
  if ((scales_.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidArgument, "axes scales must be positive");
  }
}

Axes Axes::identity(Index dim) {
  return Axes(Matrix::Identity(dim, dim), Vector::Ones(dim), Vector::Zero(dim));
}

Vector Axes::to_local(const Vector& world) const {
  if (world.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from axes");
  return (rotation_.transpose() * (world - offset_)).cwiseQuotient(scales_);
}

Vector Axes::to_world(const Vector& local) const {
  if (local.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from axes");
  return offset_ + rotation_ * local.cwiseProduct(scales_);
}

Axes Axes::rotated(const Matrix& q) const { return Axes(q * rotation_, scales_, q * offset_); }

GridScheme::GridScheme(std::vector<std::vector<double>> points_per_dim, Axes axes)
    : axes_(std::move(axes)), points_(std::move(points_per_dim)) {
  if (static_cast<Index>(points_.size()) != axes_.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "grid needs one point list per dimension");
  }
  edges_.reserve(points_.size());
  for (const auto& p : points_) {
    if (p.empty()) throw Error(ErrorKind::InvalidArgument, "grid dimension without points");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!std::isfinite(p[i])) throw Error(ErrorKind::InvalidArgument, "non-finite grid point");
      if (i > 0 && !(p[i] > p[i - 1])) {
        throw Error(ErrorKind::InvalidArgument, "grid points must be strictly ascending");
      }
    }
    edges_.push_back(midpoint_edges(p));
  }
}

std::vector<std::size_t> GridScheme::sizes() const {
  std::vector<std::size_t> s;
  s.reserve(points_.size());
  for (const auto& p : points_) s.push_back(p.size());
  return s;
}

std::size_t GridScheme::size() const {
  std::size_t total = 1;
  for (const auto& p : points_) {
    if (total > std::numeric_limits<std::size_t>::max() / p.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= p.size();
  }
  return total;
}

GridCell GridScheme::cell(std::span<const std::size_t> multi_index) const {
  GridCell c{location(multi_index), {}};
  c.bounds.reserve(points_.size());
  for (std::size_t j = 0; j < points_.size(); ++j) {
    c.bounds.emplace_back(edges_[j][multi_index[j]], edges_[j][multi_index[j] + 1]);
  }
  return c;
}

Vector GridScheme::location(std::span<const std::size_t> multi_index) const {
  if (static_cast<Index>(multi_index.size()) != dim()) {
    throw Error(ErrorKind::IndexOutOfRange, "multi-index has wrong length");
  }
  Vector local(dim());
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (multi_index[j] >= points_[j].size()) {
      throw Error(ErrorKind::IndexOutOfRange, "grid index out of range");
    }
    local[static_cast<Index>(j)] = points_[j][multi_index[j]];
  }
  return axes_.to_world(local);
}

std::vector<std::size_t> GridScheme::locate(const Vector& world) const {
  const Vector y = axes_.to_local(world);
  std::vector<std::size_t> idx(points_.size());
  for (std::size_t j = 0; j < points_.size(); ++j) {
    const auto& e = edges_[j];
    // Cell k covers [e_k, e_{k+1}); interior edges only.
    auto it = std::upper_bound(e.begin() + 1, e.end() - 1, y[static_cast<Index>(j)]);
    idx[j] = static_cast<std::size_t>(it - (e.begin() + 1));
  }
  return idx;
}

std::size_t GridScheme::flatten(std::span<const std::size_t> multi_index) const {
  std::size_t flat = 0;
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (multi_index[j] >= points_[j].size()) {
      throw Error(ErrorKind::IndexOutOfRange, "grid index out of range");
    }
    flat = flat * points_[j].size() + multi_index[j];
  }
  return flat;
}

std::vector<std::size_t> GridScheme::unflatten(std::size_t flat) const {
  if (flat >= size()) throw Error(ErrorKind::IndexOutOfRange, "flat grid index out of range");
  std::vector<std::size_t> idx(points_.size());
  for (std::size_t j = points_.size(); j-- > 0;) {
    idx[j] = flat % points_[j].size();
    flat /= points_[j].size();
  }
  return idx;
}

CrossScheme::CrossScheme(Axes axes, std::vector<double> shell_thresholds, bool include_center,
                         Index rank)
    : axes_(std::move(axes)),
      thresholds_(std::move(shell_thresholds)),
      include_center_(include_center),
      rank_(rank) {
  if (rank_ < 0 || rank_ > axes_.dim()) {
    throw Error(ErrorKind::InvalidArgument, "cross rank must lie in [0, d]");
  }
  for (std::size_t k = 0; k < thresholds_.size(); ++k) {
    if (!(thresholds_[k] > 0.0) || !std::isfinite(thresholds_[k]) ||
        (k > 0 && !(thresholds_[k] > thresholds_[k - 1]))) {
      throw Error(ErrorKind::InvalidThresholds, "shell thresholds must be positive and ascending");
    }
  }
  if (rank_ == 0 && (!include_center_ || !thresholds_.empty())) {
    throw Error(ErrorKind::InvalidThresholds, "a rank-0 cross scheme is a single center point");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), thresholds_.begin(), thresholds_.end());
  bounds.push_back(kInf);
  const int dof = static_cast<int>(std::max<Index>(rank_, 1));
  const int intervals = static_cast<int>(bounds.size()) - 1;
  for (int k = 0; k < intervals; ++k) {
    const double lo = bounds[static_cast<std::size_t>(k)];
    const double hi = bounds[static_cast<std::size_t>(k) + 1];
    const double mass = rank_ == 0 ? 1.0 : chi2_cdf(hi, dof) - chi2_cdf(lo, dof);
    if (k == 0 && include_center_) {
      CrossRegion c;
      c.center = true;
      c.shell = 0;
      c.lower = lo;
      c.upper = hi;
      c.mass = mass;
      c.location = axes_.offset();
      regions_.push_back(std::move(c));
      continue;
    }
    double radius = std::sqrt(lo);
    if (mass > 0.0) radius = chi_shell_first_moment(lo, hi, dof) / mass;
    for (Index j = 0; j < rank_; ++j) {
      for (int sign : {1, -1}) {
        CrossRegion r;
        r.shell = k;
        r.axis = j;
        r.sign = sign;
        r.lower = lo;
        r.upper = hi;
        r.mass = mass / static_cast<double>(2 * rank_);
        Vector local = Vector::Zero(axes_.dim());
        local[j] = sign * radius;
        r.location = axes_.to_world(local);
        regions_.push_back(std::move(r));
      }
    }
  }
}

std::size_t CrossScheme::locate(const Vector& world) const {
  const Vector y = axes_.to_local(world);
  const double m = y.head(rank_).squaredNorm();
  // Interval k is (bounds_k, bounds_{k+1}] with bounds = {0, thresholds..., inf}.
  const auto shell = static_cast<std::size_t>(
      std::lower_bound(thresholds_.begin(), thresholds_.end(), m) - thresholds_.begin());
  if (include_center_ && shell == 0) return 0;
  Index axis = 0;
  if (rank_ > 0) y.head(rank_).cwiseAbs().maxCoeff(&axis);
  const std::size_t sector = static_cast<std::size_t>(2 * axis) + (y[axis] < 0.0 ? 1 : 0);
  const std::size_t first = include_center_ ? 1 + (shell - 1) * static_cast<std::size_t>(2 * rank_)
                                            : shell * static_cast<std::size_t>(2 * rank_);
  return first + sector;
}

const Axes& scheme_axes(const Scheme& scheme) {
  return std::visit([](const auto& s) -> const Axes& { return s.axes(); }, scheme);
}

std::size_t scheme_size(const Scheme& scheme) {
  return std::visit([](const auto& s) { return s.size(); }, scheme);
}

Matrix scheme_locations(const Scheme& scheme) {
  return std::visit(
      Overloaded{
          [](const GridScheme& g) {
            const std::size_t n = g.size();
            Matrix out(static_cast<Index>(n), g.dim());
            for (std::size_t k = 0; k < n; ++k) {
              out.row(static_cast<Index>(k)) = g.location(g.unflatten(k)).transpose();
            }
            return out;
          },
          [](const CrossScheme& c) {
            Matrix out(static_cast<Index>(c.size()), c.dim());
            for (std::size_t k = 0; k < c.size(); ++k) {
              out.row(static_cast<Index>(k)) = c.regions()[k].location.transpose();
            }
            return out;
          }},
      scheme);
}

std::size_t scheme_locate(const Scheme& scheme, const Vector& world) {
  return std::visit(Overloaded{[&](const GridScheme& g) { return g.flatten(g.locate(world)); },
                               [&](const CrossScheme& c) { return c.locate(world); }},
                    scheme);
}

bool alignment_check(const Axes& axes, const GaussianComponent& component, double tol) {
  if (axes.dim() != component.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "axes and component dimensions differ");
  }
  const Matrix& cov = component.covariance();
  const Matrix a = axes.rotation().transpose() * cov * axes.rotation();
  Matrix off = a;
  off.diagonal().setZero();
  return off.norm() <= tol * cov.norm();
}

}  // namespace gmq
