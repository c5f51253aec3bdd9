#include "gmq/scheme_gen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "gmq/discretize.hpp"
#include "gmq/error.hpp"
#include "gmq/special.hpp"

namespace gmq {

std::size_t LayoutCandidate::total() const {
  std::size_t p = 1;
  for (int n : sizes) p *= static_cast<std::size_t>(n);
  return p;
}

namespace {

constexpr double kTieRel = 1e-12;

// Active (positive) eigenvalues sorted descending, with their original positions.
struct ActiveDims {
  std::vector<double> lambda;
  std::vector<std::size_t> position;
};

ActiveDims active_dims(std::span<const double> eigenvalues) {
  double lmax = 0.0;
  for (double l : eigenvalues) {
    if (!std::isfinite(l) || l < 0.0)
      throw Error(ErrorKind::InvalidArgument, "eigenvalues must be finite and non-negative");
    lmax = std::max(lmax, l);
  }
  std::vector<std::size_t> order(eigenvalues.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eigenvalues[a] > eigenvalues[b]; });
  ActiveDims out;
  for (std::size_t i : order) {
    if (eigenvalues[i] > kRankTol * lmax && eigenvalues[i] > 0.0) {
      out.lambda.push_back(eigenvalues[i]);
      out.position.push_back(i);
    }
  }
  return out;
}

double sq_error(const std::vector<double>& lambda, const std::vector<int>& sizes,
                const LookupTable1D& table) {
  double e = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) e += lambda[j] * table.distortion(sizes[j]);
  return e;
}

std::size_t product(const std::vector<int>& sizes) {
  std::size_t p = 1;
  for (int n : sizes) p *= static_cast<std::size_t>(n);
  return p;
}

// Strict preference between two layouts over the same sorted dimensions.
bool better(double err_a, const std::vector<int>& a, double err_b, const std::vector<int>& b) {
  double scale = std::max(std::abs(err_a), std::abs(err_b));
  if (err_a < err_b - kTieRel * scale) return true;
  if (err_a > err_b + kTieRel * scale) return false;
  std::size_t pa = product(a), pb = product(b);
  if (pa != pb) return pa > pb;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

LayoutCandidate expand(const ActiveDims& act, std::size_t dims, const std::vector<int>& sizes,
                       double err) {
  LayoutCandidate out;
  out.sizes.assign(dims, 1);
  for (std::size_t j = 0; j < act.position.size(); ++j) out.sizes[act.position[j]] = sizes[j];
  out.predicted_sq_error = err;
  return out;
}

// Sizes must not increase along descending eigenvalues; swapping an
// inversion never increases the error.
void sort_sizes(std::vector<int>& sizes) { std::sort(sizes.begin(), sizes.end(), std::greater<>()); }

// Marginal-gain increments (skipping one dimension) until no increment fits.
void greedy_fill(const std::vector<double>& lambda, std::size_t budget, const LookupTable1D& table,
                 std::vector<int>& n, std::size_t skip) {
  const std::size_t r = lambda.size();
  std::size_t prod = product(n);
  while (true) {
    double best_gain = 0.0;
    std::size_t best = r;
    for (std::size_t j = 0; j < r; ++j) {
      if (j == skip) continue;
      std::size_t next = prod / static_cast<std::size_t>(n[j]) * static_cast<std::size_t>(n[j] + 1);
      if (next > budget) continue;
      double gain = lambda[j] * (table.distortion(n[j]) - table.distortion(n[j] + 1));
      if (best == r || gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    if (best == r) return;
    prod = prod / static_cast<std::size_t>(n[best]) * static_cast<std::size_t>(n[best] + 1);
    ++n[best];
  }
}

// Branch and bound over non-increasing layouts, seeded with an incumbent.
std::vector<int> exact_sorted(const std::vector<double>& lambda, std::size_t budget,
                              const LookupTable1D& table, std::vector<int> best) {
  const std::size_t r = lambda.size();
  if (r == 0) return best;
  double best_err = sq_error(lambda, best, table);
  std::vector<int> cur(r, 1);

  // Assign dimensions r-1 down to 1, each at least as large as the one after it;
  // dimension 0 takes the remaining budget.
  std::function<void(std::size_t, std::size_t, int, double)> rec =
      [&](std::size_t k, std::size_t tail_prod, int lower, double partial) {
        if (k == 0) {
          std::size_t n0 = budget / tail_prod;
          if (n0 < static_cast<std::size_t>(lower)) return;
          cur[0] = static_cast<int>(n0);
          double e = partial + lambda[0] * table.distortion(cur[0]);
          if (better(e, cur, best_err, best)) {
            best = cur;
            best_err = e;
          }
          return;
        }
        for (int nk = lower;; ++nk) {
          // dims 0..k all hold at least nk points
          std::size_t need = tail_prod;
          bool fits = true;
          for (std::size_t q = 0; q <= k && fits; ++q) {
            need *= static_cast<std::size_t>(nk);
            fits = need <= budget;
          }
          if (!fits) break;
          double p = partial + lambda[k] * table.distortion(nk);
          if (p > best_err * (1.0 + kTieRel)) continue;
          cur[k] = nk;
          rec(k - 1, tail_prod * static_cast<std::size_t>(nk), nk, p);
        }
      };
  rec(r - 1, 1, 1, 0.0);
  return best;
}

std::vector<int> greedy_sorted(const std::vector<double>& lambda, std::size_t budget,
                               const LookupTable1D& table) {
  const std::size_t r = lambda.size();
  std::vector<int> n(r, 1);
  if (r == 0) return n;
  greedy_fill(lambda, budget, table, n, r);
  double err = sq_error(lambda, n, table);

  // Block coordinate descent: re-optimize up to three dimensions exactly while
  // the others stay fixed. Among dimensions still at one point only the first
  // (largest eigenvalue) is a useful candidate.
  bool improved = r > 1;
  while (improved) {
    improved = false;
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < r; ++j) {
      if (n[j] > 1) {
        cand.push_back(j);
      } else {
        cand.push_back(j);
        break;
      }
    }
    const std::size_t width = std::min<std::size_t>(3, cand.size());
    if (width < 2) break;
    std::vector<std::size_t> pick(width);
    std::function<void(std::size_t, std::size_t)> blocks = [&](std::size_t depth, std::size_t from) {
      if (improved) return;
      if (depth == width) {
        std::vector<double> sub_lambda;
        std::vector<int> sub;
        std::size_t rest = product(n);
        for (std::size_t q : pick) {
          sub_lambda.push_back(lambda[q]);
          sub.push_back(n[q]);
          rest /= static_cast<std::size_t>(n[q]);
        }
        std::vector<int> opt = exact_sorted(sub_lambda, budget / rest, table, sub);
        std::vector<int> cand_n = n;
        for (std::size_t q = 0; q < width; ++q) cand_n[pick[q]] = opt[q];
        double e = sq_error(lambda, cand_n, table);
        if (cand_n != n && better(e, cand_n, err, n)) {
          n = cand_n;
          err = e;
          improved = true;
        }
        return;
      }
      for (std::size_t c = from; c < cand.size(); ++c) {
        pick[depth] = cand[c];
        blocks(depth + 1, c + 1);
      }
    };
    blocks(0, 0);
  }
  // Equal eigenvalues can leave inversions; sorting keeps the error.
  std::vector<int> sorted = n;
  sort_sizes(sorted);
  double es = sq_error(lambda, sorted, table);
  if (!better(err, n, es, sorted)) n = sorted;
  return n;
}
void check_budget(std::size_t budget) {
  if (budget < 1) throw Error(ErrorKind::EmptyBudget, "budget must be at least 1");
  if (budget > static_cast<std::size_t>(std::numeric_limits<int>::max()))
    throw Error(ErrorKind::InvalidArgument, "budget too large");
}

}  // namespace

LayoutCandidate select_layout_greedy(std::span<const double> eigenvalues, std::size_t budget,
                                     const LookupTable1D& table) {
  check_budget(budget);
  ActiveDims act = active_dims(eigenvalues);
  std::vector<int> n = greedy_sorted(act.lambda, budget, table);
  return expand(act, eigenvalues.size(), n, sq_error(act.lambda, n, table));
}

LayoutCandidate select_layout_exact(std::span<const double> eigenvalues, std::size_t budget,
                                    const LookupTable1D& table) {
  check_budget(budget);
  ActiveDims act = active_dims(eigenvalues);
  std::vector<int> n(act.lambda.size(), 1);
  greedy_fill(act.lambda, budget, table, n, n.size());
  n = exact_sorted(act.lambda, budget, table, n);
  return expand(act, eigenvalues.size(), n, sq_error(act.lambda, n, table));
}

LayoutCandidate select_layout(std::span<const double> eigenvalues, std::size_t budget,
                              const LookupTable1D& table) {
  check_budget(budget);
  ActiveDims act = active_dims(eigenvalues);
  if (act.lambda.size() <= 4 && budget <= 10000)
    return select_layout_exact(eigenvalues, budget, table);
  return select_layout_greedy(eigenvalues, budget, table);
}

namespace {

// Columns of basis reordered by descending lambda (stable).
std::vector<Index> descending(const Vector& lambda) {
  std::vector<Index> order(static_cast<std::size_t>(lambda.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return lambda[a] > lambda[b]; });
  return order;
}

void check_basis(const Vector& mean, const Matrix& basis, const Vector& lambda) {
  const Index d = mean.size();
  if (basis.rows() != d || basis.cols() != d || lambda.size() != d)
    throw Error(ErrorKind::DimensionMismatch, "basis and eigenvalues must match the mean dimension");
}

Vector clamp_lambda(const Vector& lambda) {
  double lmax = lambda.size() ? lambda.maxCoeff() : 0.0;
  Vector out = lambda;
  for (Index j = 0; j < out.size(); ++j)
    if (!(out[j] > kRankTol * lmax)) out[j] = 0.0;
  return out;
}

}  // namespace

GridScheme grid_scheme_in_basis(const Vector& mean, const Matrix& basis, const Vector& lambda_in,
                                std::size_t budget, const LookupTable1D& table) {
  check_basis(mean, basis, lambda_in);
  check_budget(budget);
  Vector lambda = clamp_lambda(lambda_in);
  auto order = descending(lambda);
  const Index d = mean.size();
  Matrix rot(d, d);
  Vector scales(d);
  std::vector<double> lam(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    rot.col(j) = basis.col(order[static_cast<std::size_t>(j)]);
    lam[static_cast<std::size_t>(j)] = lambda[order[static_cast<std::size_t>(j)]];
  }
  LayoutCandidate layout = select_layout(lam, budget, table);
  std::vector<std::vector<double>> points(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    auto ju = static_cast<std::size_t>(j);
    if (lam[ju] > 0.0) {
      scales[j] = std::sqrt(lam[ju]);
      points[ju] = table.get(layout.sizes[ju]).locations;
    } else {
      scales[j] = 1.0;
      points[ju] = {0.0};
    }
  }
  return GridScheme(std::move(points), Axes(std::move(rot), std::move(scales), mean));
}

CrossScheme cross_scheme_in_basis(const Vector& mean, const Matrix& basis, const Vector& lambda_in,
                                  std::size_t budget) {
  check_basis(mean, basis, lambda_in);
  check_budget(budget);
  Vector lambda = clamp_lambda(lambda_in);
  auto order = descending(lambda);
  const Index d = mean.size();
  Matrix rot(d, d);
  Vector scales(d);
  Index rank = 0;
  for (Index j = 0; j < d; ++j) {
    Index src = order[static_cast<std::size_t>(j)];
    rot.col(j) = basis.col(src);
    if (lambda[src] > 0.0) {
      scales[j] = std::sqrt(lambda[src]);
      ++rank;
    } else {
      scales[j] = 1.0;
    }
  }
  std::vector<double> thresholds;
  if (rank > 0) {
    const std::size_t per_shell = 2 * static_cast<std::size_t>(rank);
    const std::size_t shells = (budget - 1) / per_shell;
    const double atoms = static_cast<double>(1 + per_shell * shells);
    for (std::size_t k = 1; k <= shells; ++k) {
      double cdf = static_cast<double>(1 + per_shell * (k - 1)) / atoms;
      thresholds.push_back(chi2_quantile(cdf, static_cast<double>(rank)));
    }
  }
  return CrossScheme(Axes(std::move(rot), std::move(scales), mean), std::move(thresholds), true, rank);
}

Scheme generate_scheme_gaussian(const GaussianComponent& component, std::size_t budget,
                                Configuration configuration, const LookupTable1D& table) {
  check_budget(budget);
  const auto& sp = component.spectrum();
  if (configuration == Configuration::Cross)
    return cross_scheme_in_basis(component.mean(), sp.eigenvectors, sp.eigenvalues, budget);
  return grid_scheme_in_basis(component.mean(), sp.eigenvectors, sp.eigenvalues, budget, table);
}

namespace {

// Splits [0, lambda.size()) into runs of numerically equal values (lambda descending).
std::vector<std::pair<Index, Index>> equal_blocks(const Vector& lambda, double scale) {
  std::vector<std::pair<Index, Index>> blocks;
  Index start = 0;
  for (Index j = 1; j <= lambda.size(); ++j) {
    if (j == lambda.size() || std::abs(lambda[j - 1] - lambda[j]) > kEigenGroupTol * scale) {
      blocks.emplace_back(start, j);
      start = j;
    }
  }
  return blocks;
}

// Rotates the columns of V (spanning a common eigenspace of the members before
// `next`) so that they also diagonalize members next, next+1, ...
void refine_block(Matrix& v, const std::vector<const GaussianComponent*>& comps, std::size_t next) {
  if (v.cols() <= 1 || next >= comps.size()) return;
  Matrix b = v.transpose() * comps[next]->covariance() * v;
  b = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  Vector ev = es.eigenvalues().reverse();
  Matrix u = es.eigenvectors().rowwise().reverse();
  v = v * u;
  double scale = std::max(comps[next]->spectrum().max_eigenvalue(), 1e-300);
  for (auto [lo, hi] : equal_blocks(ev, scale)) {
    Matrix sub = v.middleCols(lo, hi - lo);
    refine_block(sub, comps, next + 1);
    v.middleCols(lo, hi - lo) = sub;
  }
}

Matrix shared_basis(const std::vector<const GaussianComponent*>& comps,
                    const std::vector<double>& weights) {
  const Index d = comps.front()->dim();
  Matrix s = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < comps.size(); ++i) s += weights[i] * comps[i]->covariance();
  SpectralDecomposition sd = spectral(s);
  Matrix v = sd.eigenvectors;
  double scale = std::max(sd.max_eigenvalue(), 1e-300);
  for (auto [lo, hi] : equal_blocks(sd.eigenvalues, scale)) {
    Matrix sub = v.middleCols(lo, hi - lo);
    refine_block(sub, comps, 0);
    v.middleCols(lo, hi - lo) = sub;
  }
  return v;
}

}  // namespace

Homogeneity homogeneity_check(const std::vector<const GaussianComponent*>& components,
                              const std::vector<double>& weights, double tol) {
  if (components.empty()) throw Error(ErrorKind::InvalidArgument, "homogeneity check needs components");
  if (weights.size() != components.size())
    throw Error(ErrorKind::DimensionMismatch, "one weight per component required");
  Homogeneity out;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const Matrix& a = components[i]->covariance();
    for (std::size_t j = i + 1; j < components.size(); ++j) {
      const Matrix& b = components[j]->covariance();
      double c = (a * b - b * a).norm();
      if (c > tol * a.norm() * b.norm()) return out;
    }
  }
  out.homogeneous = true;
  out.shared_basis = shared_basis(components, weights);
  return out;
}

double default_merge_tolerance(const GaussianMixture& mix) {
  Moments m = mixture_moments(mix);
  double mean_eig = m.covariance.trace() / static_cast<double>(mix.dim());
  return 1e-2 * std::sqrt(std::max(mean_eig, 0.0));
}

namespace {

Vector mean_shift(const GaussianMixture& mix, Vector x) {
  const std::size_t m = mix.size();
  std::vector<double> logw(m);
  for (int it = 0; it < 500; ++it) {
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      logw[i] = mix.weight(i) > 0.0 ? std::log(mix.weight(i)) + mix.component(i).log_density(x)
                                    : -std::numeric_limits<double>::infinity();
      lmax = std::max(lmax, logw[i]);
    }
    const Index d = mix.dim();
    Matrix a = Matrix::Zero(d, d);
    Vector b = Vector::Zero(d);
    for (std::size_t i = 0; i < m; ++i) {
      double w = std::exp(logw[i] - lmax);
      if (w == 0.0) continue;
      const Matrix& p = mix.component(i).precision();
      a += w * p;
      b += w * (p * mix.component(i).mean());
    }
    Vector next = a.llt().solve(b);
    double step = (next - x).norm();
    x = next;
    if (!(step >= 1e-8)) break;
  }
  return x;
}

}  // namespace

std::vector<ModeCluster> cluster_modes(const GaussianMixture& mix, std::optional<double> merge_tol,
                                       double homogeneity_tol) {
  const std::size_t m = mix.size();
  const double tol = merge_tol ? *merge_tol : default_merge_tolerance(mix);
  if (!(tol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "merge tolerance must be non-negative");
  bool any_singular = false;
  for (const auto& c : mix.components()) any_singular = any_singular || c.singular();

  std::vector<Vector> points(m);
  for (std::size_t i = 0; i < m; ++i)
    points[i] = any_singular ? mix.component(i).mean() : mean_shift(mix, mix.component(i).mean());

  // Single-linkage merge of converged points.
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if ((points[i] - points[j]).norm() <= tol) {
        std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  std::vector<ModeCluster> clusters;
  std::vector<long> slot(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    auto& c = clusters[static_cast<std::size_t>(slot[root])];
    c.members.push_back(i);
    c.cluster_weight += mix.weight(i);
  }

  for (auto& c : clusters) {
    if (any_singular) {
      Vector mean = Vector::Zero(mix.dim());
      double total = 0.0;
      for (std::size_t i : c.members) {
        mean += mix.weight(i) * mix.component(i).mean();
        total += mix.weight(i);
      }
      if (total > 0.0) {
        c.mode_location = mean / total;
      } else {
        c.mode_location = mix.component(c.members.front()).mean();
      }
    } else {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i : c.members) {
        double ld = log_density(mix, points[i]);
        if (c.mode_location.size() == 0 || ld > best) {
          best = ld;
          c.mode_location = points[i];
        }
      }
    }
    std::vector<const GaussianComponent*> comps;
    std::vector<double> w;
    for (std::size_t i : c.members) {
      comps.push_back(&mix.component(i));
      w.push_back(mix.weight(i));
    }
    Homogeneity h = homogeneity_check(comps, w, homogeneity_tol);
    c.homogeneous = h.homogeneous;
    c.shared_basis = std::move(h.shared_basis);
  }
  return clusters;
}

std::vector<std::size_t> allocate_budget(std::span<const double> weights, std::size_t budget) {
  const std::size_t k = weights.size();
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "no weights to allocate");
  if (budget < k)
    throw Error(ErrorKind::BudgetTooSmall,
                "budget " + std::to_string(budget) + " is smaller than " + std::to_string(k) + " groups");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::InvalidWeights, "weights must be non-negative");
    total += w;
  }
  std::vector<std::size_t> out(k, 0);
  std::vector<double> rem(k, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double share = total > 0.0 ? static_cast<double>(budget) * weights[i] / total
                               : static_cast<double>(budget) / static_cast<double>(k);
    out[i] = static_cast<std::size_t>(std::floor(share));
    rem[i] = share - std::floor(share);
    used += out[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t q = 0; used < budget && q < k; ++q, ++used) ++out[order[q]];
  // Floor of one, taken from the largest allocation.
  for (std::size_t i = 0; i < k; ++i) {
    if (out[i] > 0) continue;
    std::size_t donor = static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
    --out[donor];
    out[i] = 1;
  }
  return out;
}

Vector local_gaussian_variances(const GaussianMixture& mix, const std::vector<std::size_t>& members,
                                const Vector& mode, const Matrix& basis) {
  GaussianMixture sub = mix.subset(members);
  bool any_singular = false;
  for (const auto& c : sub.components()) any_singular = any_singular || c.singular();
  if (!any_singular) {
    LogDensityDerivatives der = log_density_grad_hess(sub, mode);
    Matrix a = -der.hessian;
    a = 0.5 * (a + a.transpose());
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success) {
      Matrix c = llt.solve(Matrix::Identity(a.rows(), a.cols()));
      Vector lam = (basis.transpose() * c * basis).diagonal();
      if ((lam.array() > 0.0).all() && lam.allFinite()) return lam;
    }
  }
  Matrix c = Matrix::Zero(mix.dim(), mix.dim());
  for (std::size_t i = 0; i < sub.size(); ++i) c += sub.weight(i) * sub.component(i).covariance();
  Vector lam = (basis.transpose() * c * basis).diagonal();
  return lam.cwiseMax(0.0);
}

SchemeSet generate_scheme_mixture(const GaussianMixture& mix, std::size_t budget,
                                  const MixtureSchemeOptions& options, const LookupTable1D& table) {
  check_budget(budget);
  SchemeSet out;
  if (mix.size() == 1) {
    SchemeEntry e;
    e.anchor = mix.component(0).mean();
    e.members = std::vector<std::size_t>{0};
    e.schemes.push_back(generate_scheme_gaussian(mix.component(0), budget, options.configuration, table));
    e.budget = budget;
    out.entries.push_back(std::move(e));
    return out;
  }

  auto clusters = cluster_modes(mix, options.mode_merge_tol, options.homogeneity_tol);
  std::vector<double> cw;
  for (const auto& c : clusters) cw.push_back(c.cluster_weight);
  auto budgets = allocate_budget(cw, budget);

  for (std::size_t s = 0; s < clusters.size(); ++s) {
    const auto& c = clusters[s];
    const std::size_t ns = budgets[s];
    SchemeEntry e;
    e.anchor = c.mode_location;
    e.members = c.members;
    e.budget = ns;

    bool shared = options.configuration == Configuration::Grid && options.per_mode && c.homogeneous;
    if (shared) {
      GridScheme g = [&] {
        if (c.members.size() == 1) {
          const auto& comp = mix.component(c.members.front());
          e.anchor = comp.mean();
          return grid_scheme_in_basis(comp.mean(), comp.spectrum().eigenvectors,
                                      comp.spectrum().eigenvalues, ns, table);
        }
        Vector lam = local_gaussian_variances(mix, c.members, c.mode_location, *c.shared_basis);
        return grid_scheme_in_basis(c.mode_location, *c.shared_basis, lam, ns, table);
      }();
      // Every member must be representable on the shared grid.
      for (std::size_t i : c.members) {
        try {
          grid_marginals(mix.component(i), g, kDefaultAlignmentTol);
        } catch (const Error& err) {
          if (err.kind() != ErrorKind::OffSupport && err.kind() != ErrorKind::NotAligned) throw;
          shared = false;
          break;
        }
      }
      if (shared) e.schemes.emplace_back(std::move(g));
    }
    if (!shared) {
      double pmax = 0.0;
      for (std::size_t i : c.members) pmax = std::max(pmax, mix.weight(i));
      for (std::size_t i : c.members) {
        double share = pmax > 0.0 ? static_cast<double>(ns) * mix.weight(i) / pmax : static_cast<double>(ns);
        auto ni = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(share)));
        e.schemes.push_back(generate_scheme_gaussian(mix.component(i), ni, options.configuration, table));
      }
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace gmq
