#include "gmq/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gmq/error.hpp"
#include "gmq/oracle.hpp"
#include "gmq/quantize1d.hpp"

namespace gmq {

std::string_view to_string(CertificateKind kind) noexcept {
  switch (kind) {
    case CertificateKind::Exact: return "exact";
    case CertificateKind::UpperBound: return "upper_bound";
    case CertificateKind::Unavailable: return "unavailable";
  }
  return "unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxEnumeratedCells = 50'000'000;

double standardize(double edge, double m, double sigma) {
  if (std::isinf(edge)) return edge;
  return (edge - m) / sigma;
}

void check_dims(const GaussianComponent& c, const Axes& axes) {
  if (c.dim() != axes.dim())
    throw Error(ErrorKind::DimensionMismatch, "scheme and component dimensions differ");
}

}  // namespace

GridMarginals grid_marginals(const GaussianComponent& component, const GridScheme& scheme,
                             double alignment_tol) {
  const Axes& axes = scheme.axes();
  check_dims(component, axes);
  if (!alignment_check(axes, component, alignment_tol))
    throw Error(ErrorKind::NotAligned, "grid axes do not diagonalize the component covariance");
  const Matrix& r = axes.rotation();
  const Vector& s = axes.scales();
  const Matrix a = r.transpose() * component.covariance() * r;
  const Vector m = axes.to_local(component.mean());
  const double lmax = component.spectrum().max_eigenvalue();
  const double support_tol = 1e-8 * std::max({1.0, component.mean().norm(), std::sqrt(lmax)});

  GridMarginals out;
  out.probs.resize(static_cast<std::size_t>(component.dim()));
  for (Index j = 0; j < component.dim(); ++j) {
    const auto& pts = scheme.points(j);
    const auto& edges = scheme.edges(j);
    auto& pr = out.probs[static_cast<std::size_t>(j)];
    pr.assign(pts.size(), 0.0);
    const double ajj = a(j, j);
    if (!(ajj > kRankTol * lmax)) {
      // Point mass in this coordinate: it must sit on a grid point.
      auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, m[j]);
      auto k = static_cast<std::size_t>(it - (edges.begin() + 1));
      double gap = std::abs(pts[k] - m[j]) * s[j];
      if (gap > support_tol)
        throw Error(ErrorKind::OffSupport,
                    "component lies off the grid in degenerate local dimension " + std::to_string(j));
      pr[k] = 1.0;
      out.sq_error += gap * gap;
      continue;
    }
    const double sigma = std::sqrt(ajj) / s[j];
    double cost = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      double lo = standardize(edges[k], m[j], sigma);
      double hi = standardize(edges[k + 1], m[j], sigma);
      pr[k] = cell_prob(lo, hi);
      cost += cell_cost(lo, hi, (pts[k] - m[j]) / sigma);
    }
    out.sq_error += s[j] * s[j] * sigma * sigma * cost;
  }
  return out;
}

namespace {

struct Atoms {
  std::vector<Vector> locations;
  std::vector<double> probs;

  void append(const Matrix& loc, const std::vector<double>& p) {
    for (Index i = 0; i < loc.rows(); ++i) {
      locations.push_back(loc.row(i).transpose());
      probs.push_back(p[static_cast<std::size_t>(i)]);
    }
  }
};

// All cells of a grid with probability sum_i w_i prod_j probs_i[j][k_j].
void enumerate_grid(const GridScheme& g, const std::vector<double>& weights,
                    const std::vector<GridMarginals>& marg, Matrix& locations, std::vector<double>& probs) {
  const std::size_t n = g.size();
  if (n > kMaxEnumeratedCells)
    throw Error(ErrorKind::InvalidArgument, "grid has too many cells to enumerate");
  const Index d = g.dim();
  const auto sizes = g.sizes();
  std::vector<Index> active;
  for (Index j = 0; j < d; ++j)
    if (sizes[static_cast<std::size_t>(j)] > 1) active.push_back(j);

  const Axes& axes = g.axes();
  Vector base_local(d);
  for (Index j = 0; j < d; ++j) base_local[j] = g.points(j)[0];
  for (Index j : active) base_local[j] = 0.0;
  const Vector base = axes.to_world(base_local);
  Matrix cols(d, static_cast<Index>(active.size()));
  for (std::size_t q = 0; q < active.size(); ++q)
    cols.col(static_cast<Index>(q)) = axes.rotation().col(active[q]) * axes.scales()[active[q]];

  locations.resize(static_cast<Index>(n), d);
  probs.assign(n, 0.0);
  std::vector<std::size_t> k(active.size(), 0);
  Vector y(static_cast<Index>(active.size()));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t q = 0; q < active.size(); ++q) y[static_cast<Index>(q)] = g.points(active[q])[k[q]];
    locations.row(static_cast<Index>(c)) = (base + cols * y).transpose();
    double p = 0.0;
    for (std::size_t i = 0; i < marg.size(); ++i) {
      double pi = weights[i];
      for (std::size_t q = 0; q < active.size() && pi != 0.0; ++q)
        pi *= marg[i].probs[static_cast<std::size_t>(active[q])][k[q]];
      p += pi;
    }
    probs[c] = p;
    for (std::size_t q = active.size(); q-- > 0;) {
      if (++k[q] < sizes[static_cast<std::size_t>(active[q])]) break;
      k[q] = 0;
    }
  }
}

DiscreteDistribution make_discrete(const Atoms& atoms, Index d) {
  Matrix loc(static_cast<Index>(atoms.locations.size()), d);
  Vector p(static_cast<Index>(atoms.probs.size()));
  double total = 0.0;
  for (double v : atoms.probs) total += v;
  for (std::size_t i = 0; i < atoms.locations.size(); ++i) {
    loc.row(static_cast<Index>(i)) = atoms.locations[i].transpose();
    p[static_cast<Index>(i)] = atoms.probs[i] / total;
  }
  return DiscreteDistribution(std::move(loc), std::move(p));
}

struct CrossPart {
  std::vector<double> probs;
  double sq_error = kNaN;
  double sq_std_error = 0.0;
  bool available = false;
};

CrossPart cross_part(const GaussianComponent& component, const CrossScheme& scheme,
                     const DiscretizeOptions& options) {
  const Axes& axes = scheme.axes();
  check_dims(component, axes);
  const Matrix& r = axes.rotation();
  const Matrix a = r.transpose() * component.covariance() * r;
  Matrix expected = Matrix::Zero(a.rows(), a.cols());
  for (Index j = 0; j < scheme.rank(); ++j) expected(j, j) = axes.scales()[j] * axes.scales()[j];
  const double tol = options.alignment_tol;
  if ((a - expected).norm() > tol * std::max(component.covariance().norm(), 1e-300) ||
      (component.mean() - axes.offset()).norm() >
          tol * std::max({1.0, component.mean().norm(), std::sqrt(component.spectrum().max_eigenvalue())}))
    throw Error(ErrorKind::NotAligned, "cross scheme frame does not standardize the component");

  CrossPart out;
  for (const auto& reg : scheme.regions()) out.probs.push_back(reg.mass);
  if (options.cross_mc_samples == 0) return out;
  GaussianMixture single(component);
  McEstimate est = mc_transport_cost(
      single, [&](const Vector& x, std::size_t) { return scheme.regions()[scheme.locate(x)].location; },
      options.cross_mc_samples, options.seed);
  out.available = true;
  out.sq_error = est.value * est.value;
  out.sq_std_error = 2.0 * est.value * est.std_error;
  return out;
}

W2Certificate statistical_certificate(double sq, double sq_se) {
  W2Certificate c;
  c.value = std::sqrt(sq);
  c.kind = CertificateKind::UpperBound;
  c.statistical = true;
  c.std_error = c.value > 0.0 ? sq_se / (2.0 * c.value) : 0.0;
  return c;
}

}  // namespace

QuantizationResult discretize_gaussian_grid(const GaussianComponent& component, const GridScheme& scheme,
                                            double alignment_tol) {
  GridMarginals marg = grid_marginals(component, scheme, alignment_tol);
  Matrix loc;
  std::vector<double> probs;
  enumerate_grid(scheme, {1.0}, {marg}, loc, probs);
  Vector p = Eigen::Map<Vector>(probs.data(), static_cast<Index>(probs.size()));
  W2Certificate cert;
  cert.value = std::sqrt(marg.sq_error);
  cert.kind = CertificateKind::Exact;
  return QuantizationResult{DiscreteDistribution(std::move(loc), p / p.sum()), cert,
                            std::vector<double>{marg.sq_error}};
}

QuantizationResult discretize_gaussian_cross(const GaussianComponent& component, const CrossScheme& scheme,
                                             const DiscretizeOptions& options) {
  CrossPart part = cross_part(component, scheme, options);
  Matrix loc = scheme_locations(scheme);
  Vector p = Eigen::Map<Vector>(part.probs.data(), static_cast<Index>(part.probs.size()));
  W2Certificate cert;
  if (part.available) {
    cert = statistical_certificate(part.sq_error, part.sq_std_error);
  } else {
    cert.value = kNaN;
    cert.kind = CertificateKind::Unavailable;
  }
  return QuantizationResult{DiscreteDistribution(std::move(loc), p / p.sum()), cert,
                            std::vector<double>{part.sq_error}};
}

QuantizationResult discretize_mixture(const GaussianMixture& mix, const Scheme& scheme,
                                      const DiscretizeOptions& options) {
  SchemeEntry e;
  e.anchor = scheme_axes(scheme).offset();
  std::vector<std::size_t> all(mix.size());
  std::iota(all.begin(), all.end(), 0);
  e.members = all;
  e.schemes.push_back(scheme);
  SchemeSet set;
  set.entries.push_back(std::move(e));
  return discretize_mixture(mix, set, options);
}

std::vector<std::size_t> assign_entries(const GaussianMixture& mix, const SchemeSet& schemes) {
  if (schemes.entries.empty()) throw Error(ErrorKind::EmptySchemeSet, "scheme set has no entries");
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> out(mix.size(), kNone);
  for (std::size_t e = 0; e < schemes.entries.size(); ++e) {
    const auto& entry = schemes.entries[e];
    if (entry.schemes.empty()) throw Error(ErrorKind::EmptySchemeSet, "scheme set entry has no schemes");
    if (entry.anchor.size() != mix.dim())
      throw Error(ErrorKind::DimensionMismatch, "anchor dimension differs from the mixture");
    if (!entry.members) continue;
    for (std::size_t i : *entry.members) {
      if (i >= mix.size()) throw Error(ErrorKind::IndexOutOfRange, "member index out of range");
      if (out[i] != kNone) throw Error(ErrorKind::InvalidArgument, "component listed in two entries");
      out[i] = e;
    }
  }
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (out[i] != kNone) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < schemes.entries.size(); ++e) {
      double dist = (schemes.entries[e].anchor - mix.component(i).mean()).norm();
      if (dist < best) {
        best = dist;
        out[i] = e;
      }
    }
  }
  return out;
}

namespace {

std::size_t scheme_for(const SchemeEntry& entry, std::size_t i, const Vector& mean) {
  if (entry.schemes.size() == 1) return 0;
  if (entry.members && entry.members->size() == entry.schemes.size()) {
    auto it = std::find(entry.members->begin(), entry.members->end(), i);
    if (it != entry.members->end()) return static_cast<std::size_t>(it - entry.members->begin());
  }
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < entry.schemes.size(); ++s) {
    double dist = (scheme_axes(entry.schemes[s]).offset() - mean).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = s;
    }
  }
  return best;
}

}  // namespace

QuantizationResult discretize_mixture(const GaussianMixture& mix, const SchemeSet& schemes,
                                      const DiscretizeOptions& options) {
  const auto entry_of = assign_entries(mix, schemes);
  const std::size_t m = mix.size();
  std::vector<double> sq(m, kNaN);
  std::vector<double> sq_se(m, 0.0);
  bool any_cross = false;
  bool unavailable = false;
  bool compressed = false;
  double compression_sq = 0.0;
  std::size_t schemes_used = 0;
  Atoms all;

  for (std::size_t e = 0; e < schemes.entries.size(); ++e) {
    const auto& entry = schemes.entries[e];
    std::vector<std::vector<std::size_t>> users(entry.schemes.size());
    for (std::size_t i = 0; i < m; ++i)
      if (entry_of[i] == e) users[scheme_for(entry, i, mix.component(i).mean())].push_back(i);

    Atoms local;
    for (std::size_t s = 0; s < entry.schemes.size(); ++s) {
      if (users[s].empty()) continue;
      ++schemes_used;
      const Scheme& scheme = entry.schemes[s];
      if (entry.schemes.size() == 1 && entry.budget > 0 && scheme_size(scheme) > entry.budget)
        throw Error(ErrorKind::BudgetViolation, "scheme size exceeds its entry budget");
      Matrix loc;
      std::vector<double> probs;
      if (const auto* g = std::get_if<GridScheme>(&scheme)) {
        std::vector<GridMarginals> marg;
        std::vector<double> w;
        for (std::size_t i : users[s]) {
          marg.push_back(grid_marginals(mix.component(i), *g, options.alignment_tol));
          w.push_back(mix.weight(i));
          sq[i] = marg.back().sq_error;
        }
        enumerate_grid(*g, w, marg, loc, probs);
      } else {
        const auto& cross = std::get<CrossScheme>(scheme);
        any_cross = true;
        loc = scheme_locations(scheme);
        probs.assign(cross.size(), 0.0);
        for (std::size_t i : users[s]) {
          DiscretizeOptions o = options;
          o.seed = derive_seed(options.seed, i);
          CrossPart part = cross_part(mix.component(i), cross, o);
          for (std::size_t k = 0; k < probs.size(); ++k) probs[k] += mix.weight(i) * part.probs[k];
          sq[i] = part.sq_error;
          sq_se[i] = part.sq_std_error;
          unavailable = unavailable || !part.available;
        }
      }
      local.append(loc, probs);
    }

    const double w_entry = std::accumulate(local.probs.begin(), local.probs.end(), 0.0);
    if (options.compress && entry.schemes.size() > 1 && entry.budget > 0 &&
        local.probs.size() > entry.budget && w_entry > 0.0) {
      Atoms normalized = local;
      for (double& p : normalized.probs) p /= w_entry;
      KMeansResult km = weighted_kmeans(make_discrete(normalized, mix.dim()), entry.budget);
      compressed = true;
      compression_sq += w_entry * km.transport_cost * km.transport_cost;
      local = Atoms{};
      const Matrix& cl = km.compressed.locations();
      std::vector<double> cp(static_cast<std::size_t>(cl.rows()));
      for (Index k = 0; k < cl.rows(); ++k) cp[static_cast<std::size_t>(k)] = w_entry * km.compressed.probabilities()[k];
      local.append(cl, cp);
    }
    all.locations.insert(all.locations.end(), local.locations.begin(), local.locations.end());
    all.probs.insert(all.probs.end(), local.probs.begin(), local.probs.end());
  }

  QuantizationResult result{make_discrete(all, mix.dim()), W2Certificate{}, sq};
  if (unavailable) {
    result.certificate.value = kNaN;
    result.certificate.kind = CertificateKind::Unavailable;
    return result;
  }
  double total_sq = 0.0;
  double se_sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    total_sq += mix.weight(i) * sq[i];
    se_sq += std::pow(mix.weight(i) * sq_se[i], 2);
  }
  if (any_cross) {
    result.certificate = statistical_certificate(total_sq, std::sqrt(se_sq));
  } else {
    result.certificate.value = std::sqrt(total_sq);
    result.certificate.kind =
        (schemes_used == 1 && !compressed) ? CertificateKind::Exact : CertificateKind::UpperBound;
  }
  result.certificate.value += std::sqrt(compression_sq);
  return result;
}

KMeansResult weighted_kmeans(const DiscreteDistribution& atoms, std::size_t k) {
  const auto n = static_cast<std::size_t>(atoms.size());
  if (k < 1 || k > n)
    throw Error(ErrorKind::InvalidK, "k must lie in [1, " + std::to_string(n) + "]");
  const Matrix& x = atoms.locations();
  const Vector& p = atoms.probabilities();
  const Index d = atoms.dim();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p[static_cast<Index>(a)] > p[static_cast<Index>(b)];
  });
  Matrix centers(static_cast<Index>(k), d);
  for (std::size_t c = 0; c < k; ++c) centers.row(static_cast<Index>(c)) = x.row(static_cast<Index>(order[c]));

  auto nearest = [&](Index i, const std::vector<bool>* keep) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (keep && !(*keep)[c]) continue;
      double dist = (x.row(i) - centers.row(static_cast<Index>(c))).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    return best;
  };

  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> assign(n, kUnassigned);
  std::vector<double> mass(k, 0.0);
  for (int iter = 0; iter < 10000; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = nearest(static_cast<Index>(i), nullptr);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(static_cast<Index>(k), d);
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Index>(assign[i])) += p[static_cast<Index>(i)] * x.row(static_cast<Index>(i));
      mass[assign[i]] += p[static_cast<Index>(i)];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (mass[c] > 0.0) centers.row(static_cast<Index>(c)) = sums.row(static_cast<Index>(c)) / mass[c];
  }

  std::vector<bool> keep(k);
  for (std::size_t c = 0; c < k; ++c) keep[c] = mass[c] > 0.0;
  std::vector<std::size_t> new_index(k, kUnassigned);
  std::size_t kept = 0;
  for (std::size_t c = 0; c < k; ++c)
    if (keep[c]) new_index[c] = kept++;

  KMeansResult out{DiscreteDistribution(Matrix::Zero(1, d), Vector::Ones(1)), 0.0, std::vector<std::size_t>(n)};
  Matrix loc(static_cast<Index>(kept), d);
  Vector prob(static_cast<Index>(kept));
  for (std::size_t c = 0; c < k; ++c)
    if (keep[c]) {
      loc.row(static_cast<Index>(new_index[c])) = centers.row(static_cast<Index>(c));
      prob[static_cast<Index>(new_index[c])] = mass[c];
    }
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = assign[i];
    if (!keep[c]) c = nearest(static_cast<Index>(i), &keep);  // zero-mass atom of a dropped cluster
    out.assignment[i] = new_index[c];
    cost += p[static_cast<Index>(i)] * (x.row(static_cast<Index>(i)) - centers.row(static_cast<Index>(c))).squaredNorm();
  }
  out.compressed = DiscreteDistribution(std::move(loc), prob / prob.sum());
  out.transport_cost = std::sqrt(cost);
  return out;
}

}  // namespace gmq
