// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gmq/discretize.hpp"
#include "gmq/oracle.hpp"
#include "gmq/quantize1d.hpp"
#include "gmq/scheme_gen.hpp"
#include "support.hpp"

using namespace gmq;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << "; failed: ";
    else detail << ", ";
    detail << what;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const LookupTable1D& big_table() {
  static const LookupTable1D table = LookupTable1D::build(10000);
  return table;
}

double w2_of(const GaussianMixture& mix, std::size_t size, bool per_mode, const LookupTable1D& table) {
  MixtureSchemeOptions o;
  o.per_mode = per_mode;
  return discretize_mixture(mix, generate_scheme_mixture(mix, size, o, table)).certificate.value;
}

// Aligned Gaussian plus a random grid in its eigenframe with at most max_cells cells.
struct AlignedCase {
  GaussianComponent component;
  GridScheme grid;
};

AlignedCase random_aligned(std::mt19937_64& gen, Index d, std::size_t max_cells) {
  std::uniform_real_distribution<double> u(0.3, 2.0);
  std::uniform_int_distribution<int> npts(1, 4);
  Matrix q = test::random_orthogonal(d, gen);
  Vector lam(d);
  for (Index j = 0; j < d; ++j) lam[j] = u(gen);
  Matrix cov = q * lam.asDiagonal() * q.transpose();
  GaussianComponent c(test::random_vector(d, gen), 0.5 * (cov + cov.transpose()));
  Vector scales(d);
  for (Index j = 0; j < d; ++j) scales[j] = u(gen);
  std::vector<std::vector<double>> pts;
  std::size_t cells = 1;
  for (Index j = 0; j < d; ++j) {
    std::size_t n = static_cast<std::size_t>(npts(gen));
    while (n > 1 && cells * n > max_cells) --n;
    cells *= n;
    Vector v = test::random_vector(static_cast<Index>(n), gen);
    std::vector<double> p(v.data(), v.data() + v.size());
    std::sort(p.begin(), p.end());
    pts.push_back(p);
  }
  return {c, GridScheme(pts, Axes(q, scales, test::random_vector(d, gen, 0.5)))};
}

Outcome criterion1() {
  Outcome o;
  const double expected[] = {1.0, 0.3634, 0.1902, 0.1175, 0.0799};
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n) worst = std::max(worst, std::abs(optimal_quantizer(n).distortion - expected[n - 1]));
  auto q2 = optimal_quantizer(2);
  const double c = std::sqrt(2.0 / M_PI);
  double loc = std::max(std::abs(q2.locations[0] + c), std::abs(q2.locations[1] - c));
  o.detail << "max |D(n)-ref| " << worst << ", n=2 location error " << loc;
  o.check(worst <= 1e-3, "distortions");
  o.check(loc <= 1e-9, "n=2 locations");
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> ab(-6.0, 6.0), cc(-4.0, 4.0);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    double a = ab(gen), b = ab(gen), c = cc(gen);
    if (a > b) std::swap(a, b);
    if (t % 10 == 0) a = -INFINITY;
    if (t % 10 == 1) b = INFINITY;
    worst = std::max(worst, std::abs(cell_cost(a, b, c) - quadrature_cell_cost(a, b, c)));
  }
  o.check(worst <= 1e-9, "cell_cost vs quadrature");

  const std::size_t samples = 1000000;
  double worst_z = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto ac = random_aligned(gen, 1 + t % 3, 64);
    auto exact = discretize_gaussian_grid(ac.component, ac.grid).discrete.probabilities();
    const GridScheme& g = ac.grid;
    auto mc = mc_partition_probs(ac.component, [&](const Vector& x) { return g.flatten(g.locate(x)); }, g.size(),
                                 samples, 7000 + static_cast<std::uint64_t>(t));
    for (std::size_t k = 0; k < g.size(); ++k) {
      double p = exact[static_cast<Index>(k)];
      double sigma = std::max(std::sqrt(p * (1.0 - p) / samples), 1.0 / samples);
      worst_z = std::max(worst_z, std::abs(mc[k].value - p) / sigma);
    }
  }
  o.detail << "max cell_cost error " << worst << ", max cell-probability deviation " << worst_z << " sigma";
  o.check(worst_z <= 4.0, "cell probabilities vs Monte-Carlo");
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937_64 gen(33);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Index d = 1 + t % 3;
    auto ac = random_aligned(gen, d, 64);
    const Axes& ax = ac.grid.axes();
    // Local coordinate j is N(m_j, sd_j^2); the squared world distance along it is lam_j (z - c)^2 in
    // standardized units.
    std::vector<double> m(static_cast<std::size_t>(d)), sd(m), lam(m);
    for (Index j = 0; j < d; ++j) {
      Vector r = ax.rotation().col(j);
      lam[j] = r.dot(ac.component.covariance() * r);
      m[j] = r.dot(ac.component.mean() - ax.offset()) / ax.scales()[j];
      sd[j] = std::sqrt(lam[j]) / ax.scales()[j];
    }
    double brute = 0.0;
    for (std::size_t flat = 0; flat < ac.grid.size(); ++flat) {
      auto idx = ac.grid.unflatten(flat);
      std::vector<double> prob(idx.size()), cost(idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& e = ac.grid.edges(static_cast<Index>(j));
        double a = (e[idx[j]] - m[j]) / sd[j], b = (e[idx[j] + 1] - m[j]) / sd[j];
        double c = (ac.grid.points(static_cast<Index>(j))[idx[j]] - m[j]) / sd[j];
        prob[j] = quadrature_cell_prob(a, b);
        cost[j] = lam[j] * quadrature_cell_cost(a, b, c);
      }
      for (std::size_t j = 0; j < idx.size(); ++j) {
        double term = cost[j];
        for (std::size_t i = 0; i < idx.size(); ++i)
          if (i != j) term *= prob[i];
        brute += term;
      }
    }
    double cert = discretize_gaussian_grid(ac.component, ac.grid).certificate.value;
    worst = std::max(worst, std::abs(cert * cert - brute));
  }
  o.detail << "max |certificate^2 - per-cell quadrature| " << worst;
  o.check(worst <= 1e-6, "decomposition");
  return o;
}

Outcome criterion4() {
  Outcome o;
  auto mix = test::paper_mixture();
  const auto& table = test::shared_table();
  std::vector<QuantizationResult> r;
  for (bool per_mode : {false, true}) {
    MixtureSchemeOptions opt;
    opt.per_mode = per_mode;
    r.push_back(discretize_mixture(mix, generate_scheme_mixture(mix, 20, opt, table)));
  }
  const auto& pm = r[1];
  const auto& pc = r[0];
  o.detail << "per-mode W2 " << pm.certificate.value << " with " << pm.discrete.size() << " atoms, per-component W2 "
           << pc.certificate.value << " with " << pc.discrete.size() << " atoms";
  o.check(pm.certificate.value >= 0.42 && pm.certificate.value <= 0.52, "per-mode W2 band");
  o.check(pm.discrete.size() <= 20, "per-mode support");
  o.check(pc.certificate.value >= 0.41 && pc.certificate.value <= 0.51, "per-component W2 band");
  o.check(pm.discrete.size() < pc.discrete.size(), "support ordering");
  for (std::size_t i = 0; i < 2; ++i) {
    auto mc = mc_coupling_cost(mix, r[i].discrete.locations(), 1000000, 40 + i);
    o.detail << (i == 1 ? ", per-mode" : ", per-component") << " MC " << mc.value << " +- " << mc.std_error;
    o.check(mc.value <= r[i].certificate.value + 4 * mc.std_error, "certificate vs Monte-Carlo");
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  auto mix = test::paper_mixture();
  std::vector<double> w;
  for (std::size_t n : {10u, 100u, 1000u, 10000u}) w.push_back(w2_of(mix, n, true, big_table()));
  o.detail << "W2 at 10/100/1000/10000: " << w[0] << " " << w[1] << " " << w[2] << " " << w[3];
  for (std::size_t i = 1; i < w.size(); ++i) o.check(w[i] < w[i - 1], "strict decrease");
  o.check(w[3] < 0.1 * w[0], "W2(10000) < 0.1 W2(10)");
  return o;
}

Outcome criterion6() {
  Outcome o;
  auto mix = test::paper_mixture();
  const auto& table = big_table();
  auto median_ms = [&](std::size_t size) {
    std::vector<double> t;
    // Each sample averages a batch of calls so that timer resolution does not dominate.
    const int batch = 20;
    for (int rep = 0; rep < 5; ++rep) {
      std::size_t entries = 0;
      auto t0 = Clock::now();
      for (int b = 0; b < batch; ++b) entries += generate_scheme_mixture(mix, size, {}, table).entries.size();
      t.push_back(entries == 0 ? INFINITY : seconds_since(t0) * 1e3 / batch);
    }
    std::sort(t.begin(), t.end());
    return t[2];
  };
  median_ms(10);
  double small = median_ms(10), large = median_ms(10000);
  o.detail << "median generation " << small << " ms at 10, " << large << " ms at 10000, ratio " << large / small;
  o.check(large < 10.0 * small, "time ratio");
  return o;
}

void check_closure(Outcome& o, const QuantizationResult& r, const std::string& label) {
  o.check(std::abs(r.discrete.probabilities().sum() - 1.0) <= 1e-9, label + " probability sum");
  o.check(r.discrete.probabilities().minCoeff() >= 0.0, label + " nonnegative");
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 gen(77);
  const auto& table = big_table();
  const std::vector<std::size_t> sizes = {10, 100, 1000, 10000};
  int runs = 0;
  try {
    GaussianComponent big(test::random_vector(256, gen), test::random_psd(256, gen, 0.05, 3.0));
    GaussianMixture bmix(big);
    for (std::size_t n : sizes) {
      auto r = discretize_mixture(bmix, generate_scheme_mixture(bmix, n, {}, table));
      check_closure(o, r, "d=256 size " + std::to_string(n));
      o.check(r.discrete.size() <= static_cast<Index>(n), "d=256 budget");
      ++runs;
    }

    // Four components on a common 6-dimensional affine subspace of R^10.
    const Index d = 10, k = 6;
    Matrix q = test::random_orthogonal(d, gen);
    Matrix basis = q.leftCols(k), normal = q.rightCols(d - k);
    Vector origin = test::random_vector(d, gen);
    std::vector<GaussianComponent> comps;
    for (int i = 0; i < 4; ++i) {
      Matrix inner = test::random_psd(k, gen, 0.1, 2.0, i % 2);
      Matrix cov = basis * inner * basis.transpose();
      comps.emplace_back(origin + basis * test::random_vector(k, gen, 2.0), 0.5 * (cov + cov.transpose()));
    }
    GaussianMixture dmix({0.1, 0.2, 0.3, 0.4}, comps);
    double worst = 0.0;
    for (bool per_mode : {true, false}) {
      for (auto cfg : {Configuration::Grid, Configuration::Cross}) {
        for (std::size_t n : sizes) {
          MixtureSchemeOptions opt;
          opt.per_mode = per_mode;
          opt.configuration = cfg;
          DiscretizeOptions dopt;
          dopt.cross_mc_samples = 0;
          auto r = discretize_mixture(dmix, generate_scheme_mixture(dmix, n, opt, table), dopt);
          check_closure(o, r, "degenerate size " + std::to_string(n));
          for (Index a = 0; a < r.discrete.size(); ++a) {
            Vector off = r.discrete.locations().row(a).transpose() - origin;
            worst = std::max(worst, (normal.transpose() * off).norm());
          }
          ++runs;
        }
      }
    }
    o.detail << runs << " runs, max off-subspace residual " << worst;
    o.check(worst < 1e-8, "subspace residual");
  } catch (const std::exception& e) {
    o.detail << runs << " runs";
    o.check(false, std::string("exception: ") + e.what());
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const auto& table = test::shared_table();
  std::mt19937_64 gen(88);

  double eq = 0.0;
  for (int t = 0; t < 20; ++t) {
    Index d = 2 + t % 3;
    auto mix = test::random_mixture(gen, d, 1 + t % 4, t % 2 == 0);
    auto set = generate_scheme_mixture(mix, 30 + 10 * t, {}, table);
    auto base = discretize_mixture(mix, set);
    Matrix q = test::random_orthogonal(d, gen);
    std::vector<GaussianComponent> rc;
    for (const auto& c : mix.components()) rc.emplace_back(q * c.mean(), q * c.covariance() * q.transpose());
    GaussianMixture rmix(mix.weights(), rc);
    SchemeSet rset;
    for (const auto& e : set.entries) {
      SchemeEntry re = e;
      re.anchor = q * e.anchor;
      re.schemes.clear();
      for (const auto& s : e.schemes)
        re.schemes.push_back(std::visit([&](const auto& x) { return Scheme(x.with_axes(x.axes().rotated(q))); }, s));
      rset.entries.push_back(re);
    }
    auto rot = discretize_mixture(rmix, rset);
    if (rot.discrete.size() != base.discrete.size()) {
      eq = INFINITY;
      continue;
    }
    eq = std::max({eq, (rot.discrete.probabilities() - base.discrete.probabilities()).cwiseAbs().maxCoeff(),
                   (rot.discrete.locations() - base.discrete.locations() * q.transpose()).cwiseAbs().maxCoeff(),
                   std::abs(rot.certificate.value - base.certificate.value)});
  }
  o.check(eq <= 1e-10, "rotation equivariance");

  double worst_z = -INFINITY;
  int closure_fail = 0;
  for (int t = 0; t < 50; ++t) {
    Index d = 1 + t % 4;
    auto mix = test::random_mixture(gen, d, 1 + t % 5, t % 3 == 0);
    MixtureSchemeOptions opt;
    opt.per_mode = t % 2 == 0;
    opt.configuration = t % 5 == 4 ? Configuration::Cross : Configuration::Grid;
    auto r = discretize_mixture(mix, generate_scheme_mixture(mix, 5 + 7 * static_cast<std::size_t>(t), opt, table));
    if (std::abs(r.discrete.probabilities().sum() - 1.0) > 1e-9) ++closure_fail;
    auto mc = mc_coupling_cost(mix, r.discrete.locations(), 200000, 500 + static_cast<std::uint64_t>(t));
    double sigma = std::sqrt(mc.std_error * mc.std_error + r.certificate.std_error * r.certificate.std_error);
    worst_z = std::max(worst_z, (mc.value - r.certificate.value) / sigma);
  }
  o.check(worst_z <= 4.0, "certificate dominates oracle");

  bool monotone = true;
  for (int t = 0; t < 10; ++t) {
    auto mix = test::random_mixture(gen, 2, 3 + t % 3, false);
    MixtureSchemeOptions opt;
    opt.per_mode = false;
    auto set = generate_scheme_mixture(mix, 12 + 4 * static_cast<std::size_t>(t), opt, table);
    auto plain = discretize_mixture(mix, set);
    DiscretizeOptions c;
    c.compress = true;
    auto small = discretize_mixture(mix, set, c);
    monotone = monotone && small.certificate.value >= plain.certificate.value &&
               small.discrete.size() <= plain.discrete.size() &&
               std::abs(small.discrete.probabilities().sum() - 1.0) <= 1e-9;
  }
  o.check(monotone, "compression monotonicity");
  o.check(closure_fail == 0, "probability closure");
  o.detail << "equivariance error " << eq << ", worst oracle excess " << worst_z << " sigma";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "1D optimal quantizer constants", 1.0, criterion1},
      {2, "closed form vs oracles", 120.0, criterion2},
      {3, "per-dimension error decomposition", 60.0, criterion3},
      {4, "example mixture per-mode vs per-component", 10.0, criterion4},
      {5, "convergence in support size", 120.0, criterion5},
      {6, "near-constant generation time", 60.0, criterion6},
      {7, "high-dimensional and degenerate robustness", 120.0, criterion7},
      {8, "equivariance, bound, compression, closure", 300.0, criterion8},
  };
  // The 10^4-level table is shared by criteria 5-7 and built outside their timers.
  auto tb = Clock::now();
  big_table();
  std::printf("table build to n=10000: %.2f s\n", seconds_since(tb));

  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    double s = seconds_since(t0);
    if (s > c.limit_s) o.check(false, "runtime limit");
    std::printf("criterion %d %s: %s (%.2f s / %.0f s) %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", s, c.limit_s,
                o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%s: %d of %zu criteria passed\n", failed == 0 ? "PASS" : "FAIL",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
