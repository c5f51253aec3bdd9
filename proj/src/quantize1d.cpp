#include "gmq/quantize1d.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include <json.hpp>

#include "gmq/error.hpp"
#include "gmq/special.hpp"

namespace gmq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLocationTol = 1e-12;
constexpr int kMaxIterations = 100000;
constexpr double kRoundingFloor = 1e-10;

void check_interval(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || a > b) {
    std::ostringstream msg;
    msg << "invalid interval [" << a << ", " << b << "]";
    throw Error(ErrorKind::InvalidInterval, msg.str());
  }
}

// x * pdf(x) with the limit 0 at +-inf.
double x_pdf(double x) { return std::isfinite(x) ? x * std_normal_pdf(x) : 0.0; }

struct CellStats {
  std::vector<double> prob;
  std::vector<double> moment;
};

CellStats cell_stats(const std::vector<double>& edges) {
  const std::size_t n = edges.size() - 1;
  CellStats s{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    s.prob[i] = cell_prob(edges[i], edges[i + 1]);
    s.moment[i] = cell_first_moment(edges[i], edges[i + 1]);
  }
  return s;
}

// Largest |c_i - E[X | cell_i]|: the Lloyd displacement.
double lloyd_residual(const std::vector<double>& c, const CellStats& s) {
  double r = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    r = std::max(r, std::abs(c[i] - s.moment[i] / s.prob[i]));
  }
  return r;
}

void symmetrize(std::vector<double>& c) {
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (c[n - 1 - i] - c[i]);
    c[i] = -v;
    c[n - 1 - i] = v;
  }
  if (n % 2 == 1) c[n / 2] = 0.0;
}

bool strictly_ascending(const std::vector<double>& c) {
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (!(c[i] > c[i - 1])) return false;
  }
  return true;
}

// Newton step on the stationarity system c_i p_i - m_i = 0. The Jacobian is
// tridiagonal; solved with the Thomas algorithm. Returns false if the system
// is not safely solvable.
bool newton_direction(const std::vector<double>& c, const std::vector<double>& edges,
                      const CellStats& s, std::vector<double>& step) {
  const std::size_t n = c.size();
  std::vector<double> diag(n), off(n > 0 ? n - 1 : 0), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = -(c[i] * s.prob[i] - s.moment[i]);
    diag[i] = s.prob[i];
    if (i + 1 < n) {
      const double coupling = 0.25 * (c[i + 1] - c[i]) * std_normal_pdf(edges[i + 1]);
      diag[i] -= coupling;
      off[i] = -coupling;
    }
    if (i > 0) diag[i] -= 0.25 * (c[i] - c[i - 1]) * std_normal_pdf(edges[i]);
  }
  // Forward elimination.
  for (std::size_t i = 1; i < n; ++i) {
    if (!(diag[i - 1] > 0.0)) return false;
    const double f = off[i - 1] / diag[i - 1];
    diag[i] -= f * off[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  if (!(diag[n - 1] > 0.0)) return false;
  step.assign(n, 0.0);
  step[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    step[i] = (rhs[i] - off[i] * step[i + 1]) / diag[i];
  }
  for (double v : step) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Quantizer1D finish(std::vector<double> locations) {
  Quantizer1D q;
  q.edges = midpoint_edges(locations);
  q.distortion = voronoi_distortion(locations);
  q.locations = std::move(locations);
  return q;
}

std::string today_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%d");
  return out.str();
}

void verify_entry(int n, const Quantizer1D& q) {
  auto corrupt = [n](const std::string& why) {
    throw Error(ErrorKind::CorruptTable, "table entry " + std::to_string(n) + ": " + why);
  };
  if (q.locations.size() != static_cast<std::size_t>(n)) corrupt("wrong number of locations");
  if (!strictly_ascending(q.locations)) corrupt("locations not ascending");
  for (std::size_t i = 0; i < q.locations.size(); ++i) {
    if (std::abs(q.locations[i] + q.locations[q.locations.size() - 1 - i]) > 1e-9) {
      corrupt("locations not symmetric");
    }
  }
  const CellStats s = cell_stats(q.edges);
  if (lloyd_residual(q.locations, s) > 1e-9) corrupt("locations not stationary");
  if (std::abs(voronoi_distortion(q.locations) - q.distortion) > 1e-9) {
    corrupt("distortion inconsistent with locations");
  }
}

}  // namespace

std::vector<double> midpoint_edges(const std::vector<double>& locations) {
  std::vector<double> edges(locations.size() + 1);
  edges.front() = -kInf;
  edges.back() = kInf;
  for (std::size_t i = 1; i < locations.size(); ++i) {
    edges[i] = 0.5 * (locations[i - 1] + locations[i]);
  }
  return edges;
}

double cell_prob(double a, double b) {
  check_interval(a, b);
  double p;
  if (a >= 0.5) {
    p = std_normal_sf(a) - std_normal_sf(b);
  } else if (b <= -0.5) {
    p = std_normal_cdf(b) - std_normal_cdf(a);
  } else {
    p = 0.5 * (std::erf(b * kInvSqrt2) - std::erf(a * kInvSqrt2));
  }
  return std::clamp(p, 0.0, 1.0);
}

double cell_first_moment(double a, double b) {
  check_interval(a, b);
  if (std::isfinite(a) && std::isfinite(b)) {
    // pdf(a) - pdf(b) = -pdf(x0) * expm1(-(y^2 - x0^2)/2) with |x0| <= |y|,
    // accurate for narrow cells.
    if (std::abs(a) <= std::abs(b)) {
      return -std_normal_pdf(a) * std::expm1(-0.5 * (b - a) * (b + a));
    }
    return std_normal_pdf(b) * std::expm1(-0.5 * (a - b) * (a + b));
  }
  return std_normal_pdf(a) - std_normal_pdf(b);
}

double cell_cost(double a, double b, double c) {
  check_interval(a, b);
  if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "cell_cost needs a finite location");
  // (1 + c^2) p + (a - 2c) pdf(a) - (b - 2c) pdf(b)
  //   = p (1 + c^2) - 2 c m + a pdf(a) - b pdf(b),  m = pdf(a) - pdf(b)
  const double p = cell_prob(a, b);
  const double m = cell_first_moment(a, b);
  const double second = p + x_pdf(a) - x_pdf(b);
  const double cost = second - 2.0 * c * m + c * c * p;
  return std::max(cost, 0.0);
}

double voronoi_distortion(const std::vector<double>& locations) {
  const auto edges = midpoint_edges(locations);
  double total = 0.0;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    total += cell_cost(edges[i], edges[i + 1], locations[i]);
  }
  return total;
}

Quantizer1D optimal_quantizer(int n) {
  if (n < 1) throw Error(ErrorKind::BudgetTooSmall, "quantizer needs at least one level");
  if (n == 1) return finish({0.0});

  // Quantiles of N(0, 3): the asymptotically optimal point density phi^{1/3}.
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    c[static_cast<std::size_t>(i)] =
        std::sqrt(3.0) * std_normal_quantile((i + 0.5) / static_cast<double>(n));
  }
  symmetrize(c);

  std::vector<double> step, trial;
  double previous_residual = kInf;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    auto edges = midpoint_edges(c);
    const CellStats s = cell_stats(edges);
    const double residual = lloyd_residual(c, s);
    if (residual <= kLocationTol) return finish(std::move(c));
    // For large n the stationarity residual bottoms out slightly above the
    // tolerance; stop once Newton no longer halves it.
    if (residual <= kRoundingFloor && residual > 0.5 * previous_residual) {
      return finish(std::move(c));
    }
    previous_residual = residual;

    bool accepted = false;
    if (newton_direction(c, edges, s, step)) {
      double largest = 0.0;
      for (double v : step) largest = std::max(largest, std::abs(v));
      if (largest <= kLocationTol) {
        // Location change below tolerance: the residual is at its rounding floor.
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += step[i];
        symmetrize(c);
        if (strictly_ascending(c)) return finish(std::move(c));
      }
      double t = 1.0;
      for (int halving = 0; halving < 30 && !accepted; ++halving, t *= 0.5) {
        trial = c;
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += t * step[i];
        symmetrize(trial);
        if (!strictly_ascending(trial)) continue;
        const CellStats ts = cell_stats(midpoint_edges(trial));
        if (lloyd_residual(trial, ts) < residual) {
          c.swap(trial);
          accepted = true;
        }
      }
    }
    if (!accepted) {
      // Plain Lloyd update: each location moves to its cell's conditional mean.
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = s.moment[i] / s.prob[i];
      symmetrize(c);
    }
  }
  throw Error(ErrorKind::NonConvergence,
              "1D quantizer did not converge for n = " + std::to_string(n));
}

struct LookupTable1D::State {
  mutable std::shared_mutex mutex;
  std::map<int, Quantizer1D> entries;
  double tolerance = kDefaultTolerance;
  std::string build_date;
};

LookupTable1D::LookupTable1D() : state_(std::make_shared<State>()) {
  state_->build_date = today_utc();
}

LookupTable1D LookupTable1D::build(int n_max) {
  if (n_max < 1) throw Error(ErrorKind::BudgetTooSmall, "table needs n_max >= 1");
  LookupTable1D table;
  for (int n = 1; n <= n_max; ++n) table.get(n);
  return table;
}

const Quantizer1D& LookupTable1D::get(int n) const {
  if (n < 1) throw Error(ErrorKind::BudgetTooSmall, "quantizer needs at least one level");
  {
    std::shared_lock lock(state_->mutex);
    auto it = state_->entries.find(n);
    if (it != state_->entries.end()) return it->second;
  }
  Quantizer1D fresh = optimal_quantizer(n);
  std::unique_lock lock(state_->mutex);
  // std::map nodes are stable, so references handed out earlier stay valid.
  auto [it, inserted] = state_->entries.emplace(n, std::move(fresh));
  return it->second;
}

int LookupTable1D::n_max() const {
  std::shared_lock lock(state_->mutex);
  int n = 0;
  for (const auto& [key, value] : state_->entries) {
    if (key != n + 1) break;
    n = key;
  }
  return n;
}

bool LookupTable1D::contains(int n) const {
  std::shared_lock lock(state_->mutex);
  return state_->entries.count(n) > 0;
}

double LookupTable1D::tolerance() const { return state_->tolerance; }

std::string LookupTable1D::build_date() const { return state_->build_date; }

std::string LookupTable1D::to_json_string() const {
  nlohmann::json j;
  j["version"] = kFormatVersion;
  j["tolerance"] = state_->tolerance;
  j["build_date"] = state_->build_date;
  j["n_max"] = n_max();
  nlohmann::json entries = nlohmann::json::object();
  {
    std::shared_lock lock(state_->mutex);
    for (const auto& [n, q] : state_->entries) {
      entries[std::to_string(n)] = {{"locations", q.locations}, {"distortion", q.distortion}};
    }
  }
  j["entries"] = std::move(entries);
  return j.dump();
}

LookupTable1D LookupTable1D::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("table: ") + e.what());
  }
  LookupTable1D table;
  try {
    if (j.at("version").get<int>() != kFormatVersion) {
      throw Error(ErrorKind::CorruptTable, "unsupported table version");
    }
    table.state_->tolerance = j.at("tolerance").get<double>();
    if (j.contains("build_date")) table.state_->build_date = j["build_date"].get<std::string>();
    for (const auto& [key, value] : j.at("entries").items()) {
      const int n = std::stoi(key);
      Quantizer1D q;
      q.locations = value.at("locations").get<std::vector<double>>();
      q.distortion = value.at("distortion").get<double>();
      if (n < 1) throw Error(ErrorKind::CorruptTable, "table entry index < 1");
      q.edges = midpoint_edges(q.locations);
      verify_entry(n, q);
      table.state_->entries.emplace(n, std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::CorruptTable, std::string("table: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::CorruptTable, "table: non-numeric entry key");
  }
  double previous = kInf;
  int previous_n = 0;
  for (const auto& [n, q] : table.state_->entries) {
    if (n == previous_n + 1 && !(q.distortion < previous)) {
      throw Error(ErrorKind::CorruptTable, "table distortion not strictly decreasing");
    }
    previous = q.distortion;
    previous_n = n;
  }
  return table;
}

void LookupTable1D::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << to_json_string() << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

LookupTable1D LookupTable1D::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_string(buffer.str());
}

}  // namespace gmq
