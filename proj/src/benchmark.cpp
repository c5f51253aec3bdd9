#include "gmq/benchmark.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include "gmq/error.hpp"

namespace gmq {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

Configuration parse_configuration(const std::string& s) {
  if (s == "grid") return Configuration::Grid;
  if (s == "cross") return Configuration::Cross;
  throw Error(ErrorKind::Parse, "configuration must be \"grid\" or \"cross\"");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

CaseOutcome run_case(const BenchmarkCase& c, const LookupTable1D& table, const BenchmarkOptions& options) {
  CaseOutcome out;
  out.name = c.name;
  try {
    MixtureSchemeOptions gen;
    gen.configuration = c.configuration;
    gen.per_mode = c.per_mode;
    DiscretizeOptions disc = options.discretize;
    disc.seed = c.seed;
    for (std::size_t n : c.sizes) {
      BenchmarkRow row;
      row.size = n;
      std::vector<double> gen_t, disc_t, total_t;
      for (int r = 0; r < c.repetitions; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        SchemeSet set = generate_scheme_mixture(c.mixture, n, gen, table);
        double g = ms_since(t0);
        auto t1 = std::chrono::steady_clock::now();
        QuantizationResult res = discretize_mixture(c.mixture, set, disc);
        double d = ms_since(t1);
        gen_t.push_back(g);
        disc_t.push_back(d);
        total_t.push_back(g + d);
        if (r == 0) {
          row.w2 = res.certificate.value;
          row.kind = res.certificate.kind;
          row.support = static_cast<std::size_t>(res.discrete.size());
        }
      }
      row.gen_ms = median(gen_t);
      row.disc_ms = median(disc_t);
      row.total_ms = median(total_t);
      out.rows.push_back(row);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
      if (!(out.rows[i].w2 < out.rows[i - 1].w2)) {
        out.ok = false;
        out.error = "w2 not strictly decreasing at size " + std::to_string(out.rows[i].size);
        break;
      }
    }
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

}  // namespace

BenchmarkSuite suite_from_json(const io::json& j, const std::filesystem::path& base_dir) {
  try {
    if (!j.is_object() || !j.contains("cases") || !j["cases"].is_array())
      throw Error(ErrorKind::Parse, "benchmark suite: expected {\"cases\": [...]}");
    BenchmarkSuite suite;
    std::size_t idx = 0;
    for (const auto& item : j["cases"]) {
      const io::json& m = item.at("mixture");
      GaussianMixture mix = m.is_string()
                                ? io::mixture_from_json(io::read_json(base_dir / m.get<std::string>()))
                                : io::mixture_from_json(m);
      BenchmarkCase c{item.value("name", "case" + std::to_string(idx)), std::move(mix), {}};
      for (const auto& s : item.at("sizes")) {
        if (!s.is_number_integer() || s.get<long long>() < 1)
          throw Error(ErrorKind::Parse, "sizes must be positive integers");
        c.sizes.push_back(s.get<std::size_t>());
      }
      if (c.sizes.empty()) throw Error(ErrorKind::Parse, "case " + c.name + " has no sizes");
      for (std::size_t i = 1; i < c.sizes.size(); ++i)
        if (c.sizes[i] <= c.sizes[i - 1]) throw Error(ErrorKind::Parse, "sizes must be strictly ascending");
      c.configuration = parse_configuration(item.value("configuration", std::string("grid")));
      c.per_mode = item.value("per_mode", true);
      c.repetitions = item.value("repetitions", 1);
      if (c.repetitions < 1) throw Error(ErrorKind::Parse, "repetitions must be at least 1");
      c.seed = item.value("seed", std::uint64_t{idx});
      suite.cases.push_back(std::move(c));
      ++idx;
    }
    return suite;
  } catch (const io::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

std::vector<CaseOutcome> run_benchmark(const BenchmarkSuite& suite, const LookupTable1D& table,
                                       const BenchmarkOptions& options) {
  std::vector<CaseOutcome> out;
  if (!options.parallel) {
    for (const auto& c : suite.cases) out.push_back(run_case(c, table, options));
    return out;
  }
  std::vector<std::future<CaseOutcome>> jobs;
  for (const auto& c : suite.cases)
    jobs.push_back(std::async(std::launch::async, [&c, &table, &options] { return run_case(c, table, options); }));
  for (auto& f : jobs) out.push_back(f.get());
  return out;
}

std::string benchmark_csv(const std::vector<CaseOutcome>& outcomes, bool parallel) {
  std::ostringstream os;
  os << "case,name,size,w2,w2_kind,support,gen_ms,disc_ms,total_ms";
  if (parallel) os << ",timings";
  os << "\n";
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    for (const auto& r : outcomes[c].rows) {
      os << c << ',' << csv_field(outcomes[c].name) << ',' << r.size << ',' << format_double(r.w2) << ','
         << to_string(r.kind) << ',' << r.support << ',' << format_double(r.gen_ms) << ','
         << format_double(r.disc_ms) << ',' << format_double(r.total_ms);
      if (parallel) os << ",non_comparable";
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace gmq
