#include "gmq/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "gmq/benchmark.hpp"
#include "gmq/discretize.hpp"
#include "gmq/error.hpp"
#include "gmq/io.hpp"
#include "gmq/oracle.hpp"
#include "gmq/quantize1d.hpp"
#include "gmq/scheme_gen.hpp"

namespace gmq::cli {

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kMathError = 3;

struct GenFlags {
  std::string mixture;
  std::size_t size = 0;
  std::string configuration = "grid";
  bool per_component = false;
  std::optional<double> merge_tol;
  double homogeneity_tol = kDefaultHomogeneityTol;
};

struct DiscFlags {
  bool compress = false;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 0x5eed;
  double prune_below = 0.0;
  std::string out;
  std::string report;
};

void add_gen_flags(CLI::App* cmd, GenFlags& f) {
  cmd->add_option("--mixture", f.mixture, "Mixture JSON file")->required();
  cmd->add_option("--size", f.size, "Requested support size")->required();
  cmd->add_option("--configuration", f.configuration, "grid or cross")
      ->check(CLI::IsMember({"grid", "cross"}));
  cmd->add_flag("--per-component", f.per_component, "One scheme per component instead of per mode");
  cmd->add_flag("--per-mode,!--no-per-mode", [&f](std::int64_t n) { f.per_component = n < 0; },
                "Share one scheme per homogeneous mode (default)");
  cmd->add_option("--mode-merge-tol", f.merge_tol, "Distance below which mean-shift endpoints merge");
  cmd->add_option("--homogeneity-tol", f.homogeneity_tol, "Relative commutator tolerance");
}

void add_disc_flags(CLI::App* cmd, DiscFlags& f) {
  cmd->add_flag("--compress", f.compress, "Weighted k-means down to the cluster budgets");
  cmd->add_option("--mc-samples", f.mc_samples, "Samples for statistical certificates (0 disables)");
  cmd->add_option("--seed", f.seed, "Seed for Monte-Carlo certificates");
  cmd->add_option("--prune-below", f.prune_below, "Drop exported atoms below this probability");
  cmd->add_option("--out", f.out, "Discrete distribution output file");
  cmd->add_option("--report", f.report, "Report output file (also printed to stdout)");
}

MixtureSchemeOptions gen_options(const GenFlags& f) {
  MixtureSchemeOptions o;
  o.configuration = f.configuration == "cross" ? Configuration::Cross : Configuration::Grid;
  o.per_mode = !f.per_component;
  o.mode_merge_tol = f.merge_tol;
  o.homogeneity_tol = f.homogeneity_tol;
  return o;
}

DiscretizeOptions disc_options(const DiscFlags& f) {
  DiscretizeOptions o;
  o.compress = f.compress;
  o.cross_mc_samples = f.mc_samples;
  o.seed = f.seed;
  return o;
}

LookupTable1D open_table(const std::string& flag) {
  std::string path = flag;
  if (path.empty()) {
    if (const char* env = std::getenv("GMQ_TABLE_PATH")) path = env;
  }
  if (path.empty()) return LookupTable1D{};
  return LookupTable1D::load(path);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void emit(std::ostream& out, const std::string& path, const io::json& j) {
  if (path.empty()) {
    out << io::dump(j);
  } else {
    io::write_text(path, io::dump(j));
  }
}

int finish_discretization(std::ostream& out, QuantizationResult res, const DiscFlags& f,
                          std::map<std::string, double> timings) {
  io::Report report{std::move(res), 0, 0.0, std::move(timings)};
  if (f.prune_below > 0.0) {
    report.result.discrete = report.result.discrete.pruned(f.prune_below, &report.pruned_mass);
  }
  report.support_size = static_cast<std::size_t>(report.result.discrete.size());
  if (!f.out.empty()) io::write_text(f.out, io::dump(io::to_json(report.result.discrete)));
  io::json rep = io::to_json(report);
  if (!f.report.empty()) io::write_text(f.report, io::dump(rep));
  out << io::dump(rep);
  return kOk;
}

void error_json(std::ostream& err, std::string_view kind, const std::string& message) {
  err << io::json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian mixture quantization with Wasserstein certificates", "gmq"};
  app.require_subcommand(1);
  std::string table_flag;
  app.add_option("--table", table_flag, "1D quantizer table (defaults to $GMQ_TABLE_PATH)");

  GenFlags qg;
  DiscFlags qd;
  std::string scheme_out;
  auto* quantize = app.add_subcommand("quantize", "Generate a scheme and discretize a mixture");
  add_gen_flags(quantize, qg);
  add_disc_flags(quantize, qd);
  quantize->add_option("--scheme-out", scheme_out, "Write the generated scheme set");

  GenFlags gg;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate-scheme", "Generate a scheme set for a mixture");
  add_gen_flags(generate, gg);
  generate->add_option("--out", gen_out, "Scheme set output file (stdout if omitted)");

  std::string dmix, dscheme;
  DiscFlags dd;
  auto* discretize = app.add_subcommand("discretize", "Apply a scheme or scheme set to a mixture");
  discretize->add_option("--mixture", dmix, "Mixture JSON file")->required();
  discretize->add_option("--scheme", dscheme, "Scheme or scheme set JSON file")->required();
  add_disc_flags(discretize, dd);

  std::string suite_path, bench_out;
  bool parallel = false;
  std::size_t bench_mc = 100000;
  auto* bench = app.add_subcommand("benchmark", "Run a benchmark suite and emit CSV");
  bench->add_option("--suite", suite_path, "Suite JSON file")->required();
  bench->add_option("--out", bench_out, "CSV output file (stdout if omitted)");
  bench->add_flag("--parallel", parallel, "Run cases concurrently (timings become non-comparable)");
  bench->add_option("--mc-samples", bench_mc, "Samples for statistical certificates");

  int max_n = 0;
  std::string table_out;
  auto* tables = app.add_subcommand("tables", "Lookup table maintenance");
  tables->require_subcommand(1);
  auto* build = tables->add_subcommand("build", "Build the optimal 1D quantizer table");
  build->add_option("--max-n", max_n, "Largest level count")->required()->check(CLI::Range(1, 100000));
  build->add_option("--out", table_out, "Output file")->required();

  std::string odist, odisc;
  std::size_t osamples = 1000000;
  std::uint64_t oseed = 0;
  auto* oracle = app.add_subcommand("oracle", "Monte-Carlo oracles");
  oracle->require_subcommand(1);
  auto* w2 = oracle->add_subcommand("w2", "Voronoi coupling cost between a mixture and a discrete distribution");
  w2->add_option("--dist", odist, "Mixture JSON file")->required();
  w2->add_option("--discrete", odisc, "Discrete distribution JSON file")->required();
  w2->add_option("--samples", osamples, "Sample count (>= 1000)");
  w2->add_option("--seed", oseed, "Seed");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    error_json(err, "usage", e.what());
    return kInputError;
  }

  try {
    if (*quantize) {
      LookupTable1D table = open_table(table_flag);
      GaussianMixture mix = io::mixture_from_json(io::read_json(qg.mixture));
      auto t0 = std::chrono::steady_clock::now();
      SchemeSet set = generate_scheme_mixture(mix, qg.size, gen_options(qg), table);
      double gen_ms = ms_since(t0);
      if (!scheme_out.empty()) io::write_text(scheme_out, io::dump(io::to_json(set)));
      auto t1 = std::chrono::steady_clock::now();
      QuantizationResult res = discretize_mixture(mix, set, disc_options(qd));
      double disc_ms = ms_since(t1);
      return finish_discretization(out, std::move(res), qd,
                                   {{"generate", gen_ms}, {"discretize", disc_ms}, {"total", gen_ms + disc_ms}});
    }
    if (*generate) {
      LookupTable1D table = open_table(table_flag);
      GaussianMixture mix = io::mixture_from_json(io::read_json(gg.mixture));
      SchemeSet set = generate_scheme_mixture(mix, gg.size, gen_options(gg), table);
      emit(out, gen_out, io::to_json(set));
      return kOk;
    }
    if (*discretize) {
      GaussianMixture mix = io::mixture_from_json(io::read_json(dmix));
      SchemeSet set = io::scheme_set_from_json(io::read_json(dscheme));
      auto t0 = std::chrono::steady_clock::now();
      QuantizationResult res = discretize_mixture(mix, set, disc_options(dd));
      double disc_ms = ms_since(t0);
      return finish_discretization(out, std::move(res), dd, {{"discretize", disc_ms}, {"total", disc_ms}});
    }
    if (*bench) {
      LookupTable1D table = open_table(table_flag);
      std::filesystem::path sp(suite_path);
      BenchmarkSuite suite = suite_from_json(io::read_json(sp), sp.parent_path());
      BenchmarkOptions opts;
      opts.parallel = parallel;
      opts.discretize.cross_mc_samples = bench_mc;
      auto outcomes = run_benchmark(suite, table, opts);
      std::string csv = benchmark_csv(outcomes, parallel);
      if (bench_out.empty()) {
        out << csv;
      } else {
        io::write_text(bench_out, csv);
      }
      bool ok = true;
      for (const auto& o : outcomes) {
        if (o.ok) continue;
        ok = false;
        error_json(err, "case_failed", o.name + ": " + o.error);
      }
      return ok ? kOk : kMathError;
    }
    if (*build) {
      LookupTable1D::build(max_n).save(table_out);
      out << io::dump({{"n_max", max_n}, {"out", table_out}});
      return kOk;
    }
    if (*w2) {
      GaussianMixture mix = io::mixture_from_json(io::read_json(odist));
      DiscreteDistribution disc = io::discrete_from_json(io::read_json(odisc));
      if (disc.dim() != mix.dim())
        throw Error(ErrorKind::DimensionMismatch, "discrete and mixture dimensions differ");
      McEstimate est = mc_coupling_cost(mix, disc.locations(), osamples, oseed);
      out << io::dump({{"value", est.value}, {"std_error", est.std_error}, {"samples", est.samples},
                       {"seed", est.seed}});
      return kOk;
    }
  } catch (const Error& e) {
    error_json(err, to_string(e.kind()), e.what());
    return is_input_error(e.kind()) ? kInputError : kMathError;
  } catch (const std::exception& e) {
    error_json(err, "internal", e.what());
    return kMathError;
  }
  return kInputError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gmq::cli
