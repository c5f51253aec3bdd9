#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gmq/discretize.hpp"
#include "gmq/io.hpp"
#include "gmq/quantize1d.hpp"
#include "gmq/scheme_gen.hpp"

namespace gmq {

struct BenchmarkCase {
  std::string name;
  GaussianMixture mixture;
  std::vector<std::size_t> sizes;  // strictly ascending
  Configuration configuration = Configuration::Grid;
  bool per_mode = true;
  int repetitions = 1;
  std::uint64_t seed = 0;
};

struct BenchmarkSuite {
  std::vector<BenchmarkCase> cases;
};

/// {"cases":[{"name","mixture": path | inline object, "sizes", "configuration",
/// "per_mode", "repetitions", "seed"}]}. Relative mixture paths resolve against base_dir.
BenchmarkSuite suite_from_json(const io::json& j, const std::filesystem::path& base_dir);

struct BenchmarkRow {
  std::size_t size = 0;
  double w2 = 0.0;
  CertificateKind kind = CertificateKind::Exact;
  std::size_t support = 0;
  double gen_ms = 0.0;
  double disc_ms = 0.0;
  double total_ms = 0.0;
};

struct CaseOutcome {
  std::string name;
  std::vector<BenchmarkRow> rows;
  bool ok = true;
  std::string error;
};

struct BenchmarkOptions {
  bool parallel = false;
  DiscretizeOptions discretize;
};

/// Runs every case; a failing case (exception or non-decreasing W2) is
/// reported and the remaining cases still run.
std::vector<CaseOutcome> run_benchmark(const BenchmarkSuite& suite, const LookupTable1D& table,
                                       const BenchmarkOptions& options = {});

/// CSV with columns case,name,size,w2,w2_kind,support,gen_ms,disc_ms,total_ms
/// (plus timings=non_comparable when cases ran in parallel).
std::string benchmark_csv(const std::vector<CaseOutcome>& outcomes, bool parallel);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace gmq
