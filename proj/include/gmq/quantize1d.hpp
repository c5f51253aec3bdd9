#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace gmq {

/// Voronoi quantizer of N(0, 1): ascending locations, midpoint edges with
/// -inf/+inf ends, and squared W2 distortion against N(0, 1).
struct Quantizer1D {
  std::vector<double> locations;
  std::vector<double> edges;
  double distortion = 0.0;

  std::size_t size() const { return locations.size(); }
};

/// Voronoi edges (size n + 1) for ascending locations.
std::vector<double> midpoint_edges(const std::vector<double>& locations);

/// P(a <= X <= b) for X ~ N(0, 1); a may be -inf, b may be +inf.
double cell_prob(double a, double b);

/// E[X; a <= X <= b] = pdf(a) - pdf(b).
double cell_first_moment(double a, double b);

/// Constrained second moment int_a^b (x - c)^2 dN(0,1)(x).
double cell_cost(double a, double b, double c);

/// Optimal n-level quantizer of N(0, 1) (Lloyd fixed point, Newton-accelerated).
Quantizer1D optimal_quantizer(int n);

/// Sum of cell costs of the locations over their own Voronoi cells.
double voronoi_distortion(const std::vector<double>& locations);

/// Memoizing table of optimal quantizers indexed by level count.
///
/// Copies share the underlying cache. Lookups past the prebuilt range are
/// computed on demand; concurrent callers either see a complete entry or
/// compute it themselves.
class LookupTable1D {
 public:
  static constexpr int kFormatVersion = 1;
  static constexpr double kDefaultTolerance = 1e-12;

  LookupTable1D();

  static LookupTable1D build(int n_max);

  const Quantizer1D& get(int n) const;
  double distortion(int n) const { return get(n).distortion; }

  /// Largest n such that every level count 1..n is already present.
  int n_max() const;
  bool contains(int n) const;
  double tolerance() const;
  std::string build_date() const;

  void save(const std::filesystem::path& path) const;
  static LookupTable1D load(const std::filesystem::path& path);

  std::string to_json_string() const;
  static LookupTable1D from_json_string(const std::string& text);

 private:
  struct State;
  std::shared_ptr<State> state_;
};

}  // namespace gmq
