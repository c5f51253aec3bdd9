#include "gmq/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gmq/error.hpp"

namespace gmq::io {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

json read_json(const std::filesystem::path& path) { return parse_json(read_text(path)); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::Parse, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected an object with key '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + ": expected a number");
  return j.get<double>();
}

std::size_t count(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) bad(what + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

Vector vec(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number(j[i], what);
  return v;
}

std::vector<double> dvec(const json& j, const std::string& what) {
  Vector v = vec(j, what);
  return std::vector<double>(v.data(), v.data() + v.size());
}

Matrix mat(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + ": expected an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = rows ? (j[0].is_array() ? j[0].size() : 0) : 0;
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) bad(what + ": rows must be arrays of equal length");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = number(j[r][c], what);
  }
  return m;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

json axes_json(const Axes& a) {
  return {{"rotation", mat_json(a.rotation())}, {"scales", vec_json(a.scales())}, {"offset", vec_json(a.offset())}};
}

Axes axes_from(const json& j) {
  const json& a = field(j, "axes");
  Vector offset = vec(field(a, "offset"), "offset");
  const Index d = offset.size();
  Matrix rot = a.contains("rotation") ? mat(a["rotation"], "rotation") : Matrix::Identity(d, d);
  Vector scales = a.contains("scales") ? vec(a["scales"], "scales") : Vector::Ones(d);
  return Axes(std::move(rot), std::move(scales), std::move(offset));
}

// Type errors from the JSON library surface as parse errors.
template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

bool looks_like_scheme(const json& j) { return j.is_object() && j.contains("type"); }

}  // namespace

json to_json(const GaussianMixture& mix) {
  json comps = json::array();
  for (const auto& c : mix.components())
    comps.push_back({{"mean", vec_json(c.mean())}, {"cov", mat_json(c.covariance())}});
  return {{"weights", mix.weights()}, {"components", comps}};
}

GaussianMixture mixture_from_json(const json& j) {
  return guarded([&] {
    const json& comps = field(j, "components");
    if (!comps.is_array() || comps.empty()) bad("components: expected a non-empty array");
    std::vector<GaussianComponent> list;
    for (const auto& c : comps) list.emplace_back(vec(field(c, "mean"), "mean"), mat(field(c, "cov"), "cov"));
    std::vector<double> w;
    if (j.contains("weights")) {
      w = dvec(j["weights"], "weights");
    } else if (list.size() == 1) {
      w = {1.0};
    } else {
      bad("missing key 'weights'");
    }
    return GaussianMixture(std::move(w), std::move(list));
  });
}

json to_json(const DiscreteDistribution& dist) {
  return {{"locations", mat_json(dist.locations())}, {"probs", vec_json(dist.probabilities())}};
}

DiscreteDistribution discrete_from_json(const json& j) {
  return guarded([&] {
    Matrix loc = mat(field(j, "locations"), "locations");
    Vector p = vec(field(j, "probs"), "probs");
    return DiscreteDistribution(std::move(loc), std::move(p));
  });
}

json to_json(const Scheme& scheme) {
  if (const auto* g = std::get_if<GridScheme>(&scheme)) {
    return {{"type", "grid"}, {"axes", axes_json(g->axes())}, {"points_per_dim", g->points_per_dim()}};
  }
  const auto& c = std::get<CrossScheme>(scheme);
  return {{"type", "cross"},
          {"axes", axes_json(c.axes())},
          {"shell_thresholds", c.shell_thresholds()},
          {"include_center", c.include_center()},
          {"rank", c.rank()}};
}

Scheme scheme_from_json(const json& j) {
  return guarded([&]() -> Scheme {
    const json& type = field(j, "type");
    if (!type.is_string()) bad("type: expected \"grid\" or \"cross\"");
    const std::string t = type.get<std::string>();
    Axes axes = axes_from(j);
    if (t == "grid") {
      const json& pts = field(j, "points_per_dim");
      if (!pts.is_array()) bad("points_per_dim: expected an array per dimension");
      std::vector<std::vector<double>> points;
      for (const auto& p : pts) points.push_back(dvec(p, "points_per_dim"));
      return GridScheme(std::move(points), std::move(axes));
    }
    if (t == "cross") {
      std::vector<double> thr = j.contains("shell_thresholds") ? dvec(j["shell_thresholds"], "shell_thresholds") : std::vector<double>{};
      bool center = j.contains("include_center") ? j["include_center"].get<bool>() : true;
      Index rank = j.contains("rank") ? static_cast<Index>(count(j["rank"], "rank")) : axes.dim();
      return CrossScheme(std::move(axes), std::move(thr), center, rank);
    }
    bad("type: unknown scheme type '" + t + "'");
  });
}

json to_json(const SchemeSet& set) {
  json a = json::array();
  for (const auto& e : set.entries) {
    json entry{{"anchor", vec_json(e.anchor)}, {"budget", e.budget}};
    entry["members"] = e.members ? json(*e.members) : json(nullptr);
    json schemes = json::array();
    for (const auto& s : e.schemes) schemes.push_back(to_json(s));
    entry["schemes"] = schemes;
    a.push_back(entry);
  }
  return a;
}

SchemeSet scheme_set_from_json(const json& j) {
  try {
    SchemeSet set;
    auto single = [](Scheme s) {
      SchemeEntry e;
      e.anchor = scheme_axes(s).offset();
      e.schemes.push_back(std::move(s));
      return e;
    };
    if (looks_like_scheme(j)) {
      set.entries.push_back(single(scheme_from_json(j)));
      return set;
    }
    if (!j.is_array()) bad("scheme set: expected an array or a scheme object");
    for (const auto& item : j) {
      if (looks_like_scheme(item)) {
        set.entries.push_back(single(scheme_from_json(item)));
        continue;
      }
      SchemeEntry e;
      const json& schemes = field(item, "schemes");
      if (!schemes.is_array()) bad("schemes: expected an array");
      for (const auto& s : schemes) e.schemes.push_back(scheme_from_json(s));
      if (e.schemes.empty()) throw Error(ErrorKind::EmptySchemeSet, "scheme set entry has no schemes");
      e.anchor = item.contains("anchor") ? vec(item["anchor"], "anchor") : scheme_axes(e.schemes.front()).offset();
      if (item.contains("members") && !item["members"].is_null()) {
        std::vector<std::size_t> members;
        for (const auto& m : item["members"]) members.push_back(count(m, "members"));
        e.members = std::move(members);
      }
      if (item.contains("budget")) e.budget = count(item["budget"], "budget");
      set.entries.push_back(std::move(e));
    }
    return set;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

json to_json(const Report& report) {
  const auto& cert = report.result.certificate;
  json j{{"w2", num(cert.value)},
         {"kind", std::string(to_string(cert.kind))},
         {"support_size", report.support_size}};
  if (cert.statistical) j["std_error"] = num(cert.std_error);
  if (report.result.per_component_sq_errors) {
    json a = json::array();
    for (double v : *report.result.per_component_sq_errors) a.push_back(num(v));
    j["per_component_sq_errors"] = a;
  }
  j["pruned_mass"] = report.pruned_mass;
  j["timings_ms"] = report.timings_ms;
  return j;
}

}  // namespace gmq::io
