#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "gmq/discretize.hpp"
#include "gmq/gaussian.hpp"
#include "gmq/schemes.hpp"

namespace gmq::io {

using nlohmann::json;

/// Reads a whole file; throws Error(Io).
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Parses JSON text; throws Error(Parse) with the parser message.
json parse_json(const std::string& text);
json read_json(const std::filesystem::path& path);
/// Indented dump; doubles are written in shortest round-trip form.
std::string dump(const json& j);

json to_json(const GaussianMixture& mix);
GaussianMixture mixture_from_json(const json& j);

json to_json(const DiscreteDistribution& dist);
DiscreteDistribution discrete_from_json(const json& j);

json to_json(const Scheme& scheme);
Scheme scheme_from_json(const json& j);

json to_json(const SchemeSet& set);
/// Accepts a list of entries, a single scheme object, or a list of schemes.
SchemeSet scheme_set_from_json(const json& j);

struct Report {
  QuantizationResult result;
  std::size_t support_size = 0;
  double pruned_mass = 0.0;
  std::map<std::string, double> timings_ms;
};

json to_json(const Report& report);

}  // namespace gmq::io
