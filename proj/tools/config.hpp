#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoldp/harness.hpp"

namespace geoldp::cli {

// One JSON file per experiment. Keys outside the documented set are errors.
struct Config {
  ExperimentPlan plan;
  bool has_tail = false;  // "x" present: estimate tails and fit a slope
  std::uint64_t law_samples = 1'000'000;
  std::vector<std::vector<double>> rate_grid;
  std::vector<std::pair<double, double>> windows;
  std::optional<std::string> input;
  std::string out = "out";

  friend bool operator==(const Config&, const Config&) = default;
};

Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);
nlohmann::json to_json(const Config& config);

}  // namespace geoldp::cli
