#include "config.hpp"

#include <fstream>
#include <set>

#include "geoldp/errors.hpp"

namespace geoldp::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

ScoreSpec parse_score(const json& j) {
  reject_unknown(j, {"name", "k", "d", "thresholds", "births", "graph", "complex"}, "score");
  ScoreSpec s;
  s.name = get<std::string>(j, "name", "score");
  if (j.contains("k")) s.k = get<int>(j, "k", "score");
  else if (s.name == "persistent-triple" || s.name == "morse") s.k = 3;
  if (j.contains("d")) s.d = get<int>(j, "d", "score");
  if (j.contains("thresholds")) s.thresholds = get<std::vector<double>>(j, "thresholds", "score");
  if (j.contains("births")) s.births = get<std::vector<double>>(j, "births", "score");
  if (j.contains("graph")) {
    for (const auto& e : get<std::vector<std::vector<int>>>(j, "graph", "score")) {
      if (e.size() != 2) throw ConfigError("score.graph: every edge needs two vertices");
      s.graph.emplace_back(e[0], e[1]);
    }
  }
  if (j.contains("complex")) s.complex = get<std::vector<std::vector<int>>>(j, "complex", "score");
  return s;
}

json score_json(const ScoreSpec& s) {
  json j{{"name", s.name}, {"k", s.k}, {"d", s.d}, {"thresholds", s.thresholds}};
  if (!s.births.empty()) j["births"] = s.births;
  if (!s.graph.empty()) {
    json edges = json::array();
    for (auto [a, b] : s.graph) edges.push_back({a, b});
    j["graph"] = edges;
  }
  if (!s.complex.empty()) j["complex"] = s.complex;
  return j;
}

}  // namespace

Config parse_config(const json& j) {
  reject_unknown(j,
                 {"grid", "score", "statistic", "component", "x", "direction", "replicates", "seed", "process",
                  "eps_sparse", "workers", "check_invariants", "law_samples", "rate_grid", "windows", "input", "out"},
                 "config");
  Config c;
  ExperimentPlan& p = c.plan;
  if (j.contains("grid")) {
    if (!j["grid"].is_array()) throw ConfigError("config.grid: expected an array");
    for (const auto& g : j["grid"]) {
      reject_unknown(g, {"n", "rho"}, "grid entry");
      p.grid.push_back({get<double>(g, "n", "grid"), get<double>(g, "rho", "grid")});
    }
  }
  if (j.contains("score")) p.score = parse_score(j["score"]);
  try {
    if (j.contains("statistic")) p.statistic = parse_statistic(get<std::string>(j, "statistic", "config"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("component")) p.component = get<int>(j, "component", "config");
  if (j.contains("x")) {
    p.x = get<double>(j, "x", "config");
    c.has_tail = true;
  }
  if (j.contains("direction")) {
    const auto d = get<std::string>(j, "direction", "config");
    if (d == "upper") p.direction = TailDirection::upper;
    else if (d == "lower") p.direction = TailDirection::lower;
    else throw ConfigError("config.direction: expected 'upper' or 'lower'");
  }
  if (j.contains("replicates")) p.replicates = get<std::uint64_t>(j, "replicates", "config");
  if (j.contains("seed")) p.seed = get<std::uint64_t>(j, "seed", "config");
  if (j.contains("process")) {
    const auto s = get<std::string>(j, "process", "config");
    if (s == "poisson") p.process = ProcessKind::poisson;
    else if (s == "binomial") p.process = ProcessKind::binomial;
    else throw ConfigError("config.process: expected 'poisson' or 'binomial'");
  }
  if (j.contains("eps_sparse")) p.eps_sparse = get<double>(j, "eps_sparse", "config");
  if (j.contains("workers")) p.workers = get<int>(j, "workers", "config");
  if (j.contains("check_invariants")) p.check_invariants = get<bool>(j, "check_invariants", "config");
  if (j.contains("law_samples")) c.law_samples = get<std::uint64_t>(j, "law_samples", "config");
  if (j.contains("rate_grid")) {
    if (!j["rate_grid"].is_array()) throw ConfigError("config.rate_grid: expected an array");
    for (const auto& x : j["rate_grid"]) {
      if (x.is_number()) c.rate_grid.push_back({x.get<double>()});
      else if (x.is_array()) c.rate_grid.push_back(x.get<std::vector<double>>());
      else throw ConfigError("config.rate_grid: entries must be numbers or arrays");
    }
  }
  if (j.contains("windows")) {
    for (const auto& w : get<std::vector<std::vector<double>>>(j, "windows", "config")) {
      if (w.size() != 2) throw ConfigError("config.windows: every window is [s, t]");
      c.windows.emplace_back(w[0], w[1]);
    }
  }
  if (j.contains("input")) c.input = get<std::string>(j, "input", "config");
  if (j.contains("out")) c.out = get<std::string>(j, "out", "config");
  if (p.replicates < 1) throw ConfigError("config.replicates: must be >= 1");
  if (p.workers < 1) throw ConfigError("config.workers: must be >= 1");
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

json to_json(const Config& c) {
  const ExperimentPlan& p = c.plan;
  json grid = json::array();
  for (const auto& g : p.grid) grid.push_back({{"n", g.n}, {"rho", g.rho}});
  json j{{"grid", grid},
         {"score", score_json(p.score)},
         {"statistic", statistic_name(p.statistic)},
         {"component", p.component},
         {"direction", p.direction == TailDirection::upper ? "upper" : "lower"},
         {"replicates", p.replicates},
         {"seed", p.seed},
         {"process", p.process == ProcessKind::poisson ? "poisson" : "binomial"},
         {"eps_sparse", p.eps_sparse},
         {"workers", p.workers},
         {"check_invariants", p.check_invariants},
         {"law_samples", c.law_samples},
         {"out", c.out}};
  if (c.has_tail) j["x"] = p.x;
  if (!c.rate_grid.empty()) j["rate_grid"] = c.rate_grid;
  if (!c.windows.empty()) {
    json w = json::array();
    for (auto [s, t] : c.windows) w.push_back({s, t});
    j["windows"] = w;
  }
  if (c.input) j["input"] = *c.input;
  return j;
}

}  // namespace geoldp::cli
