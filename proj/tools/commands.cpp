#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "geoldp/errors.hpp"
#include "geoldp/persistence2d.hpp"
#include "geoldp/rates.hpp"
#include "geoldp/rng.hpp"

namespace geoldp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kLawStream = 0x5c0e1a;

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Mean of the scalar statistic in the limit, from the Monte Carlo score law.
double limit_mean(const Config& c, const ScoreFunction& score) {
  const ExperimentPlan& p = c.plan;
  const std::uint64_t seed = derive_seed(p.seed, kLawStream);
  if (p.statistic == StatisticKind::xi_count) {
    const ScoreFunction ones = score_indicator(score.k(), score.d(), score.support_L(), score.thresholds()[p.component]);
    return estimate_score_law(ones, c.law_samples, seed, p.workers).total();
  }
  const ScoreLaw law = estimate_score_law(score, c.law_samples, seed, p.workers);
  if (p.statistic == StatisticKind::U_mass) return law.total();
  return mu_vector(law)[p.component];
}

}  // namespace

int cmd_simulate(const Config& config, std::ostream& log) {
  const ExperimentPlan& plan = config.plan;
  validate_plan(plan);
  if (config.law_samples < 10000) throw ConfigError("law_samples must be at least 1e4");
  const ScoreFunction score = make_score(plan.score);
  const auto rows = run_experiment(plan);
  const double mu = limit_mean(config, score);

  const fs::path dir(config.out);
  {
    auto out = open_output(dir / "ledger.csv");
    write_ledger_csv(out, rows, plan.statistic);
  }
  json summary{{"statistic", statistic_name(plan.statistic)},
               {"component", plan.component},
               {"mu", mu},
               {"config", to_json(config)}};
  json jrows = json::array();
  std::uint64_t failures = 0;
  bool under = false;
  for (const auto& r : rows) {
    jrows.push_back({{"n", r.n},
                     {"rho", r.rho},
                     {"r", r.r},
                     {"mean", r.mean},
                     {"stderr", r.stderr_},
                     {"hits", r.tail.hits},
                     {"p_hat", r.tail.p_hat},
                     {"under_resolved", config.has_tail && r.tail.under_resolved},
                     {"invariant_failures", r.invariant_failures}});
    failures += r.invariant_failures;
    under = under || r.tail.under_resolved;
  }
  summary["rows"] = jrows;
  summary["invariant_failures"] = failures;
  if (config.has_tail) {
    summary["x"] = plan.x;
    summary["direction"] = plan.direction == TailDirection::upper ? "upper" : "lower";
    const double I = rate_I_poisson_closed_form(mu, plan.x);
    summary["rate_at_x"] = I;
    summary["target"] = -I;
    std::vector<TailEstimate> tails;
    for (const auto& r : rows) tails.push_back(r.tail);
    try {
      const SlopeFit fit = fit_ldp_slope(tails);
      summary["slope_fit"] = {{"slope", fit.slope},         {"intercept", fit.intercept},
                              {"slope_stderr", fit.slope_stderr}, {"ci_lo", fit.ci_lo},
                              {"ci_hi", fit.ci_hi},         {"points_used", fit.points_used}};
    } catch (const InsufficientData& e) {
      summary["slope_fit"] = nullptr;
      summary["slope_fit_error"] = e.what();
    }
  }
  {
    auto out = open_output(dir / "summary.json");
    out << summary.dump(2) << '\n';
  }
  log << "simulate: " << rows.size() << " regime points, mu = " << fmt(mu) << ", outputs in " << dir.string() << '\n';
  for (const auto& r : rows)
    log << "  rho=" << r.rho << " mean=" << fmt(r.mean) << " stderr=" << fmt(r.stderr_)
        << (config.has_tail ? " p_hat=" + fmt(r.tail.p_hat) + (r.tail.under_resolved ? " (under-resolved)" : "") : "")
        << '\n';
  if (failures > 0) {
    log << "invariant check failed on " << failures << " replicates\n";
    return kExitCheckFailed;
  }
  if (config.has_tail && under) return kExitUnderResolved;
  return kExitOk;
}

int cmd_rate(const Config& config, std::ostream& log) {
  const ExperimentPlan& plan = config.plan;
  if (plan.workers < 1) throw ConfigError("workers must be >= 1");
  if (config.law_samples < 10000) throw ConfigError("law_samples must be at least 1e4");
  const ScoreFunction score = make_score(plan.score);
  const ScoreLaw law = estimate_score_law(score, config.law_samples, derive_seed(plan.seed, kLawStream), plan.workers);
  const std::vector<double> mu = mu_vector(law);
  const int m = law.m;

  std::vector<std::vector<double>> grid = config.rate_grid;
  if (grid.empty())
    for (int i = 0; i <= 12; ++i) {
      std::vector<double> x(m);
      for (int c = 0; c < m; ++c) x[c] = mu[c] * i / 4.0;
      grid.push_back(x);
    }
  for (const auto& x : grid)
    if (static_cast<int>(x.size()) != m) throw ConfigError("rate_grid entries must have one value per component");

  const fs::path dir(config.out);
  {
    auto out = open_output(dir / "score_law.json");
    out << score_law_to_json(law) << '\n';
  }
  {
    auto out = open_output(dir / "mu.csv");
    out << "component,mu\n";
    for (int c = 0; c < m; ++c) out << c << ',' << fmt(mu[c]) << '\n';
  }
  auto out = open_output(dir / "rate_curve.csv");
  for (int c = 0; c < m; ++c) out << 'x' << c << ',';
  out << "I" << (m == 1 ? ",closed_form" : "") << ",status\n";
  for (const auto& x : grid) {
    for (double v : x) out << fmt(v) << ',';
    std::string status = "ok";
    double value;
    try {
      value = rate_I(law, Eigen::Map<const Eigen::VectorXd>(x.data(), m)).value;
    } catch (const NonConvergence&) {
      value = std::numeric_limits<double>::infinity();
      status = "inf";
    } catch (const SingularScore&) {
      value = std::numeric_limits<double>::infinity();
      status = "singular";
    }
    if (m == 1 && mu[0] > 0.0) {
      const double closed = rate_I_poisson_closed_form(mu[0], x[0]);
      if (status != "ok") {
        // A one-component indicator law has a single atom, so the closed form is the exact transform.
        value = closed;
        status = "closed-form";
      }
      out << fmt(value) << ',' << fmt(closed) << ',' << status << '\n';
    } else {
      out << fmt(value) << ',' << status << '\n';
    }
  }
  log << "rate: " << law.atoms.size() << " atoms, mu = (";
  for (int c = 0; c < m; ++c) log << (c ? ", " : "") << fmt(mu[c]);
  log << "), outputs in " << dir.string() << '\n';
  return kExitOk;
}

int cmd_persistence(const Config& config, std::ostream& log) {
  const ExperimentPlan& plan = config.plan;
  if (plan.score.d != 2) throw ConfigError("persistence needs d = 2");
  PointCloud cloud;
  RegimeParams regime;
  regime.d = 2;
  regime.k = 3;
  regime.r = 1.0;
  if (!plan.grid.empty()) regime = make_regime(2, 3, plan.grid[0].n, plan.grid[0].rho, plan.eps_sparse);
  if (config.input) {
    std::ifstream in(*config.input);
    if (!in) throw ConfigError("cannot open input '" + *config.input + "'");
    cloud = read_cloud_csv(in, regime);
    if (cloud.d != 2) throw ConfigError("input points must be planar");
  } else {
    if (plan.grid.empty()) throw ConfigError("persistence needs either an input file or a grid entry");
    cloud = sample(plan.process, regime, replicate_seed(plan.seed, 0, 0));
  }

  std::vector<std::pair<double, double>> windows = config.windows;
  if (windows.empty()) {
    if (plan.score.name == "persistent-triple")
      for (std::size_t i = 0; i < plan.score.births.size(); ++i)
        windows.emplace_back(plan.score.births[i], plan.score.thresholds[i]);
    else
      windows.emplace_back(1.05, 1.10);
  }
  for (auto [s, t] : windows)
    if (!(s >= 0.0) || s > t) throw ConfigError("every window needs 0 <= s <= t");

  const Triangulation tri = delaunay(cloud.planar_points(), plan.seed);
  const AlphaFiltration filt = alpha_filtration(tri, regime.r);
  const PersistenceDiagram dgm = persistence_diagram(filt);
  PersistenceDiagram dim1 = dgm;
  dim1.pairs = dgm.in_dimension(1);

  const fs::path dir(config.out);
  {
    auto out = open_output(dir / "diagram.csv");
    write_diagram_csv(out, dim1);
  }
  bool all_pass = true;
  auto out = open_output(dir / "betti.csv");
  out << "s,t,beta1,triple_count,vertices_in_large_components,morse_inequality\n";
  for (auto [s, t] : windows) {
    const int beta = persistent_betti_1(dgm, s, t);
    const double g = cloud.empty() ? 0.0 : compute_T(cloud, score_persistent_triple(s, t)).values[0];
    const std::size_t big = component_size_vertex_count(cloud, regime.r * t);
    const double gap = beta - g;
    const bool pass = gap >= 0.0 && gap <= 3.0 * static_cast<double>(big);
    all_pass = all_pass && pass;
    out << fmt(s) << ',' << fmt(t) << ',' << beta << ',' << fmt(g) << ',' << big << ',' << (pass ? "pass" : "fail")
        << '\n';
  }
  log << "persistence: " << cloud.size() << " points, " << dim1.pairs.size() << " dimension-1 pairs, outputs in "
      << dir.string() << '\n';
  return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace geoldp::cli
