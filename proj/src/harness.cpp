#include "geoldp/harness.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "geoldp/errors.hpp"
#include "geoldp/persistence2d.hpp"
#include "geoldp/rng.hpp"
#include "geoldp/spatial.hpp"

namespace geoldp {

ScoreFunction make_score(const ScoreSpec& spec) {
  if (spec.thresholds.empty()) throw DomainError("score spec: thresholds must not be empty");
  if (spec.name == "edge") {
    if (spec.k != 2) throw DomainError("edge score: k must be 2");
    return score_edge(spec.thresholds, spec.d);
  }
  if (spec.name == "rgg-component") {
    std::vector<GraphTarget> targets;
    for (double t : spec.thresholds) targets.push_back({spec.graph, t});
    return score_rgg_component(spec.k, targets, spec.d);
  }
  if (spec.name == "cech-component") {
    if (spec.d != 2) throw DomainError("cech-component score: planar points only");
    std::vector<ComplexTarget> targets;
    for (double t : spec.thresholds) targets.push_back({spec.complex, t});
    return score_cech_component(spec.k, targets);
  }
  if (spec.name == "persistent-triple") {
    if (spec.d != 2 || spec.k != 3) throw DomainError("persistent-triple score: d = 2 and k = 3 required");
    if (spec.births.size() != spec.thresholds.size())
      throw DomainError("persistent-triple score: one birth value per threshold required");
    std::vector<PersistenceWindow> windows;
    for (std::size_t i = 0; i < spec.births.size(); ++i) windows.push_back({spec.births[i], spec.thresholds[i]});
    return score_persistent_triple(windows);
  }
  if (spec.name == "morse") {
    if (spec.d != 2 || spec.k != 3) throw DomainError("morse score: d = 2 and k = 3 required");
    return score_morse(spec.thresholds);
  }
  throw DomainError("unknown score name '" + spec.name + "'");
}

const char* statistic_name(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::T: return "T";
    case StatisticKind::U_mass: return "U-mass";
    case StatisticKind::beta1: return "beta1";
    case StatisticKind::morse_N: return "N";
    case StatisticKind::xi_count: return "xi-count";
  }
  return "?";
}

StatisticKind parse_statistic(const std::string& name) {
  for (StatisticKind k : {StatisticKind::T, StatisticKind::U_mass, StatisticKind::beta1, StatisticKind::morse_N,
                          StatisticKind::xi_count})
    if (name == statistic_name(k)) return k;
  throw DomainError("unknown statistic '" + name + "'");
}

void validate_plan(const ExperimentPlan& plan) {
  if (plan.grid.empty()) throw DomainError("plan: empty regime grid");
  if (plan.replicates < 1) throw DomainError("plan: replicates must be >= 1");
  if (plan.workers < 1) throw DomainError("plan: workers must be >= 1");
  const ScoreFunction score = make_score(plan.score);
  if (plan.component < 0 || plan.component >= score.m()) throw DomainError("plan: component out of range");
  if ((plan.statistic == StatisticKind::beta1) && plan.score.name != "persistent-triple")
    throw DomainError("plan: beta1 needs the persistent-triple score");
  if (plan.statistic == StatisticKind::morse_N && plan.score.name != "morse")
    throw DomainError("plan: N needs the morse score");
  for (const RegimePoint& g : plan.grid) {
    make_regime(plan.score.d, plan.score.k, g.n, g.rho, plan.eps_sparse);
    if (plan.process == ProcessKind::binomial && g.n != std::floor(g.n))
      throw DomainError("plan: binomial sampling needs integer n");
  }
}

std::uint64_t replicate_seed(std::uint64_t root, std::size_t point, std::uint64_t rep) {
  return derive_seed(derive_seed(root, point), rep);
}

ReplicateResult run_replicate(const ExperimentPlan& plan, const RegimeParams& regime, const ScoreFunction& score,
                              std::uint64_t seed) {
  const PointCloud cloud = sample(plan.process, regime, seed);
  const int c = plan.component;
  ReplicateResult out;
  switch (plan.statistic) {
    case StatisticKind::T:
      out.statistic = compute_T(cloud, score).values[c];
      break;
    case StatisticKind::U_mass:
      out.statistic = static_cast<double>(compute_U(cloud, score).size());
      break;
    case StatisticKind::xi_count:
      out.statistic =
          static_cast<double>(compute_xi(cloud, score.thresholds()[c], score.support_L(), score.k()).size());
      break;
    case StatisticKind::morse_N: {
      out.statistic = compute_morse(cloud, score.thresholds()).values[c];
      if (plan.check_invariants && cloud.size() <= 300) {
        const Triangulation tri = delaunay(cloud.planar_points(), seed);
        const double other = morse_count_delaunay(tri, score.thresholds(), regime.r).values[c];
        out.invariant_ok = other == out.statistic;
      }
      break;
    }
    case StatisticKind::beta1: {
      const double s = plan.score.births[c];
      const double t = plan.score.thresholds[c];
      const AlphaFiltration filt = alpha_filtration(delaunay(cloud.planar_points(), seed), regime.r);
      out.statistic = persistent_betti_1(filt, s, t);
      if (plan.check_invariants) {
        const double g = compute_T(cloud, score).values[c];
        const double bound = 3.0 * static_cast<double>(component_size_vertex_count(cloud, regime.r * t));
        const double gap = out.statistic - g;
        out.invariant_ok = gap >= 0.0 && gap <= bound;
      }
      break;
    }
  }
  return out;
}

WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

namespace {

struct Accumulator {
  double sum = 0.0;
  double sumsq = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t failures = 0;
};

// Runs fn(rep) for rep in [0, count) over `workers` threads with a strided
// partition. fn must only touch its worker's slot.
template <class Fn>
void parallel_replicates(std::uint64_t count, int workers, Fn&& fn) {
  workers = static_cast<int>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, count)));
  if (workers == 1) {
    for (std::uint64_t rep = 0; rep < count; ++rep) fn(0, rep);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t rep = w; rep < count; rep += workers) fn(w, rep);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<RegimeSummary> run_experiment(const ExperimentPlan& plan) {
  validate_plan(plan);
  const ScoreFunction score = make_score(plan.score);
  std::vector<RegimeSummary> rows;
  for (std::size_t gi = 0; gi < plan.grid.size(); ++gi) {
    const RegimeParams regime =
        make_regime(plan.score.d, plan.score.k, plan.grid[gi].n, plan.grid[gi].rho, plan.eps_sparse);
    std::vector<Accumulator> acc(plan.workers);
    parallel_replicates(plan.replicates, plan.workers, [&](int w, std::uint64_t rep) {
      const ReplicateResult res = run_replicate(plan, regime, score, replicate_seed(plan.seed, gi, rep));
      const double value = res.statistic / regime.rho;
      acc[w].sum += res.statistic;
      acc[w].sumsq += res.statistic * res.statistic;
      const bool hit = plan.direction == TailDirection::upper ? value >= plan.x : value <= plan.x;
      acc[w].hits += hit;
      acc[w].failures += !res.invariant_ok;
    });
    Accumulator total;
    for (const auto& a : acc) {
      total.sum += a.sum;
      total.sumsq += a.sumsq;
      total.hits += a.hits;
      total.failures += a.failures;
    }
    RegimeSummary row;
    row.n = regime.n;
    row.rho = regime.rho;
    row.r = regime.r;
    row.replicates = plan.replicates;
    const double N = static_cast<double>(plan.replicates);
    const double mean_s = total.sum / N;
    const double var_s = plan.replicates > 1 ? std::max(0.0, (total.sumsq - N * mean_s * mean_s) / (N - 1.0)) : 0.0;
    row.mean = mean_s / regime.rho;
    row.stderr_ = std::sqrt(var_s / N) / regime.rho;
    row.invariant_failures = total.failures;
    TailEstimate& tail = row.tail;
    tail.n = regime.n;
    tail.rho = regime.rho;
    tail.r = regime.r;
    tail.replicates = plan.replicates;
    tail.hits = total.hits;
    tail.p_hat = static_cast<double>(total.hits) / N;
    tail.ci = wilson_interval(total.hits, plan.replicates);
    tail.under_resolved = total.hits < kMinResolvedHits;
    rows.push_back(row);
  }
  return rows;
}

std::vector<RegimeSummary> run_lln(const ExperimentPlan& plan) { return run_experiment(plan); }

std::vector<TailEstimate> estimate_tail(const ExperimentPlan& plan) {
  std::vector<TailEstimate> out;
  for (const auto& row : run_experiment(plan)) out.push_back(row.tail);
  return out;
}

SlopeFit fit_ldp_slope(const std::vector<TailEstimate>& estimates) {
  double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
  int used = 0;
  for (const auto& e : estimates) {
    if (e.hits == 0 || e.replicates == 0 || !(e.p_hat > 0.0)) continue;
    const double N = static_cast<double>(e.replicates);
    const double var = std::max((1.0 - e.p_hat) / (N * e.p_hat), 1.0 / (N * N));
    const double w = 1.0 / var;
    const double x = e.rho;
    const double y = std::log(e.p_hat);
    sw += w;
    swx += w * x;
    swxx += w * x * x;
    swy += w * y;
    swxy += w * x * y;
    ++used;
  }
  if (used < 3) throw InsufficientData("fit_ldp_slope: need at least three tail estimates with hits");
  const double det = sw * swxx - swx * swx;
  if (!(det > 0.0)) throw InsufficientData("fit_ldp_slope: regime grid has no spread in rho");
  SlopeFit fit;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;
  fit.slope_stderr = std::sqrt(sw / det);
  fit.ci_lo = fit.slope - 1.959963984540054 * fit.slope_stderr;
  fit.ci_hi = fit.slope + 1.959963984540054 * fit.slope_stderr;
  fit.points_used = used;
  return fit;
}

int blocks_per_side(double rho, int d) {
  if (!(rho >= 1.0)) throw DomainError("blocked process: rho must be at least 1");
  int m = static_cast<int>(std::floor(std::pow(rho, 1.0 / d) + 1e-9));
  return std::max(1, m);
}

std::vector<std::uint64_t> blocked_point_process_counts(const PointCloud& cloud, int k, double t, double L) {
  const int d = cloud.d;
  const int m = blocks_per_side(cloud.regime.rho, d);
  std::size_t blocks = 1;
  for (int c = 0; c < d; ++c) blocks *= static_cast<std::size_t>(m);
  std::vector<std::uint64_t> counts(blocks, 0);
  const std::size_t n = cloud.size();
  if (n == 0) return counts;
  std::vector<std::uint32_t> block(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t id = 0;
    for (int c = d - 1; c >= 0; --c) {
      const int b = std::clamp(static_cast<int>(std::floor(cloud.coords[i * d + c] * m)), 0, m - 1);
      id = id * m + b;
    }
    block[i] = static_cast<std::uint32_t>(id);
  }
  const double r = cloud.regime.r;
  const double radius = r * t;
  const GridIndex grid(cloud, recommended_cell_size(cloud, r * std::max(L, t)));
  for_each_local_tuple(cloud, grid, k, r * L, [&](std::span<const std::uint32_t> members) {
    const std::uint32_t b = block[members[0]];
    for (std::uint32_t y : members)
      if (block[y] != b) return;
    bool isolated = true;
    for (std::uint32_t y : members) {
      const auto py = cloud.point(y);
      grid.for_each_candidate(py, radius, [&](std::uint32_t z) {
        if (!isolated || block[z] != b) return;
        if (std::find(members.begin(), members.end(), z) != members.end()) return;
        if (std::sqrt(squared_distance(py, cloud.point(z))) < radius) isolated = false;
      });
      if (!isolated) return;
    }
    ++counts[b];
  });
  return counts;
}

PoissonFitReport poisson_fit(const std::vector<std::uint64_t>& counts, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("poisson_fit: lambda must be positive");
  PoissonFitReport rep;
  rep.lambda = lambda;
  rep.observations = counts.size();
  if (counts.empty()) return rep;
  const boost::math::poisson_distribution<double> law(lambda);
  const std::uint64_t top = *std::max_element(counts.begin(), counts.end());
  std::vector<double> observed(top + 1, 0.0);
  double sum = 0.0;
  for (std::uint64_t c : counts) {
    observed[c] += 1.0;
    sum += static_cast<double>(c);
  }
  const double N = static_cast<double>(counts.size());
  rep.sample_mean = sum / N;

  std::vector<double> expected(top + 1);
  double tv = 0.0;
  for (std::uint64_t j = 0; j <= top; ++j) {
    const double pj = boost::math::pdf(law, static_cast<double>(j));
    expected[j] = N * pj;
    tv += std::abs(observed[j] / N - pj);
  }
  const double tail = boost::math::cdf(boost::math::complement(law, static_cast<double>(top)));
  tv += tail;
  rep.tv = 0.5 * tv;

  // Pool left to right until each bin expects at least five; the upper tail
  // joins the last bin.
  std::vector<std::pair<double, double>> bins;
  double o = 0.0, e = 0.0;
  for (std::uint64_t j = 0; j <= top; ++j) {
    o += observed[j];
    e += expected[j];
    if (e >= 5.0) {
      bins.emplace_back(o, e);
      o = e = 0.0;
    }
  }
  e += N * tail;
  if (!bins.empty() && (e < 5.0)) {
    bins.back().first += o;
    bins.back().second += e;
  } else {
    bins.emplace_back(o, e);
  }
  if (bins.size() < 2) return rep;
  for (const auto& [ob, ex] : bins) rep.chi2 += (ob - ex) * (ob - ex) / ex;
  rep.dof = static_cast<int>(bins.size()) - 1;
  const boost::math::chi_squared_distribution<double> chi(rep.dof);
  rep.p_value = boost::math::cdf(boost::math::complement(chi, rep.chi2));
  return rep;
}

PoissonFitReport poisson_approx_test(const ExperimentPlan& plan, double tau_mass, double L) {
  if (plan.grid.empty()) throw DomainError("poisson_approx_test: empty grid");
  if (plan.replicates < 1 || plan.workers < 1) throw DomainError("poisson_approx_test: invalid plan");
  const ScoreSpec& spec = plan.score;
  const RegimeParams regime = make_regime(spec.d, spec.k, plan.grid[0].n, plan.grid[0].rho, plan.eps_sparse);
  const double t = spec.thresholds.at(plan.component);
  const int m = blocks_per_side(regime.rho, spec.d);
  const double block_volume = std::pow(1.0 / m, spec.d);
  std::vector<std::vector<std::uint64_t>> per_worker(plan.workers);
  parallel_replicates(plan.replicates, plan.workers, [&](int w, std::uint64_t rep) {
    const PointCloud cloud = sample(plan.process, regime, replicate_seed(plan.seed, 0, rep));
    const auto counts = blocked_point_process_counts(cloud, spec.k, t, L);
    per_worker[w].insert(per_worker[w].end(), counts.begin(), counts.end());
  });
  std::vector<std::uint64_t> pooled;
  for (const auto& v : per_worker) pooled.insert(pooled.end(), v.begin(), v.end());
  std::sort(pooled.begin(), pooled.end());
  return poisson_fit(pooled, tau_mass * regime.rho * block_volume);
}

namespace {
constexpr std::uint64_t kBinomialStream = 0xb1a0;
}  // namespace

PairedComparison poisson_vs_binomial(const ExperimentPlan& plan) {
  PairedComparison out;
  ExperimentPlan p = plan;
  p.process = ProcessKind::poisson;
  out.poisson = run_experiment(p);
  // Independent streams, so the combined standard error below is the right scale.
  p.process = ProcessKind::binomial;
  p.seed = derive_seed(plan.seed, kBinomialStream);
  out.binomial = run_experiment(p);
  for (std::size_t i = 0; i < out.poisson.size(); ++i) {
    const double se = std::hypot(out.poisson[i].stderr_, out.binomial[i].stderr_);
    const double diff = out.poisson[i].mean - out.binomial[i].mean;
    const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    out.z_scores.push_back(z);
    if (!(std::abs(z) < 3.0)) out.means_agree = false;
  }
  return out;
}

void write_ledger_csv(std::ostream& out, const std::vector<RegimeSummary>& rows, StatisticKind kind) {
  const auto old = out.precision(17);
  out << "n,rho,r,statistic,mean,stderr,p_hat,ci_lo,ci_hi\n";
  for (const auto& row : rows)
    out << row.n << ',' << row.rho << ',' << row.r << ',' << statistic_name(kind) << ',' << row.mean << ','
        << row.stderr_ << ',' << row.tail.p_hat << ',' << row.tail.ci.lo << ',' << row.tail.ci.hi << '\n';
  out.precision(old);
}

}  // namespace geoldp
