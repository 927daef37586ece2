#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "geoldp/functionals.hpp"
#include "geoldp/pointproc.hpp"

namespace geoldp {

// Serializable description of a built-in score.
struct ScoreSpec {
  std::string name = "edge";  // edge | rgg-component | cech-component | persistent-triple | morse
  int k = 2;                  // tuple size (vertex count for graphs and complexes)
  int d = 2;
  std::vector<double> thresholds{1.0};
  std::vector<double> births;                     // persistent-triple only, one per threshold
  std::vector<std::pair<int, int>> graph;         // rgg-component target, shared by all components
  std::vector<std::vector<int>> complex;          // cech-component target, shared by all components

  friend bool operator==(const ScoreSpec&, const ScoreSpec&) = default;
};

ScoreFunction make_score(const ScoreSpec& spec);

enum class StatisticKind { T, U_mass, beta1, morse_N, xi_count };
enum class TailDirection { upper, lower };  // S/rho >= x  or  S/rho <= x

const char* statistic_name(StatisticKind kind);
StatisticKind parse_statistic(const std::string& name);

struct RegimePoint {
  double n = 0.0;
  double rho = 0.0;
  friend bool operator==(const RegimePoint&, const RegimePoint&) = default;
};

struct ExperimentPlan {
  std::vector<RegimePoint> grid;
  ScoreSpec score;
  StatisticKind statistic = StatisticKind::T;
  int component = 0;  // which score component feeds the scalar statistic
  double x = 0.0;
  TailDirection direction = TailDirection::upper;
  std::uint64_t replicates = 1000;
  std::uint64_t seed = 1;
  ProcessKind process = ProcessKind::poisson;
  double eps_sparse = kDefaultSparsityGuard;
  int workers = 1;
  bool check_invariants = true;

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

// Checks plan consistency (including the sparsity guard) and throws
// DomainError or SparsityViolation.
void validate_plan(const ExperimentPlan& plan);

// Seed of replicate `rep` at grid point `point`; independent of worker count.
std::uint64_t replicate_seed(std::uint64_t root, std::size_t point, std::uint64_t rep);

// Raw scalar statistic S of one replicate; results are reported as S / rho.
struct ReplicateResult {
  double statistic = 0.0;
  bool invariant_ok = true;
};
ReplicateResult run_replicate(const ExperimentPlan& plan, const RegimeParams& regime, const ScoreFunction& score,
                              std::uint64_t seed);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};
WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.959963984540054);

struct TailEstimate {
  double n = 0.0;
  double rho = 0.0;
  double r = 0.0;
  std::uint64_t replicates = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  WilsonInterval ci;
  bool under_resolved = false;  // fewer than 50 hits
};

struct RegimeSummary {
  double n = 0.0;
  double rho = 0.0;
  double r = 0.0;
  std::uint64_t replicates = 0;
  double mean = 0.0;    // of S / rho
  double stderr_ = 0.0;
  TailEstimate tail;
  std::uint64_t invariant_failures = 0;
};

inline constexpr std::uint64_t kMinResolvedHits = 50;

// One pass over all replicates of every grid point.
std::vector<RegimeSummary> run_experiment(const ExperimentPlan& plan);

std::vector<RegimeSummary> run_lln(const ExperimentPlan& plan);
std::vector<TailEstimate> estimate_tail(const ExperimentPlan& plan);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int points_used = 0;
};

// Weighted least squares of log p_hat on rho with inverse delta-method
// variances; throws InsufficientData with fewer than three points with hits.
SlopeFit fit_ldp_slope(const std::vector<TailEstimate>& estimates);

// Side count of the block partition used for the blocked process.
int blocks_per_side(double rho, int d);

// Per block: number of k-subsets inside the block with diameter <= r L and
// isolated at r t from the other points of that block.
std::vector<std::uint64_t> blocked_point_process_counts(const PointCloud& cloud, int k, double t, double L);

struct PoissonFitReport {
  double lambda = 0.0;
  double sample_mean = 0.0;
  std::uint64_t observations = 0;
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double tv = 0.0;
};

// Chi-square goodness of fit against Poisson(lambda), bins pooled so every
// expected count is at least 5, plus the total-variation distance between
// the empirical and Poisson laws.
PoissonFitReport poisson_fit(const std::vector<std::uint64_t>& counts, double lambda);

// Simulates the plan's first grid point and pools per-block counts of the
// xi-process over blocks and replicates. `tau_mass` is the interior total
// mass of the limit measure; it is rescaled to the block volume.
PoissonFitReport poisson_approx_test(const ExperimentPlan& plan, double tau_mass, double L);

struct PairedComparison {
  std::vector<RegimeSummary> poisson;
  std::vector<RegimeSummary> binomial;
  std::vector<double> z_scores;  // difference of means over combined stderr
  bool means_agree = true;       // |z| < 3 everywhere
};

PairedComparison poisson_vs_binomial(const ExperimentPlan& plan);

// Ledger with header n,rho,r,statistic,mean,stderr,p_hat,ci_lo,ci_hi.
void write_ledger_csv(std::ostream& out, const std::vector<RegimeSummary>& rows, StatisticKind kind);

}  // namespace geoldp
