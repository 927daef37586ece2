#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "geoldp/errors.hpp"
#include "geoldp/harness.hpp"
#include "geoldp/rng.hpp"

using namespace geoldp;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentPlan edge_plan(std::vector<RegimePoint> grid, std::uint64_t replicates) {
  ExperimentPlan p;
  p.grid = std::move(grid);
  p.score = ScoreSpec{};
  p.replicates = replicates;
  p.seed = 17;
  return p;
}

PointCloud planar(std::initializer_list<Vec2> pts, double r, double rho) {
  RegimeParams regime;
  regime.n = 1;
  regime.r = r;
  regime.rho = rho;
  const std::vector<Vec2> v(pts);
  return cloud_from_points(v, regime);
}

TailEstimate synthetic(double rho, double p, std::uint64_t replicates) {
  TailEstimate e;
  e.rho = rho;
  e.replicates = replicates;
  e.p_hat = p;
  e.hits = static_cast<std::uint64_t>(std::llround(p * static_cast<double>(replicates)));
  return e;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("plan validation") {
    ExperimentPlan p = edge_plan({{1e4, 20}}, 10);
    CHECK_NOTHROW(validate_plan(p));
    p.grid = {{100, 20}};  // n r^2 = 0.2
    CHECK_THROWS_AS(validate_plan(p), SparsityViolation);
    p = edge_plan({{1e4, 20}}, 0);
    CHECK_THROWS_AS(validate_plan(p), DomainError);
    p = edge_plan({{1e4, 20}}, 10);
    p.component = 1;
    CHECK_THROWS_AS(validate_plan(p), DomainError);
    p = edge_plan({{1e4 + 0.5, 20}}, 10);
    p.process = ProcessKind::binomial;
    CHECK_THROWS_AS(validate_plan(p), DomainError);
  }

  TEST_CASE("replicate seeds are addressed by index") {
    CHECK(replicate_seed(1, 0, 5) == replicate_seed(1, 0, 5));
    CHECK(replicate_seed(1, 0, 5) != replicate_seed(1, 1, 5));
    CHECK(replicate_seed(1, 0, 5) != replicate_seed(2, 0, 5));
  }

  TEST_CASE("law of large numbers at desk scale") {
    ExperimentPlan p = edge_plan({{3000, 20}}, 3000);
    p.workers = 2;
    const auto rows = run_lln(p);
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0].mean - kPi / 2) <= 0.05 * kPi / 2);
    p.seed = 99;
    const auto other = run_lln(p);
    CHECK(std::abs(other[0].mean - rows[0].mean) <= 3 * std::hypot(other[0].stderr_, rows[0].stderr_));
  }

  TEST_CASE("results do not depend on the worker count") {
    ExperimentPlan p = edge_plan({{2000, 5}, {2000, 10}}, 200);
    p.x = 1.0;
    const auto one = run_experiment(p);
    p.workers = 3;
    const auto three = run_experiment(p);
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].mean == three[i].mean);
      CHECK(one[i].stderr_ == three[i].stderr_);
      CHECK(one[i].tail.hits == three[i].tail.hits);
    }
  }

  TEST_CASE("tail estimates") {
    ExperimentPlan p = edge_plan({{2000, 4}}, 50);
    p.x = 0.0;
    p.direction = TailDirection::upper;
    CHECK(estimate_tail(p)[0].p_hat == 1.0);

    p.x = 1e6;
    p.replicates = 10;
    const TailEstimate far = estimate_tail(p)[0];
    CHECK(far.p_hat == 0.0);
    CHECK(far.under_resolved);

    ExperimentPlan up = edge_plan({{2000, 2}, {2000, 4}, {2000, 8}}, 2000);
    up.x = 2.5;
    const auto tails = estimate_tail(up);
    for (std::size_t i = 0; i + 1 < tails.size(); ++i) {
      CHECK(tails[i + 1].p_hat < tails[i].p_hat);
      CHECK(tails[i].ci.lo <= tails[i].p_hat);
      CHECK(tails[i].p_hat <= tails[i].ci.hi);
    }
  }

  TEST_CASE("Wilson interval") {
    const auto w = wilson_interval(30, 100);
    CHECK(w.lo < 0.3);
    CHECK(w.hi > 0.3);
    CHECK(wilson_interval(0, 100).lo == 0.0);
    CHECK(wilson_interval(100, 100).hi == doctest::Approx(1.0));
  }

  TEST_CASE("slope fit on synthetic data") {
    std::vector<TailEstimate> exact;
    for (double rho : {5.0, 10.0, 15.0, 20.0, 25.0}) exact.push_back(synthetic(rho, std::exp(-0.23 * rho), 1000000));
    for (auto& e : exact) e.hits = std::max<std::uint64_t>(e.hits, 1);
    const SlopeFit fit = fit_ldp_slope(exact);
    CHECK(std::abs(fit.slope + 0.23) <= 1e-12);
    CHECK(fit.points_used == 5);

    std::vector<TailEstimate> flat;
    for (double rho : {5.0, 10.0, 15.0}) flat.push_back(synthetic(rho, 0.3, 1000));
    CHECK(std::abs(fit_ldp_slope(flat).slope) <= 1e-12);

    flat.pop_back();
    CHECK_THROWS_AS(fit_ldp_slope(flat), InsufficientData);
  }

  TEST_CASE("slope confidence intervals are calibrated") {
    Rng rng(5);
    const std::uint64_t N = 1000000;
    int covered = 0;
    const int meta = 400;
    for (int rep = 0; rep < meta; ++rep) {
      std::vector<TailEstimate> est;
      for (double rho : {5.0, 10.0, 15.0, 20.0, 25.0}) {
        const double p = std::exp(-0.23 * rho);
        std::binomial_distribution<std::uint64_t> draw(N, p);
        const std::uint64_t hits = draw(rng);
        TailEstimate e = synthetic(rho, static_cast<double>(hits) / N, N);
        e.hits = hits;
        est.push_back(e);
      }
      const SlopeFit fit = fit_ldp_slope(est);
      covered += fit.ci_lo <= -0.23 && -0.23 <= fit.ci_hi;
    }
    CHECK(covered >= 0.93 * meta);
  }

  TEST_CASE("blocked process counts") {
    // rho = 4 gives a 2 x 2 partition of the square.
    const double r = 0.01, rho = 4.0;
    const PointCloud empty = planar({}, r, rho);
    CHECK(blocked_point_process_counts(empty, 2, 1.0, 1.0) == std::vector<std::uint64_t>(4, 0));

    const PointCloud inside = planar({{0.25, 0.25}, {0.255, 0.25}, {0.8, 0.8}}, r, rho);
    CHECK(blocked_point_process_counts(inside, 2, 1.0, 1.0) == std::vector<std::uint64_t>{1, 0, 0, 0});

    const PointCloud straddle = planar({{0.498, 0.25}, {0.503, 0.25}}, r, rho);
    CHECK(blocked_point_process_counts(straddle, 2, 1.0, 1.0) == std::vector<std::uint64_t>(4, 0));

    // A neighbour across the block boundary does not break isolation.
    const PointCloud across = planar({{0.492, 0.25}, {0.497, 0.25}, {0.502, 0.25}}, r, rho);
    CHECK(blocked_point_process_counts(across, 2, 1.0, 1.0) == std::vector<std::uint64_t>{1, 0, 0, 0});
    CHECK(blocks_per_side(4.0, 2) == 2);
    CHECK(blocks_per_side(10.0, 2) == 3);
    CHECK(blocks_per_side(27.0, 3) == 3);
  }

  TEST_CASE("Poisson goodness of fit") {
    Rng rng(6);
    int passes = 0;
    const int runs = 200;
    for (int run = 0; run < runs; ++run) {
      std::poisson_distribution<std::uint64_t> law(1.3);
      std::vector<std::uint64_t> counts(2000);
      for (auto& c : counts) c = law(rng);
      passes += poisson_fit(counts, 1.3).p_value > 1e-3;
    }
    CHECK(passes >= 0.99 * runs);

    std::poisson_distribution<std::uint64_t> law(1.3);
    std::vector<std::uint64_t> shifted(2000);
    for (auto& c : shifted) c = law(rng) + 1;
    const PoissonFitReport bad = poisson_fit(shifted, 1.3);
    CHECK(bad.p_value < 1e-3);
    CHECK(bad.tv > 0.2);
  }

  TEST_CASE("Poisson and binomial samplers agree") {
    ExperimentPlan p = edge_plan({{2000, 10}}, 1500);
    const PairedComparison cmp = poisson_vs_binomial(p);
    CHECK(cmp.means_agree);
    REQUIRE(cmp.z_scores.size() == 1);
    CHECK(std::abs(cmp.z_scores[0]) < 3.0);
  }

  TEST_CASE("per-replicate invariants hold in beta1 and N experiments") {
    ExperimentPlan b = edge_plan({{300, 6}}, 60);
    b.score.name = "persistent-triple";
    b.score.k = 3;
    b.score.thresholds = {1.1};
    b.score.births = {1.0};
    b.statistic = StatisticKind::beta1;
    b.eps_sparse = 1.0;
    const auto rows = run_experiment(b);
    CHECK(rows[0].invariant_failures == 0);

    ExperimentPlan m = edge_plan({{250, 6}}, 60);
    m.score.name = "morse";
    m.score.k = 3;
    m.score.thresholds = {0.5, 1.0};
    m.statistic = StatisticKind::morse_N;
    m.eps_sparse = 1.0;
    CHECK(run_experiment(m)[0].invariant_failures == 0);
  }

  TEST_CASE("ledger CSV") {
    ExperimentPlan p = edge_plan({{2000, 5}}, 20);
    std::ostringstream out;
    write_ledger_csv(out, run_experiment(p), StatisticKind::T);
    std::istringstream in(out.str());
    std::string header, row, extra;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "n,rho,r,statistic,mean,stderr,p_hat,ci_lo,ci_hi");
    CHECK(row.rfind("2000,5,", 0) == 0);
    CHECK_FALSE(std::getline(in, extra));
  }
}
