// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all nine)

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "allocator.hpp"
#include "geoldp/geometry.hpp"
#include "geoldp/harness.hpp"
#include "geoldp/oracles.hpp"
#include "geoldp/persistence2d.hpp"
#include "geoldp/rates.hpp"
#include "geoldp/rng.hpp"

using namespace geoldp;

namespace {

// ---- tolerances and budgets ------------------------------------------------

constexpr double kPi = std::numbers::pi;

// 1: closed-form slope
constexpr double kSlopeN = 1e4;
constexpr double kSlopeX = 0.75;  // lower tail; rho_max * I(x) = 6.66
constexpr std::uint64_t kSlopeReplicates = 1'000'000;
constexpr double kSlopeRelTol = 0.25;

// 2: law of large numbers
constexpr std::uint64_t kLlnReplicates = 10'000;
constexpr double kLlnRelTol = 0.05;
constexpr double kMorseT = 0.5;
constexpr std::uint64_t kLawSamples = 2'000'000;

// 3: oracle equivalence
constexpr int kOracleSeeds = 100;

// 4: Morse inequality
constexpr double kBettiN = 1e3;
constexpr std::uint64_t kBettiReplicates = 2000;
constexpr double kBettiS = 1.0, kBettiT = 1.1;

// 5: rate function
constexpr double kRateTol = 1e-8;
constexpr double kRateAtMuTol = 1e-10;
constexpr double kGradTol = 1e-6;

// 6: duality
constexpr double kDualityTol = 1e-10;

// 7: Poisson approximation
constexpr double kBlockRho = 16.0;
constexpr double kSparse = 1e-3, kDense = 0.3;
constexpr std::uint64_t kBlockReplicates = 3000;
constexpr double kChiAlpha = 1e-3;
constexpr double kTvTol = 0.05;

// 8: binomial equivalence
constexpr std::uint64_t kPairReplicates = 300'000;

// 9: geometry predicates
constexpr int kCechTriples = 10'000;
constexpr double kCechStep = 2e-3;
constexpr int kAlphaClouds = 100;

constexpr std::uint64_t kRoot = 20240601;

int workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double closed_rate(double mu, double x) { return x * std::log(x / mu) - x + mu; }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ExperimentPlan edge_plan(std::vector<RegimePoint> grid, std::uint64_t replicates, std::uint64_t seed) {
  ExperimentPlan p;
  p.grid = std::move(grid);
  p.replicates = replicates;
  p.seed = seed;
  p.workers = workers();
  return p;
}

void print_fit(const char* label, const SlopeFit& f) {
  std::printf("    %s slope %.5f  stderr %.5f  CI [%.5f, %.5f]  points %d\n", label, f.slope, f.slope_stderr, f.ci_lo,
              f.ci_hi, f.points_used);
}

// ---- criteria --------------------------------------------------------------

bool closed_form_slope() {
  const double mu = kPi / 2;
  const double I = closed_rate(mu, kSlopeX);
  ExperimentPlan plan = edge_plan({}, kSlopeReplicates, derive_seed(kRoot, 1));
  for (double rho : {5.0, 10.0, 15.0, 20.0, 25.0}) plan.grid.push_back({kSlopeN, rho});
  plan.x = kSlopeX;
  plan.direction = TailDirection::lower;
  const auto tails = estimate_tail(plan);
  for (const auto& t : tails)
    std::printf("    rho %4.0f  hits %8llu  p_hat %.6e  CI [%.6e, %.6e]%s\n", t.rho,
                static_cast<unsigned long long>(t.hits), t.p_hat, t.ci.lo, t.ci.hi,
                t.under_resolved ? "  under-resolved" : "");
  const SlopeFit fit = fit_ldp_slope(tails);
  print_fit("fit", fit);
  std::printf("    target -I(x) = %.5f at x = %.2f (rho_max I = %.2f), ratio %.4f\n", -I, kSlopeX, 25 * I,
              fit.slope / -I);
  return std::abs(fit.slope + I) <= kSlopeRelTol * I;
}

bool law_of_large_numbers() {
  bool ok = true;
  {
    const double mu_exact = kPi / 2;
    const ScoreLaw law = estimate_score_law(score_edge(std::vector<double>{1.0}), kLawSamples, derive_seed(kRoot, 20),
                                            workers());
    const double mu_mc = mu_vector(law)[0];
    const ExperimentPlan plan = edge_plan({{1e4, 20}}, kLlnReplicates, derive_seed(kRoot, 21));
    const RegimeSummary row = run_lln(plan)[0];
    const bool pass = std::abs(row.mean - mu_exact) <= kLlnRelTol * mu_exact;
    std::printf("    edge:  mean T/rho %.5f +- %.5f   mu %.5f (Monte Carlo %.5f)   rel. diff %.4f\n", row.mean,
                row.stderr_, mu_exact, mu_mc, row.mean / mu_exact - 1);
    ok = ok && pass && std::abs(mu_mc - mu_exact) <= 0.01 * mu_exact;
  }
  {
    ExperimentPlan plan = edge_plan({{1e4, 20}}, kLlnReplicates, derive_seed(kRoot, 22));
    plan.score.name = "morse";
    plan.score.k = 3;
    plan.score.thresholds = {kMorseT};
    plan.statistic = StatisticKind::morse_N;
    const ScoreLaw law = estimate_score_law(make_score(plan.score), kLawSamples, derive_seed(kRoot, 23), workers());
    const double mu = mu_vector(law)[0];
    const double mu_se = law.atoms.at(1u).stderr_;
    const RegimeSummary row = run_lln(plan)[0];
    const double tol = 3 * std::hypot(row.stderr_, mu_se) + kLlnRelTol * mu;
    std::printf("    morse: mean N/rho %.5f +- %.5f   mu %.5f +- %.5f   |diff| %.5f <= %.5f\n", row.mean, row.stderr_,
                mu, mu_se, std::abs(row.mean - mu), tol);
    ok = ok && std::abs(row.mean - mu) <= tol && row.invariant_failures == 0;
  }
  return ok;
}

RegimeParams dense_fixture(int k, double n, double sparsity) {
  const double r = std::sqrt(sparsity / n);
  return make_regime(2, k, n, rho_from_radius(2, k, n, r), 1.0);
}

bool oracle_equivalence() {
  const std::vector<double> two{0.5, 1.0};
  const ComplexTarget hollow{{{0, 1}, {1, 2}, {0, 2}}, 1.0};
  const ComplexTarget chain{{{0, 1}, {1, 2}, {2, 3}}, 1.0};
  struct Case {
    const char* name;
    ScoreFunction score;
    double n;
    double sparsity = 0.2;
  };
  const std::vector<Case> cases{
      {"edge", score_edge(two), 300},
      {"rgg path", score_rgg_component(3, {{0, 1}, {1, 2}}, 1.0), 300},
      {"rgg triangle", score_rgg_component(3, {{0, 1}, {1, 2}, {0, 2}}, 1.0), 300},
      {"cech hollow triangle", score_cech_component(3, std::span<const ComplexTarget>(&hollow, 1)), 300},
      {"cech 4-chain", score_cech_component(4, std::span<const ComplexTarget>(&chain, 1)), 60},
      {"persistent triple", score_persistent_triple(1.0, 1.02), 300, 0.4},
      {"morse", score_morse(two), 300},
  };
  bool ok = true;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const RegimeParams regime = dense_fixture(cases[c].score.k(), cases[c].n, cases[c].sparsity);
    int mismatches = 0;
    double total = 0;
    for (int s = 0; s < kOracleSeeds; ++s) {
      const PointCloud cloud = sample_poisson(regime, derive_seed(derive_seed(kRoot, 30 + c), s));
      const auto fast = compute_T(cloud, cases[c].score).values;
      const auto slow = oracle::brute_force_T(cloud, cases[c].score).values;
      mismatches += fast != slow;
      for (double v : slow) total += v;
    }
    std::printf("    %-22s n=%3.0f n r^2=%.1f  %d seeds  total score %8.0f  mismatches %d\n", cases[c].name,
                cases[c].n, cases[c].sparsity, kOracleSeeds, total, mismatches);
    ok = ok && mismatches == 0 && total > 0;
  }
  const std::vector<double> ts{0.25, 0.5, 1.0};
  const RegimeParams regime = dense_fixture(3, 300, 0.2);
  int mismatches = 0;
  double total = 0;
  for (int s = 0; s < kOracleSeeds; ++s) {
    const PointCloud cloud = sample_poisson(regime, derive_seed(derive_seed(kRoot, 39), s));
    const auto a = compute_morse(cloud, ts).values;
    const auto b = morse_count_delaunay(delaunay(cloud.planar_points(), s), ts, regime.r).values;
    mismatches += a != b;
    for (double v : a) total += v;
  }
  std::printf("    %-22s n=300 n r^2=0.2  %d seeds  total count %8.0f  mismatches %d\n", "compute_morse/Delaunay", kOracleSeeds,
              total, mismatches);
  return ok && mismatches == 0 && total > 0;
}

bool morse_inequality() {
  bool ok = true;
  std::vector<double> ratios;
  const ScoreFunction g = score_persistent_triple(kBettiS, kBettiT);
  int index = 0;
  for (double sparsity : {0.2, 0.1, 0.05}) {
    const RegimeParams regime = dense_fixture(3, kBettiN, sparsity);
    std::uint64_t violations = 0;
    double gap_sum = 0, beta_sum = 0;
    for (std::uint64_t rep = 0; rep < kBettiReplicates; ++rep) {
      const std::uint64_t seed = derive_seed(derive_seed(kRoot, 40 + index), rep);
      const PointCloud cloud = sample_poisson(regime, seed);
      const int beta = persistent_betti_1(alpha_filtration(delaunay(cloud.planar_points(), seed), regime.r), kBettiS,
                                          kBettiT);
      const double gap = beta - compute_T(cloud, g).values[0];
      const double bound = 3.0 * static_cast<double>(component_size_vertex_count(cloud, regime.r * kBettiT));
      violations += !(gap >= 0.0 && gap <= bound);
      gap_sum += gap;
      beta_sum += beta;
    }
    const double ratio = gap_sum / kBettiReplicates / regime.rho;
    ratios.push_back(ratio);
    std::printf("    n r^2 %.2f  rho %6.2f  mean beta1 %.4f  mean gap %.4f  gap/rho %.5f  violations %llu\n", sparsity,
                regime.rho, beta_sum / kBettiReplicates, gap_sum / kBettiReplicates, ratio,
                static_cast<unsigned long long>(violations));
    ok = ok && violations == 0;
    ++index;
  }
  return ok && ratios[0] > ratios[1] && ratios[1] > ratios[2];
}

bool rate_properties() {
  bool ok = true;
  const double mu = kPi / 2;
  const ScoreLaw law = make_score_law(1, {{1u, mu}});
  double worst = 0;
  for (int i = 1; i <= 20; ++i) {
    const double x = mu * 0.15 * i;
    worst = std::max(worst, std::abs(rate_I(law, vec({x})).value - closed_rate(mu, x)));
  }
  const double at_mu = rate_I(law, vec({mu})).value;
  const double h = 1e-5;
  const double grad = (rate_I(law, vec({mu + h})).value - rate_I(law, vec({mu - h})).value) / (2 * h);
  std::printf("    one-atom law: max |Newton - closed form| %.3e  I(mu) %.3e  FD gradient at mu %.3e\n", worst, at_mu,
              grad);
  ok = worst <= kRateTol && std::abs(at_mu) <= kRateAtMuTol && std::abs(grad) <= kGradTol;

  // Two nested edge thresholds: the inner disk is counted by both components.
  const std::vector<double> ts{0.6, 1.0};
  const ScoreLaw nested = estimate_score_law(score_edge(ts), kLawSamples, derive_seed(kRoot, 50), workers());
  const auto m = mu_vector(nested);
  const Eigen::VectorXd mv = vec({m[0], m[1]});
  const double nested_at_mu = rate_I(nested, mv).value;
  double nested_grad = 0;
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e[i] = h;
    nested_grad = std::max(nested_grad, std::abs((rate_I(nested, mv + e).value - rate_I(nested, mv - e).value) / (2 * h)));
  }
  Rng rng(derive_seed(kRoot, 51));
  int not_pd = 0;
  double min_eig = INFINITY;
  for (int rep = 0; rep < 20; ++rep) {
    const double x0 = m[0] * (0.3 + 1.4 * rng.uniform());
    const double x1 = x0 + (m[1] - m[0]) * (0.3 + 1.4 * rng.uniform());
    const Eigen::VectorXd x = vec({x0, x1});
    const Eigen::MatrixXd H = hessian_fd(nested, x, 1e-4 * x.norm());
    const Eigen::MatrixXd sym = 0.5 * (H + H.transpose());
    const double e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff();
    min_eig = std::min(min_eig, e);
    not_pd += !(e > 0.0);
  }
  std::printf("    nested law mu (%.5f, %.5f): I(mu) %.3e  FD gradient %.3e  smallest FD Hessian eigenvalue %.4e over 20 "
              "points, %d not PD\n",
              m[0], m[1], nested_at_mu, nested_grad, min_eig, not_pd);
  return ok && std::abs(nested_at_mu) <= kRateAtMuTol && nested_grad <= kGradTol && not_pd == 0;
}

bool duality() {
  Rng rng(derive_seed(kRoot, 60));
  double worst = 0;
  for (int inst = 0; inst < 100; ++inst) {
    DiscreteMeasure tau;
    std::vector<double> f(10);
    for (int j = 0; j < 10; ++j) {
      tau.masses.push_back(0.05 + 2.0 * rng.uniform());
      f[j] = -3.0 + 6.0 * rng.uniform();
    }
    worst = std::max(worst, std::abs(duality_gap(tau, f).gap));
  }
  std::printf("    100 instances, 10 atoms: max |gap| %.3e\n", worst);
  return worst <= kDualityTol;
}

bool poisson_approximation() {
  const double L = 1.0;
  const double tau = estimate_score_law(score_indicator(2, 2, L, 1.0), kLawSamples, derive_seed(kRoot, 70), workers())
                         .total();
  std::printf("    interior tau mass %.5f (pi/2 = %.5f), blocks per side %d\n", tau, kPi / 2,
              blocks_per_side(kBlockRho, 2));
  auto run = [&](double sparsity, double eps, std::uint64_t seed) {
    ExperimentPlan plan = edge_plan({{kBlockRho / sparsity, kBlockRho}}, kBlockReplicates, seed);
    plan.eps_sparse = eps;
    const PoissonFitReport rep = poisson_approx_test(plan, tau, L);
    std::printf("    n r^2 %.0e: %llu counts  mean %.4f vs lambda %.4f  chi2 %.2f (dof %d)  p %.4f  TV %.4f\n", sparsity,
                static_cast<unsigned long long>(rep.observations), rep.sample_mean, rep.lambda, rep.chi2, rep.dof,
                rep.p_value, rep.tv);
    return rep;
  };
  const PoissonFitReport sparse = run(kSparse, kDefaultSparsityGuard, derive_seed(kRoot, 71));
  const PoissonFitReport dense = run(kDense, 1.0, derive_seed(kRoot, 72));
  return sparse.p_value >= kChiAlpha && sparse.tv <= kTvTol && dense.tv > sparse.tv;
}

bool binomial_equivalence() {
  ExperimentPlan plan = edge_plan({{1e4, 10}, {1e4, 15}, {1e4, 20}}, kPairReplicates, derive_seed(kRoot, 80));
  plan.x = kSlopeX;
  plan.direction = TailDirection::lower;
  const PairedComparison cmp = poisson_vs_binomial(plan);
  bool ok = true;
  for (std::size_t i = 0; i < cmp.poisson.size(); ++i) {
    std::printf("    rho %4.0f  poisson %.5f +- %.5f  binomial %.5f +- %.5f  z %+.3f   p_hat %.4e / %.4e\n",
                cmp.poisson[i].rho, cmp.poisson[i].mean, cmp.poisson[i].stderr_, cmp.binomial[i].mean,
                cmp.binomial[i].stderr_, cmp.z_scores[i], cmp.poisson[i].tail.p_hat, cmp.binomial[i].tail.p_hat);
    if (cmp.poisson[i].rho == 10 || cmp.poisson[i].rho == 20) ok = ok && std::abs(cmp.z_scores[i]) < 3.0;
  }
  std::vector<TailEstimate> tp, tb;
  for (const auto& r : cmp.poisson) tp.push_back(r.tail);
  for (const auto& r : cmp.binomial) tb.push_back(r.tail);
  const SlopeFit fp = fit_ldp_slope(tp), fb = fit_ldp_slope(tb);
  print_fit("poisson ", fp);
  print_fit("binomial", fb);
  return ok && fp.ci_lo <= fb.ci_hi && fb.ci_lo <= fp.ci_hi;
}

bool geometry_predicates() {
  Rng rng(derive_seed(kRoot, 90));
  int tested = 0, excluded = 0, disagreements = 0, cycles = 0;
  while (tested < kCechTriples) {
    // Three families: spread over a box, clustered at the edge scale, and
    // jittered near-equilateral triangles whose cycle status is borderline.
    const double r = 1.0;
    const Vec2 a{rng.uniform() * 1.2, rng.uniform() * 1.2};
    Vec2 b, c;
    if (tested % 3 == 2) {
      const double side = r * (0.85 + 0.15 * rng.uniform());
      const double phi = 2 * kPi * rng.uniform();
      auto jitter = [&] { return 0.08 * r * (2 * rng.uniform() - 1); };
      b = {a.x + side * std::cos(phi) + jitter(), a.y + side * std::sin(phi) + jitter()};
      c = {a.x + side * std::cos(phi + kPi / 3) + jitter(), a.y + side * std::sin(phi + kPi / 3) + jitter()};
    } else {
      const double spread = tested % 3 == 0 ? 1.2 : 0.5;
      b = {a.x + spread * (2 * rng.uniform() - 1), a.y + spread * (2 * rng.uniform() - 1)};
      c = {a.x + spread * (2 * rng.uniform() - 1), a.y + spread * (2 * rng.uniform() - 1)};
    }
    if (std::abs(twice_signed_area(a, b, c)) <= 1e-9) continue;
    const Vec2 tri[3] = {a, b, c};
    if (std::abs(enclosing_radius(tri) - r / 2) <= 10 * kCechStep) {
      ++excluded;
      continue;
    }
    const bool edges = distance(a, b) <= r && distance(b, c) <= r && distance(c, a) <= r;
    const int expected = edges && !triple_intersection_oracle(a, b, c, r / 2, kCechStep) ? 1 : 0;
    const int got = cech_one_cycle(a, b, c, r);
    disagreements += got != expected;
    cycles += got;
    ++tested;
  }
  std::printf("    cech_one_cycle: %d triples (%d with a cycle), %d in exclusion band, %d disagreements\n", tested, cycles,
              excluded, disagreements);

  int violations = 0;
  for (int s = 0; s < kAlphaClouds; ++s) {
    Rng cr(derive_seed(derive_seed(kRoot, 91), s));
    std::vector<Vec2> pts(200);
    for (auto& p : pts) p = {cr.uniform(), cr.uniform()};
    const Triangulation tri = delaunay(pts, s);
    const AlphaFiltration filt = alpha_filtration(tri, 0.05);
    std::map<std::vector<int>, double> value;
    std::size_t v = 0, e = 0, f = 0;
    for (const auto& sx : filt.simplices) {
      value[std::vector<int>(sx.vertices.begin(), sx.vertices.begin() + sx.dim + 1)] = sx.value;
      (sx.dim == 0 ? v : sx.dim == 1 ? e : f)++;
    }
    bool ok = true;
    double previous = -INFINITY;
    for (const auto& sx : filt.simplices) {
      ok = ok && sx.value >= previous;  // filtration order
      previous = sx.value;
      if (sx.dim == 0) continue;
      for (int drop = 0; drop <= sx.dim; ++drop) {
        std::vector<int> face;
        for (int i = 0; i <= sx.dim; ++i)
          if (i != drop) face.push_back(sx.vertices[i]);
        ok = ok && value.at(face) <= sx.value;
      }
    }
    const PersistenceDiagram dgm = persistence_diagram(filt);
    ok = ok && static_cast<long>(v) - static_cast<long>(e) + static_cast<long>(f) == 1;
    ok = ok && dgm.finite_pairs_dim1 + dgm.essential_dim1 == dgm.edges - dgm.vertices + dgm.components;
    ok = ok && dgm.components == 1 && dgm.essential_dim1 == 0;
    violations += !ok;
  }
  std::printf("    alpha filtrations: %d clouds, %d with violations\n", kAlphaClouds, violations);
  return disagreements == 0 && violations == 0;
}

}  // namespace

int main(int argc, char** argv) {
  cli::keep_large_buffers_on_heap();
  const std::vector<std::pair<const char*, std::function<bool()>>> criteria{
      {"closed-form LDP slope of the edge count", closed_form_slope},
      {"law of large numbers for T and the Morse count", law_of_large_numbers},
      {"grid statistics equal brute-force oracles", oracle_equivalence},
      {"Morse inequality and its sparsity trend", morse_inequality},
      {"rate function properties", rate_properties},
      {"entropy duality identity", duality},
      {"Poisson approximation of the blocked process", poisson_approximation},
      {"binomial and Poisson samplers agree", binomial_equivalence},
      {"geometry predicate suite", geometry_predicates},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  std::vector<std::string> summary;
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    std::printf("criterion %d: %s\n", id, criteria[i].first);
    std::fflush(stdout);
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = criteria[i].second();
    } catch (const std::exception& e) {
      std::printf("    exception: %s\n", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[160];
    std::snprintf(line, sizeof line, "%s criterion %d: %s (%.1f s)", pass ? "PASS" : "FAIL", id, criteria[i].first, secs);
    std::printf("%s\n\n", line);
    std::fflush(stdout);
    summary.emplace_back(line);
    all = all && pass;
  }
  std::printf("summary\n");
  for (const auto& s : summary) std::printf("  %s\n", s.c_str());
  return all ? 0 : 1;
}
