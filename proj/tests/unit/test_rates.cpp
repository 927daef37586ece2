#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "geoldp/errors.hpp"
#include "geoldp/rates.hpp"
#include "geoldp/rng.hpp"

using namespace geoldp;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Nested two-threshold law with exact disk and annulus masses.
ScoreLaw nested_law() {
  const double t1 = 0.6, t2 = 1.0;
  return make_score_law(2, {{0b11u, kPi * t1 * t1 / 2}, {0b10u, kPi * (t2 * t2 - t1 * t1) / 2}});
}

}  // namespace

TEST_SUITE("rates") {
  TEST_CASE("edge score law is half the unit disk") {
    const std::vector<double> t1{1.0};
    const ScoreLaw law = estimate_score_law(score_edge(t1), 400000, 7);
    REQUIRE(law.atoms.size() == 1);
    const AtomMass a = law.atoms.at(1u);
    CHECK(std::abs(a.mass - kPi / 2) <= 3 * a.stderr_);
    CHECK(a.stderr_ > 0.0);
    CHECK(law.total() <= 4.0 / 2);
    // Worker count does not change the estimate.
    const ScoreLaw threaded = estimate_score_law(score_edge(t1), 400000, 7, 3);
    CHECK(threaded.atoms.at(1u).mass == a.mass);
    CHECK_THROWS_AS(estimate_score_law(score_edge(t1), 9999, 7), DomainError);
  }

  TEST_CASE("zero score gives an empty law") {
    const ScoreFunction zero("zero", 2, 2, 1.0, {1.0}, IsolationRule::distance,
                             [](std::span<const double>, std::span<double> out) { out[0] = 0.0; });
    const ScoreLaw law = estimate_score_law(zero, 20000, 1);
    CHECK(law.empty());
    CHECK(mu_vector(law) == std::vector<double>{0.0});
  }

  TEST_CASE("nested thresholds give disk and annulus atoms") {
    const std::vector<double> ts{0.6, 1.0};
    const ScoreLaw law = estimate_score_law(score_edge(ts), 400000, 8);
    REQUIRE(law.atoms.size() == 2);
    const AtomMass inner = law.atoms.at(0b11u), ring = law.atoms.at(0b10u);
    CHECK(std::abs(inner.mass - kPi * 0.36 / 2) <= 3 * inner.stderr_);
    CHECK(std::abs(ring.mass - kPi * 0.64 / 2) <= 3 * ring.stderr_);
  }

  TEST_CASE("mean vector") {
    CHECK(mu_vector(make_score_law(1, {{1u, kPi / 2}}))[0] == doctest::Approx(kPi / 2));
    const auto mu = mu_vector(make_score_law(2, {{0b11u, 0.3}, {0b10u, 0.5}}));
    CHECK(mu[0] == doctest::Approx(0.3));
    CHECK(mu[1] == doctest::Approx(0.8));
    CHECK(mu_vector(make_score_law(3, {})) == std::vector<double>{0.0, 0.0, 0.0});
  }

  TEST_CASE("log-MGF values, convexity and overflow") {
    const double mu = 1.3;
    const ScoreLaw one = make_score_law(1, {{1u, mu}});
    CHECK(log_mgf(one, vec({0.0})) == 0.0);
    CHECK(log_mgf(one, vec({0.7})) == doctest::Approx(mu * (std::exp(0.7) - 1)));
    CHECK_THROWS_AS(log_mgf(one, vec({800.0})), MgfOverflow);

    const ScoreLaw law = nested_law();
    Rng rng(31);
    for (int rep = 0; rep < 1000; ++rep) {
      const Eigen::VectorXd a = vec({-3 + 6 * rng.uniform(), -3 + 6 * rng.uniform()});
      const Eigen::VectorXd b = vec({-3 + 6 * rng.uniform(), -3 + 6 * rng.uniform()});
      CHECK(log_mgf(law, (a + b) / 2) <= (log_mgf(law, a) + log_mgf(law, b)) / 2 + 1e-12);
    }
  }

  TEST_CASE("rate function examples and closed form") {
    const double mu = kPi / 2;
    const ScoreLaw law = make_score_law(1, {{1u, mu}});
    const RateValue at_mu = rate_I(law, vec({mu}));
    CHECK(std::abs(at_mu.value) <= 1e-10);
    CHECK(std::abs(at_mu.maximizer[0]) <= 1e-10);
    CHECK(rate_I(law, vec({kPi})).value == doctest::Approx(kPi * (std::log(2.0) - 0.5)).epsilon(1e-10));
    for (int i = 1; i <= 15; ++i) {
      const double x = mu * 0.2 * i;
      CHECK(std::abs(rate_I(law, vec({x})).value - rate_I_poisson_closed_form(mu, x)) <= 1e-8);
    }
    CHECK(rate_I_poisson_closed_form(mu, mu) == 0.0);
    CHECK(rate_I_poisson_closed_form(mu, 0.0) == doctest::Approx(mu));
    CHECK(rate_I_poisson_closed_form(mu, 2 * mu) == doctest::Approx(mu * (2 * std::log(2.0) - 1)));
    CHECK_THROWS_AS(rate_I_poisson_closed_form(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(rate_I(law, vec({-0.1})), DomainError);
    CHECK_THROWS_AS(rate_I(law, vec({0.0})), NonConvergence);
  }

  TEST_CASE("rate function on a two-component law") {
    const ScoreLaw law = nested_law();
    const auto mu = mu_vector(law);
    const Eigen::VectorXd m = vec({mu[0], mu[1]});
    CHECK(std::abs(rate_I(law, m).value) <= 1e-10);
    // Gradient at the minimizer by central differences.
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
      e[i] = h;
      const double g = (rate_I(law, m + e).value - rate_I(law, m - e).value) / (2 * h);
      CHECK(std::abs(g) <= 1e-6);
    }
    Rng rng(32);
    for (int rep = 0; rep < 20; ++rep) {
      // Interior points need x_0 < x_1: the second component dominates the first.
      const double x0 = mu[0] * (0.3 + 1.4 * rng.uniform());
      const double x1 = x0 + (mu[1] - mu[0]) * (0.3 + 1.4 * rng.uniform());
      const Eigen::VectorXd x = vec({x0, x1});
      const RateValue rv = rate_I(law, x);
      CHECK(rv.value > 0.0);
      // Dual stationarity: x = grad log-MGF at a*.
      CHECK((log_mgf_gradient(law, rv.maximizer) - x).norm() <= 1e-8);
      const Eigen::MatrixXd H = hessian_fd(law, x, 1e-4 * x.norm());
      CHECK(std::abs(H(0, 1) - H(1, 0)) <= 1e-6);
      CHECK(Eigen::LLT<Eigen::MatrixXd>(H).info() == Eigen::Success);
      CHECK((H - rate_hessian_exact(law, x)).norm() <= 1e-3 * rate_hessian_exact(law, x).norm());
    }
  }

  TEST_CASE("FD Hessian of the one-atom law") {
    const double mu = kPi / 2;
    const ScoreLaw law = make_score_law(1, {{1u, mu}});
    const Eigen::MatrixXd H = hessian_fd(law, vec({mu}), 1e-5 * mu);
    CHECK(H(0, 0) == doctest::Approx(1 / mu).epsilon(1e-4));
  }

  TEST_CASE("linearly dependent components are reported") {
    // Two identical components: every atom has v = (1, 1).
    const ScoreLaw law = make_score_law(2, {{0b11u, 1.0}});
    CHECK_THROWS_AS(rate_I(law, vec({1.0, 1.0})), SingularScore);
  }

  TEST_CASE("relative entropy") {
    DiscreteMeasure tau{{0.5, 1.0, 2.0}};
    CHECK(relative_entropy(tau, tau) == 0.0);
    DiscreteMeasure outside{{0.5, 1.0, 2.0}};
    DiscreteMeasure zero_tau{{0.5, 0.0, 2.0}};
    CHECK(std::isinf(relative_entropy(outside, zero_tau)));
    Rng rng(33);
    for (int rep = 0; rep < 200; ++rep) {
      DiscreteMeasure a, b;
      std::vector<double> f;
      for (int j = 0; j < 6; ++j) {
        a.masses.push_back(0.01 + rng.uniform());
        b.masses.push_back(0.01 + rng.uniform());
        f.push_back(-1 + 2 * rng.uniform());
      }
      CHECK(relative_entropy(a, b) > 0.0);
      DiscreteMeasure tilted;
      double pairing = 0.0, integral = 0.0;
      for (int j = 0; j < 6; ++j) {
        tilted.masses.push_back(std::exp(f[j]) * b.masses[j]);
        pairing += tilted.masses[j] * f[j];
        integral += (std::exp(f[j]) - 1) * b.masses[j];
      }
      CHECK(relative_entropy(tilted, b) == doctest::Approx(pairing - integral).epsilon(1e-12));
    }
  }

  TEST_CASE("duality gap") {
    DiscreteMeasure tau{{0.3, 0.7, 1.1}};
    const std::vector<double> zero{0, 0, 0};
    CHECK(std::abs(duality_gap(tau, zero).gap) <= 1e-15);
    Rng rng(34);
    for (int inst = 0; inst < 100; ++inst) {
      DiscreteMeasure t;
      std::vector<double> f(10);
      for (int j = 0; j < 10; ++j) {
        t.masses.push_back(0.05 + rng.uniform());
        f[j] = -2 + 4 * rng.uniform();
      }
      std::vector<DiscreteMeasure> grid(5);
      for (auto& g : grid)
        for (int j = 0; j < 10; ++j) g.masses.push_back(2 * rng.uniform());
      const DualityCheck d = duality_gap(t, f, grid);
      CHECK(std::abs(d.gap) <= 1e-10);
      CHECK(d.best_grid_value <= d.log_integral + 1e-12);
    }
  }

  TEST_CASE("score law JSON round trip") {
    const ScoreLaw law = nested_law();
    const ScoreLaw back = score_law_from_json(score_law_to_json(law));
    CHECK(back.m == law.m);
    REQUIRE(back.atoms.size() == law.atoms.size());
    for (const auto& [v, a] : law.atoms) CHECK(back.atoms.at(v).mass == a.mass);
    CHECK_THROWS_AS(score_law_from_json("{not json"), DomainError);
  }
}
