#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geoldp/functionals.hpp"

namespace geoldp {

struct AtomMass {
  double mass = 0.0;
  double stderr_ = 0.0;
};

// Finite decomposition of an indicator-valued score: for each nonzero 0/1
// pattern v (bit i = component i) the mass of {y : H(0, y) = v} divided by k!.
struct ScoreLaw {
  int m = 1;
  int k = 2;
  int d = 2;
  double L = 1.0;
  std::uint64_t n_samples = 0;
  std::map<std::uint32_t, AtomMass> atoms;

  double total() const;
  bool empty() const { return atoms.empty(); }
};

// Hand-built law, mainly for tests and closed-form checks.
ScoreLaw make_score_law(int m, const std::map<std::uint32_t, double>& masses);

// Uniform Monte Carlo over [-L, L]^{d(k-1)}. Work is split into fixed-size
// chunks with their own RNG streams, so the result does not depend on the
// number of workers.
ScoreLaw estimate_score_law(const ScoreFunction& score, std::uint64_t n_samples, std::uint64_t seed,
                            int workers = 1);

std::vector<double> mu_vector(const ScoreLaw& law);

// sum_v nu_v (exp(<a, v>) - 1); throws MgfOverflow when an exponent exceeds
// the double range.
double log_mgf(const ScoreLaw& law, const Eigen::VectorXd& a);
Eigen::VectorXd log_mgf_gradient(const ScoreLaw& law, const Eigen::VectorXd& a);
Eigen::MatrixXd log_mgf_hessian(const ScoreLaw& law, const Eigen::VectorXd& a);

struct RateValue {
  double value = 0.0;
  Eigen::VectorXd maximizer;  // a*, which is also the gradient of I at x
  int iterations = 0;
};

// Legendre transform sup_a <a, x> - log_mgf(a) by damped Newton from a = 0.
// Throws SingularScore when the components are linearly dependent under the
// law and NonConvergence when x is outside the interior of the domain.
RateValue rate_I(const ScoreLaw& law, const Eigen::VectorXd& x);
double rate_I_value(const ScoreLaw& law, std::span<const double> x);

// x log(x / mu) - x + mu, with 0 log 0 = 0.
double rate_I_poisson_closed_form(double mu, double x);

// Hessian of I at x from the inverse Hessian of the log-MGF at a*.
Eigen::MatrixXd rate_hessian_exact(const ScoreLaw& law, const Eigen::VectorXd& x);

// Central differences of rate_I with step h.
Eigen::MatrixXd hessian_fd(const ScoreLaw& law, const Eigen::VectorXd& x, double h);

// Masses on a finite atom set shared by the measures being compared.
struct DiscreteMeasure {
  std::vector<double> masses;
  double total() const;
};

// sum rho_j log(rho_j / tau_j) - rho(E) + tau(E); +inf without absolute continuity.
double relative_entropy(const DiscreteMeasure& rho, const DiscreteMeasure& tau);

struct DualityCheck {
  double gap = 0.0;             // log-integral minus the best candidate value
  double log_integral = 0.0;    // integral of (e^f - 1) d tau
  double best_grid_value = 0.0; // best value among the supplied candidates only
};

// Compares the closed form of sup_rho <rho, f> - H(rho | tau) against the
// candidates and the tilted measure e^f tau. The returned gap can be a few
// ulps negative.
DualityCheck duality_gap(const DiscreteMeasure& tau, std::span<const double> f,
                         std::span<const DiscreteMeasure> candidates = {});

std::string score_law_to_json(const ScoreLaw& law);
ScoreLaw score_law_from_json(const std::string& text);

}  // namespace geoldp
