#include "geoldp/rates.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "geoldp/errors.hpp"
#include "geoldp/rng.hpp"

namespace geoldp {

namespace {

constexpr std::uint64_t kChunk = 1u << 15;
constexpr double kMaxExponent = 700.0;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::string pattern_string(std::uint32_t v, int m) {
  std::string s = "(";
  for (int i = 0; i < m; ++i) {
    if (i) s += ',';
    s += (v >> i & 1u) ? '1' : '0';
  }
  return s + ")";
}

}  // namespace

double ScoreLaw::total() const {
  double t = 0.0;
  for (const auto& [v, atom] : atoms) t += atom.mass;
  return t;
}

ScoreLaw make_score_law(int m, const std::map<std::uint32_t, double>& masses) {
  if (m < 1 || m > 31) throw DomainError("score law: m must be in [1, 31]");
  ScoreLaw law;
  law.m = m;
  for (const auto& [v, mass] : masses) {
    if (v == 0 || v >> m) throw DomainError("score law: atom pattern out of range");
    if (!(mass >= 0.0)) throw DomainError("score law: masses must be nonnegative");
    if (mass > 0.0) law.atoms[v] = {mass, 0.0};
  }
  return law;
}

ScoreLaw estimate_score_law(const ScoreFunction& score, std::uint64_t n_samples, std::uint64_t seed, int workers) {
  if (n_samples < 10000) throw DomainError("estimate_score_law: need at least 1e4 samples");
  if (score.m() > 31) throw DomainError("estimate_score_law: too many components");
  const int k = score.k();
  const int d = score.d();
  const int m = score.m();
  const double L = score.support_L();
  const int free_dims = d * (k - 1);
  const std::uint64_t chunks = (n_samples + kChunk - 1) / kChunk;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(chunks)));

  std::vector<std::map<std::uint32_t, std::uint64_t>> counts(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](int w) {
    try {
      std::vector<double> pts(k * d, 0.0);
      std::vector<double> h(m);
      for (std::uint64_t c = w; c < chunks; c += workers) {
        Rng rng(derive_seed(seed, c));
        const std::uint64_t end = std::min(n_samples, (c + 1) * kChunk);
        for (std::uint64_t s = c * kChunk; s < end; ++s) {
          for (int j = 0; j < free_dims; ++j) pts[d + j] = -L + 2.0 * L * rng.uniform();
          score.evaluate(pts, h);
          std::uint32_t v = 0;
          for (int i = 0; i < m; ++i) {
            if (h[i] == 1.0)
              v |= 1u << i;
            else if (h[i] != 0.0)
              throw DomainError("estimate_score_law: score is not indicator-valued");
          }
          if (v) ++counts[w][v];
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::map<std::uint32_t, std::uint64_t> merged;
  for (const auto& local : counts)
    for (const auto& [v, c] : local) merged[v] += c;

  ScoreLaw law;
  law.m = m;
  law.k = k;
  law.d = d;
  law.L = L;
  law.n_samples = n_samples;
  const double scale = std::pow(2.0 * L, free_dims) / factorial(k);
  const double N = static_cast<double>(n_samples);
  for (const auto& [v, c] : merged) {
    const double p = static_cast<double>(c) / N;
    law.atoms[v] = {p * scale, scale * std::sqrt(p * (1.0 - p) / N)};
  }
  return law;
}

std::vector<double> mu_vector(const ScoreLaw& law) {
  std::vector<double> mu(law.m, 0.0);
  for (const auto& [v, atom] : law.atoms)
    for (int i = 0; i < law.m; ++i)
      if (v >> i & 1u) mu[i] += atom.mass;
  return mu;
}

namespace {

double inner(const Eigen::VectorXd& a, std::uint32_t v, int m) {
  double s = 0.0;
  for (int i = 0; i < m; ++i)
    if (v >> i & 1u) s += a[i];
  return s;
}

double checked_exp(const Eigen::VectorXd& a, std::uint32_t v, int m) {
  const double e = inner(a, v, m);
  if (e > kMaxExponent) throw MgfOverflow("log-MGF overflow at atom " + pattern_string(v, m));
  return std::exp(e);
}

void check_size(const ScoreLaw& law, const Eigen::VectorXd& a) {
  if (a.size() != law.m) throw DomainError("vector length does not match the number of components");
  for (int i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i])) throw DomainError("non-finite argument");
}

}  // namespace

double log_mgf(const ScoreLaw& law, const Eigen::VectorXd& a) {
  check_size(law, a);
  double s = 0.0;
  for (const auto& [v, atom] : law.atoms) {
    const double e = inner(a, v, law.m);
    if (e > kMaxExponent) throw MgfOverflow("log-MGF overflow at atom " + pattern_string(v, law.m));
    s += atom.mass * std::expm1(e);
  }
  return s;
}

Eigen::VectorXd log_mgf_gradient(const ScoreLaw& law, const Eigen::VectorXd& a) {
  check_size(law, a);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(law.m);
  for (const auto& [v, atom] : law.atoms) {
    const double w = atom.mass * checked_exp(a, v, law.m);
    for (int i = 0; i < law.m; ++i)
      if (v >> i & 1u) g[i] += w;
  }
  return g;
}

Eigen::MatrixXd log_mgf_hessian(const ScoreLaw& law, const Eigen::VectorXd& a) {
  check_size(law, a);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(law.m, law.m);
  for (const auto& [v, atom] : law.atoms) {
    const double w = atom.mass * checked_exp(a, v, law.m);
    for (int i = 0; i < law.m; ++i) {
      if (!(v >> i & 1u)) continue;
      for (int j = 0; j < law.m; ++j)
        if (v >> j & 1u) H(i, j) += w;
    }
  }
  return H;
}

namespace {

// Positive definiteness of the Hessian at a = 0 up to relative round-off.
void require_nondegenerate(const ScoreLaw& law) {
  const Eigen::MatrixXd H0 = log_mgf_hessian(law, Eigen::VectorXd::Zero(law.m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H0);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * top)
    throw SingularScore("score components are linearly dependent under the law (singular dual Hessian)");
}

}  // namespace

RateValue rate_I(const ScoreLaw& law, const Eigen::VectorXd& x) {
  check_size(law, x);
  for (int i = 0; i < x.size(); ++i)
    if (x[i] < 0.0) throw DomainError("rate_I: x must lie in the closed positive orthant");
  require_nondegenerate(law);
  {
    // The supremum is only approached as a_i -> -infinity on this face.
    const Eigen::VectorXd mu = log_mgf_gradient(law, Eigen::VectorXd::Zero(law.m));
    for (int i = 0; i < x.size(); ++i)
      if (x[i] == 0.0 && mu[i] > 0.0)
        throw NonConvergence("rate_I: x has a zero coordinate where the mean is positive");
  }

  Eigen::VectorXd a = Eigen::VectorXd::Zero(law.m);
  auto objective = [&](const Eigen::VectorXd& b) { return b.dot(x) - log_mgf(law, b); };
  double value = objective(a);
  const double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd grad = x - log_mgf_gradient(law, a);
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-10 * scale) return {std::max(0.0, value), a, it};
    const Eigen::MatrixXd H = log_mgf_hessian(law, a);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) throw SingularScore("rate_I: dual Hessian is not positive definite");
    const Eigen::VectorXd step = llt.solve(grad);
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 60; ++half, t *= 0.5) {
      const Eigen::VectorXd trial = a + t * step;
      double trial_value;
      try {
        trial_value = objective(trial);
      } catch (const MgfOverflow&) {
        continue;
      }
      if (trial_value > value) {
        a = trial;
        value = trial_value;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // No representable increase left: accept if the gradient is at round-off level.
      if (grad.lpNorm<Eigen::Infinity>() <= 1e-8 * scale) return {std::max(0.0, value), a, it};
      break;
    }
  }
  throw NonConvergence("rate_I: Newton iteration did not converge; x is outside the interior of the domain");
}

double rate_I_value(const ScoreLaw& law, std::span<const double> x) {
  return rate_I(law, Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))).value;
}

double rate_I_poisson_closed_form(double mu, double x) {
  if (!(mu > 0.0)) throw DomainError("closed-form rate: mu must be positive");
  if (!(x >= 0.0)) throw DomainError("closed-form rate: x must be nonnegative");
  if (x == 0.0) return mu;
  return x * std::log(x / mu) - x + mu;
}

Eigen::MatrixXd rate_hessian_exact(const ScoreLaw& law, const Eigen::VectorXd& x) {
  const RateValue r = rate_I(law, x);
  return log_mgf_hessian(law, r.maximizer).inverse();
}

Eigen::MatrixXd hessian_fd(const ScoreLaw& law, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw DomainError("hessian_fd: step must be positive");
  const int m = law.m;
  auto I = [&](const Eigen::VectorXd& y) { return rate_I(law, y).value; };
  Eigen::MatrixXd H(m, m);
  const double center = I(x);
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[i] = h;
    H(i, i) = (I(x + e) - 2.0 * center + I(x - e)) / (h * h);
    for (int j = i + 1; j < m; ++j) {
      Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
      f[j] = h;
      const double v = (I(x + e + f) - I(x + e - f) - I(x - e + f) + I(x - e - f)) / (4.0 * h * h);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

double DiscreteMeasure::total() const {
  double t = 0.0;
  for (double w : masses) t += w;
  return t;
}

double relative_entropy(const DiscreteMeasure& rho, const DiscreteMeasure& tau) {
  if (rho.masses.size() != tau.masses.size()) throw DomainError("relative_entropy: atom sets differ");
  double s = 0.0;
  for (std::size_t j = 0; j < rho.masses.size(); ++j) {
    const double p = rho.masses[j], q = tau.masses[j];
    if (p < 0.0 || q < 0.0) throw DomainError("relative_entropy: negative mass");
    if (p == 0.0) {
      s += q;
      continue;
    }
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    s += p * std::log(p / q) - p + q;
  }
  return s;
}

DualityCheck duality_gap(const DiscreteMeasure& tau, std::span<const double> f,
                         std::span<const DiscreteMeasure> candidates) {
  if (f.size() != tau.masses.size()) throw DomainError("duality_gap: f has the wrong length");
  DualityCheck out;
  DiscreteMeasure tilted;
  tilted.masses.resize(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (!std::isfinite(f[j])) throw DomainError("duality_gap: f must be bounded");
    out.log_integral += std::expm1(f[j]) * tau.masses[j];
    tilted.masses[j] = std::exp(f[j]) * tau.masses[j];
  }
  auto value = [&](const DiscreteMeasure& rho) {
    const double h = relative_entropy(rho, tau);
    if (std::isinf(h)) return -std::numeric_limits<double>::infinity();
    double pairing = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) pairing += rho.masses[j] * f[j];
    return pairing - h;
  };
  out.best_grid_value = -std::numeric_limits<double>::infinity();
  for (const auto& rho : candidates) out.best_grid_value = std::max(out.best_grid_value, value(rho));
  const double best = std::max(out.best_grid_value, value(tilted));
  out.gap = out.log_integral - best;
  return out;
}

std::string score_law_to_json(const ScoreLaw& law) {
  nlohmann::json j;
  j["atoms"] = nlohmann::json::array();
  for (const auto& [v, atom] : law.atoms) {
    std::vector<int> bits(law.m);
    for (int i = 0; i < law.m; ++i) bits[i] = (v >> i) & 1u;
    j["atoms"].push_back({{"v", bits}, {"mass", atom.mass}, {"stderr", atom.stderr_}});
  }
  j["total"] = law.total();
  j["n_samples"] = law.n_samples;
  j["L"] = law.L;
  j["k"] = law.k;
  j["d"] = law.d;
  j["m"] = law.m;
  return j.dump(2);
}

ScoreLaw score_law_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ScoreLaw law;
    law.n_samples = j.at("n_samples").get<std::uint64_t>();
    law.L = j.at("L").get<double>();
    law.k = j.at("k").get<int>();
    law.d = j.at("d").get<int>();
    law.m = j.value("m", 0);
    for (const auto& atom : j.at("atoms")) {
      const auto bits = atom.at("v").get<std::vector<int>>();
      if (law.m == 0) law.m = static_cast<int>(bits.size());
      if (static_cast<int>(bits.size()) != law.m) throw DomainError("score law JSON: inconsistent pattern lengths");
      std::uint32_t v = 0;
      for (int i = 0; i < law.m; ++i)
        if (bits[i]) v |= 1u << i;
      law.atoms[v] = {atom.at("mass").get<double>(), atom.at("stderr").get<double>()};
    }
    if (law.m == 0) law.m = 1;
    return law;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("score law JSON: ") + e.what());
  }
}

}  // namespace geoldp
