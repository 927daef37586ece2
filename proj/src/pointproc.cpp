#include "geoldp/pointproc.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "geoldp/errors.hpp"
#include "geoldp/rng.hpp"

namespace geoldp {

RegimeParams make_regime(int d, int k, double n, double rho, double eps_sparse) {
  if (d < 2) throw DomainError("make_regime: d must be >= 2");
  if (k < 2) throw DomainError("make_regime: k must be >= 2");
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("make_regime: n must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("make_regime: rho must be positive");
  const double exponent = 1.0 / (static_cast<double>(d) * (k - 1));
  RegimeParams p;
  p.d = d;
  p.k = k;
  p.n = n;
  p.rho = rho;
  p.r = std::exp(exponent * (std::log(rho) - k * std::log(n)));
  p.sparsity = n * std::pow(p.r, d);
  if (p.sparsity > eps_sparse) throw SparsityViolation(p.sparsity, eps_sparse);
  return p;
}

double rho_from_radius(int d, int k, double n, double r) {
  return std::pow(n, k) * std::pow(r, static_cast<double>(d) * (k - 1));
}

std::vector<Vec2> PointCloud::planar_points() const {
  if (d != 2) throw DomainError("planar_points: cloud is not two-dimensional");
  std::vector<Vec2> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vec2(i);
  return out;
}

PointCloud cloud_from_points(std::span<const Vec2> points, const RegimeParams& regime) {
  PointCloud cloud;
  cloud.d = 2;
  cloud.regime = regime;
  cloud.coords.reserve(points.size() * 2);
  for (const Vec2& p : points) {
    cloud.coords.push_back(p.x);
    cloud.coords.push_back(p.y);
  }
  return cloud;
}

namespace {

void fill_uniform(PointCloud& cloud, std::size_t count, Rng& rng) {
  cloud.coords.resize(count * cloud.d);
  for (double& c : cloud.coords) c = rng.uniform();
}

}  // namespace

PointCloud sample_poisson(const RegimeParams& regime, std::uint64_t seed) {
  PointCloud cloud;
  cloud.d = regime.d;
  cloud.regime = regime;
  cloud.seed = seed;
  cloud.kind = ProcessKind::poisson;
  Rng rng(seed);
  std::size_t count = 0;
  if (regime.n > 0.0) {
    std::poisson_distribution<long long> law(regime.n);
    count = static_cast<std::size_t>(law(rng));
  }
  fill_uniform(cloud, count, rng);
  return cloud;
}

PointCloud sample_binomial(const RegimeParams& regime, std::uint64_t seed) {
  if (!(regime.n > 0.0) || regime.n != std::floor(regime.n))
    throw DomainError("sample_binomial: n must be a positive integer");
  PointCloud cloud;
  cloud.d = regime.d;
  cloud.regime = regime;
  cloud.seed = seed;
  cloud.kind = ProcessKind::binomial;
  Rng rng(seed);
  fill_uniform(cloud, static_cast<std::size_t>(regime.n), rng);
  return cloud;
}

PointCloud sample(ProcessKind kind, const RegimeParams& regime, std::uint64_t seed) {
  return kind == ProcessKind::poisson ? sample_poisson(regime, seed) : sample_binomial(regime, seed);
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  for (int c = 0; c < cloud.d; ++c) out << (c ? "," : "") << 'x' << c;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < cloud.d; ++c) out << (c ? "," : "") << cloud.coords[i * cloud.d + c];
    out << '\n';
  }
  out.precision(old_precision);
}

PointCloud read_cloud_csv(std::istream& in, const RegimeParams& regime) {
  PointCloud cloud;
  cloud.regime = regime;
  std::string line;
  if (!std::getline(in, line)) {
    cloud.d = regime.d;
    return cloud;
  }
  int cols = 1;
  for (char ch : line) cols += ch == ',';
  cloud.d = cols;
  if (cols < 2) throw DomainError("read_cloud_csv: need at least two columns");
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream row(line);
    std::string cell;
    int seen = 0;
    while (std::getline(row, cell, ',')) {
      cloud.coords.push_back(std::stod(cell));
      ++seen;
    }
    if (seen != cols) throw DomainError("read_cloud_csv: ragged row '" + line + "'");
  }
  return cloud;
}

}  // namespace geoldp
