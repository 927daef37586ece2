#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "geoldp/geometry.hpp"

namespace geoldp {

inline constexpr double kDefaultSparsityGuard = 0.05;

// Sparse-regime parameterization: rho = n^k r^(d(k-1)), sparsity = n r^d.
struct RegimeParams {
  int d = 2;
  int k = 2;
  double n = 0.0;
  double rho = 0.0;
  double r = 0.0;
  double sparsity = 0.0;
};

// Solves r from rho. Throws DomainError on invalid arguments and
// SparsityViolation when n * r^d > eps_sparse.
RegimeParams make_regime(int d, int k, double n, double rho, double eps_sparse = kDefaultSparsityGuard);

// Inverse map: rho = n^k r^(d(k-1)).
double rho_from_radius(int d, int k, double n, double r);

enum class ProcessKind { poisson, binomial };

// Points in [0,1]^d, stored row-major.
struct PointCloud {
  int d = 2;
  std::vector<double> coords;
  RegimeParams regime;
  std::uint64_t seed = 0;
  ProcessKind kind = ProcessKind::poisson;

  std::size_t size() const { return d > 0 ? coords.size() / static_cast<std::size_t>(d) : 0; }
  bool empty() const { return coords.empty(); }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * d, static_cast<std::size_t>(d)}; }
  Vec2 vec2(std::size_t i) const { return {coords[i * d], coords[i * d + 1]}; }
  std::vector<Vec2> planar_points() const;
};

// Builds a cloud from explicit planar points (e.g. a fixture or a CSV file).
PointCloud cloud_from_points(std::span<const Vec2> points, const RegimeParams& regime);

PointCloud sample_poisson(const RegimeParams& regime, std::uint64_t seed);

// Exactly n i.i.d. uniform points; throws DomainError if n is not a
// positive integer.
PointCloud sample_binomial(const RegimeParams& regime, std::uint64_t seed);

PointCloud sample(ProcessKind kind, const RegimeParams& regime, std::uint64_t seed);

// CSV with header "x0,...,x{d-1}" and one point per row.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_csv(std::istream& in, const RegimeParams& regime);

}  // namespace geoldp
