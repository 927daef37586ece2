#include "geoldp/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "geoldp/errors.hpp"
#include "geoldp/geometry.hpp"
#include "geoldp/spatial.hpp"

namespace geoldp::oracle {

namespace {

bool within(const PointCloud& cloud, std::uint32_t a, std::uint32_t b, double bound) {
  return std::sqrt(squared_distance(cloud.point(a), cloud.point(b))) <= bound;
}

void subsets(const PointCloud& cloud, int k, double bound, std::vector<std::uint32_t>& chosen, std::uint32_t from,
             std::vector<std::vector<std::uint32_t>>& out) {
  if (static_cast<int>(chosen.size()) == k) {
    out.push_back(chosen);
    return;
  }
  for (std::uint32_t i = from; i < cloud.size(); ++i) {
    bool ok = true;
    for (std::uint32_t c : chosen) ok = ok && within(cloud, c, i, bound);
    if (!ok) continue;
    chosen.push_back(i);
    subsets(cloud, k, bound, chosen, i + 1, out);
    chosen.pop_back();
  }
}

}  // namespace

std::vector<std::vector<std::uint32_t>> all_local_tuples(const PointCloud& cloud, int k, double L) {
  if (k < 2) throw DomainError("k must be >= 2");
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> chosen;
  subsets(cloud, k, cloud.regime.r * L, chosen, 0, out);
  return out;
}

bool isolated(const PointCloud& cloud, std::span<const std::uint32_t> members, double t) {
  const double radius = cloud.regime.r * t;
  for (std::uint32_t z = 0; z < cloud.size(); ++z) {
    if (std::find(members.begin(), members.end(), z) != members.end()) continue;
    for (std::uint32_t y : members)
      if (std::sqrt(squared_distance(cloud.point(y), cloud.point(z))) < radius) return false;
  }
  return true;
}

bool empty_circumdisk(const PointCloud& cloud, std::span<const std::uint32_t> members) {
  const Vec2 a = cloud.vec2(members[0]), b = cloud.vec2(members[1]), c = cloud.vec2(members[2]);
  if (std::abs(twice_signed_area(a, b, c)) <= kGeomEps) return false;
  const Circumcircle cc = circumcircle(a, b, c);
  for (std::uint32_t z = 0; z < cloud.size(); ++z) {
    if (z == members[0] || z == members[1] || z == members[2]) continue;
    if (distance(cloud.vec2(z), cc.center) < cc.radius) return false;
  }
  return true;
}

StatisticVector brute_force_T(const PointCloud& cloud, const ScoreFunction& score) {
  const int k = score.k();
  const int d = cloud.d;
  const double r = cloud.regime.r;
  StatisticVector stat;
  stat.values.assign(score.m(), 0.0);
  stat.rho = cloud.regime.rho;
  std::vector<double> local(k * d);
  std::vector<double> h(score.m());
  for (auto tuple : all_local_tuples(cloud, k, score.support_L())) {
    std::sort(tuple.begin(), tuple.end(), [&](std::uint32_t a, std::uint32_t b) { return lex_less(cloud, a, b); });
    const auto anchor = cloud.point(tuple[0]);
    for (int q = 0; q < k; ++q)
      for (int c = 0; c < d; ++c) local[q * d + c] = (cloud.point(tuple[q])[c] - anchor[c]) / r;
    score.evaluate(local, h);
    for (int i = 0; i < score.m(); ++i) {
      if (h[i] == 0.0) continue;
      const bool keep = score.isolation_rule() == IsolationRule::distance ? isolated(cloud, tuple, score.thresholds()[i])
                                                                           : empty_circumdisk(cloud, tuple);
      if (keep) stat.values[i] += h[i];
    }
  }
  return stat;
}

std::size_t brute_force_xi_count(const PointCloud& cloud, double t, double L, int k) {
  std::size_t count = 0;
  for (const auto& tuple : all_local_tuples(cloud, k, L)) count += isolated(cloud, tuple, t);
  return count;
}

}  // namespace geoldp::oracle
