#include "geoldp/functionals.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>

#include "geoldp/errors.hpp"
#include "geoldp/geometry.hpp"
#include "geoldp/spatial.hpp"
#include "scoring.hpp"

namespace geoldp {

ScoreFunction::ScoreFunction(std::string name, int k, int d, double support_L, std::vector<double> thresholds,
                             IsolationRule rule, Kernel kernel)
    : name_(std::move(name)),
      k_(k),
      d_(d),
      support_L_(support_L),
      thresholds_(std::move(thresholds)),
      rule_(rule),
      kernel_(std::move(kernel)) {
  if (k_ < 2) throw DomainError("score: k must be >= 2");
  if (d_ < 1) throw DomainError("score: d must be >= 1");
  if (thresholds_.empty()) throw DomainError("score: at least one component required");
  for (double t : thresholds_)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("score: thresholds must be finite and nonnegative");
  if (!(support_L_ > 0.0)) throw DomainError("score: support bound L must be positive");
}

double ScoreFunction::max_threshold() const { return *std::max_element(thresholds_.begin(), thresholds_.end()); }

void ScoreFunction::evaluate(std::span<const double> points, std::span<double> out) const {
  if (points.size() != static_cast<std::size_t>(k_ * d_)) throw DomainError("score: wrong number of coordinates");
  if (out.size() != thresholds_.size()) throw DomainError("score: output size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  if (diameter(points, d_) > support_L_) return;

  std::array<int, 8> order{};
  std::vector<int> order_dyn;
  int* ord = order.data();
  if (k_ > 8) {
    order_dyn.resize(k_);
    ord = order_dyn.data();
  }
  std::iota(ord, ord + k_, 0);
  std::sort(ord, ord + k_, [&](int a, int b) {
    for (int c = 0; c < d_; ++c) {
      if (points[a * d_ + c] != points[b * d_ + c]) return points[a * d_ + c] < points[b * d_ + c];
    }
    return a < b;
  });
  std::array<double, 64> buffer{};
  std::vector<double> buffer_dyn;
  double* canon = buffer.data();
  if (k_ * d_ > 64) {
    buffer_dyn.resize(k_ * d_);
    canon = buffer_dyn.data();
  }
  const double* origin = &points[ord[0] * d_];
  for (int m = 0; m < k_; ++m)
    for (int c = 0; c < d_; ++c) canon[m * d_ + c] = points[ord[m] * d_ + c] - origin[c];
  kernel_(std::span<const double>(canon, k_ * d_), out);
}

std::vector<double> ScoreFunction::operator()(std::span<const double> points) const {
  std::vector<double> out(thresholds_.size());
  evaluate(points, out);
  return out;
}

namespace {

int pair_slot(int i, int j, int k) {
  if (i > j) std::swap(i, j);
  // Pairs (i<j) in lexicographic order.
  return i * k - i * (i + 1) / 2 + (j - i - 1);
}

std::uint32_t relabel_edges(int k, std::uint32_t mask, const int* perm) {
  std::uint32_t out = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (mask >> pair_slot(i, j, k) & 1u) out |= 1u << pair_slot(perm[i], perm[j], k);
  return out;
}

std::uint32_t canonical_edges_slow(int k, std::uint32_t mask) {
  std::array<int, 6> perm{};
  std::iota(perm.begin(), perm.begin() + k, 0);
  std::uint32_t best = mask;
  do {
    best = std::min(best, relabel_edges(k, mask, perm.data()));
  } while (std::next_permutation(perm.begin(), perm.begin() + k));
  return best;
}

// Lookup table of canonical forms for every edge mask on k vertices.
const std::vector<std::uint32_t>& canonical_table(int k) {
  static std::array<std::vector<std::uint32_t>, 7> tables;
  static std::array<std::once_flag, 7> flags;
  std::call_once(flags[k], [k] {
    const int pairs = k * (k - 1) / 2;
    auto& table = tables[k];
    table.assign(std::size_t{1} << pairs, 0);
    for (std::uint32_t mask = 0; mask < table.size(); ++mask) {
      if (table[mask] != 0 || mask == 0) {
        if (mask == 0) table[mask] = 0;
        continue;
      }
      // Fill the whole orbit at once.
      std::array<int, 6> perm{};
      std::iota(perm.begin(), perm.begin() + k, 0);
      std::vector<std::uint32_t> orbit;
      std::uint32_t best = mask;
      do {
        const std::uint32_t image = relabel_edges(k, mask, perm.data());
        orbit.push_back(image);
        best = std::min(best, image);
      } while (std::next_permutation(perm.begin(), perm.begin() + k));
      for (std::uint32_t image : orbit) table[image] = best;
    }
  });
  return tables[k];
}

std::uint32_t canonical_edges(int k, std::uint32_t mask) {
  if (k <= 6) return canonical_table(k)[mask];
  return canonical_edges_slow(k, mask);
}

}  // namespace

bool is_connected(int k, std::uint32_t edge_bitmask) {
  std::uint32_t seen = 1u;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int i = 0; i < k; ++i) {
      if (!(seen >> i & 1u)) continue;
      for (int j = 0; j < k; ++j) {
        if (i == j || (seen >> j & 1u)) continue;
        if (edge_bitmask >> pair_slot(i, j, k) & 1u) {
          seen |= 1u << j;
          grew = true;
        }
      }
    }
  }
  return seen == (1u << k) - 1u;
}

CanonicalGraph canonicalize_graph(int k, std::span<const std::pair<int, int>> edges) {
  if (k < 1 || k > 6) throw DomainError("canonicalize_graph: k must be in [1, 6]");
  std::uint32_t mask = 0;
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= k || j >= k || i == j) throw DomainError("canonicalize_graph: invalid edge");
    mask |= 1u << pair_slot(i, j, k);
  }
  return {k, canonical_edges(k, mask)};
}

ScoreFunction score_rgg_component(int k, std::span<const GraphTarget> targets, int d) {
  if (k < 2 || k > 6) throw DomainError("rgg component score: k must be in [2, 6]");
  if (targets.empty()) throw DomainError("rgg component score: no targets");
  std::vector<double> thresholds;
  std::vector<std::uint32_t> canon;
  for (const GraphTarget& g : targets) {
    const CanonicalGraph c = canonicalize_graph(k, g.edges);
    if (!is_connected(k, c.edge_bitmask)) throw DomainError("rgg component score: target graph must be connected");
    canon.push_back(c.edge_bitmask);
    thresholds.push_back(g.t);
  }
  const double L = (k - 1) * *std::max_element(thresholds.begin(), thresholds.end());
  auto kernel = [k, d, canon, thresholds](std::span<const double> pts, std::span<double> out) {
    std::array<double, 15> dist{};
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        dist[pair_slot(i, j, k)] = std::sqrt(squared_distance(pts.subspan(i * d, d), pts.subspan(j * d, d)));
    const int pairs = k * (k - 1) / 2;
    for (std::size_t c = 0; c < canon.size(); ++c) {
      std::uint32_t mask = 0;
      for (int p = 0; p < pairs; ++p)
        if (dist[p] <= thresholds[c]) mask |= 1u << p;
      out[c] = canonical_edges(k, mask) == canon[c] ? 1.0 : 0.0;
    }
  };
  return ScoreFunction(k == 2 ? "edge" : "rgg-component", k, d, L, thresholds, IsolationRule::distance, kernel);
}

ScoreFunction score_rgg_component(int k, const std::vector<std::pair<int, int>>& target, double t, int d) {
  const GraphTarget g{target, t};
  return score_rgg_component(k, std::span<const GraphTarget>(&g, 1), d);
}

ScoreFunction score_edge(std::span<const double> thresholds, int d) {
  if (thresholds.empty()) throw DomainError("edge score: no thresholds");
  std::vector<GraphTarget> targets;
  for (double t : thresholds) targets.push_back({{{0, 1}}, t});
  return score_rgg_component(2, targets, d);
}

namespace {

// Complexes on p <= 4 vertices: bit `s` set when the vertex subset with
// bitmask s (|s| >= 2) is a simplex.
std::uint32_t relabel_complex(int p, std::uint32_t cmask, const int* perm) {
  std::uint32_t out = 0;
  for (std::uint32_t s = 0; s < (1u << p); ++s) {
    if (!(cmask >> s & 1u)) continue;
    std::uint32_t image = 0;
    for (int v = 0; v < p; ++v)
      if (s >> v & 1u) image |= 1u << perm[v];
    out |= 1u << image;
  }
  return out;
}

std::uint32_t canonical_complex(int p, std::uint32_t cmask) {
  std::array<int, 4> perm{};
  std::iota(perm.begin(), perm.begin() + p, 0);
  std::uint32_t best = cmask;
  do {
    best = std::min(best, relabel_complex(p, cmask, perm.data()));
  } while (std::next_permutation(perm.begin(), perm.begin() + p));
  return best;
}

std::uint32_t close_under_faces(int p, std::uint32_t cmask) {
  std::uint32_t out = cmask;
  for (std::uint32_t s = 0; s < (1u << p); ++s) {
    if (!(cmask >> s & 1u)) continue;
    for (std::uint32_t sub = (s - 1) & s; sub != 0; sub = (sub - 1) & s)
      if (std::popcount(sub) >= 2) out |= 1u << sub;
  }
  return out;
}

std::uint32_t complex_edges(int p, std::uint32_t cmask) {
  std::uint32_t edges = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (cmask >> ((1u << i) | (1u << j)) & 1u) edges |= 1u << pair_slot(i, j, p);
  return edges;
}

}  // namespace

ScoreFunction score_cech_component(int points_per_tuple, std::span<const ComplexTarget> targets) {
  const int p = points_per_tuple;
  if (p < 2 || p > 4) throw DomainError("cech component score: tuples of 2 to 4 planar points supported");
  if (targets.empty()) throw DomainError("cech component score: no targets");
  std::vector<double> thresholds;
  std::vector<std::uint32_t> canon;
  for (const ComplexTarget& target : targets) {
    std::uint32_t cmask = 0;
    for (const auto& simplex : target.simplices) {
      std::uint32_t s = 0;
      for (int v : simplex) {
        if (v < 0 || v >= p) throw DomainError("cech component score: vertex out of range");
        s |= 1u << v;
      }
      if (std::popcount(s) >= 2) cmask |= 1u << s;
    }
    cmask = close_under_faces(p, cmask);
    if (!is_connected(p, complex_edges(p, cmask)))
      throw DomainError("cech component score: target complex must be connected");
    canon.push_back(canonical_complex(p, cmask));
    thresholds.push_back(target.t);
  }
  const double L = (p - 1) * *std::max_element(thresholds.begin(), thresholds.end());
  auto kernel = [p, canon, thresholds](std::span<const double> pts, std::span<double> out) {
    std::array<Vec2, 4> v{};
    for (int i = 0; i < p; ++i) v[i] = {pts[2 * i], pts[2 * i + 1]};
    std::array<double, 16> fill{};
    for (std::uint32_t s = 0; s < (1u << p); ++s) {
      if (std::popcount(s) < 2) continue;
      std::array<Vec2, 4> members{};
      int count = 0;
      for (int i = 0; i < p; ++i)
        if (s >> i & 1u) members[count++] = v[i];
      fill[s] = enclosing_radius(std::span<const Vec2>(members.data(), count));
    }
    for (std::size_t c = 0; c < canon.size(); ++c) {
      std::uint32_t cmask = 0;
      for (std::uint32_t s = 0; s < (1u << p); ++s)
        if (std::popcount(s) >= 2 && fill[s] <= 0.5 * thresholds[c]) cmask |= 1u << s;
      out[c] = canonical_complex(p, cmask) == canon[c] ? 1.0 : 0.0;
    }
  };
  return ScoreFunction("cech-component", p, 2, L, thresholds, IsolationRule::distance, kernel);
}

ScoreFunction score_persistent_triple(std::span<const PersistenceWindow> windows) {
  if (windows.empty()) throw DomainError("persistent triple score: no windows");
  std::vector<double> thresholds;
  std::vector<double> births;
  for (const PersistenceWindow& w : windows) {
    if (!(w.s >= 0.0) || w.s > w.t) throw DomainError("persistent triple score: need 0 <= s <= t");
    births.push_back(w.s);
    thresholds.push_back(w.t);
  }
  const double L = *std::max_element(thresholds.begin(), thresholds.end());
  auto kernel = [births, thresholds](std::span<const double> pts, std::span<double> out) {
    const Vec2 a{pts[0], pts[1]}, b{pts[2], pts[3]}, c{pts[4], pts[5]};
    for (std::size_t i = 0; i < births.size(); ++i)
      out[i] = cech_one_cycle(a, b, c, births[i]) * cech_one_cycle(a, b, c, thresholds[i]);
  };
  return ScoreFunction("persistent-triple", 3, 2, L, thresholds, IsolationRule::distance, kernel);
}

ScoreFunction score_persistent_triple(double s, double t) {
  const PersistenceWindow w{s, t};
  return score_persistent_triple(std::span<const PersistenceWindow>(&w, 1));
}

ScoreFunction score_morse(std::span<const double> thresholds) {
  if (thresholds.empty()) throw DomainError("morse score: no thresholds");
  std::vector<double> ts(thresholds.begin(), thresholds.end());
  const double tmax = *std::max_element(ts.begin(), ts.end());
  if (!(tmax > 0.0)) throw DomainError("morse score: need a positive threshold");
  auto kernel = [ts](std::span<const double> pts, std::span<double> out) {
    const Vec2 a{pts[0], pts[1]}, b{pts[2], pts[3]}, c{pts[4], pts[5]};
    if (std::abs(twice_signed_area(a, b, c)) <= kGeomEps || !circumcenter_in_open_hull(a, b, c)) return;
    const double radius = circumcircle(a, b, c).radius;
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = radius <= ts[i] ? 1.0 : 0.0;
  };
  return ScoreFunction("morse", 3, 2, 2.0 * tmax, ts, IsolationRule::empty_circumdisk, kernel);
}

ScoreFunction score_indicator(int k, int d, double L, double t) {
  auto kernel = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  return ScoreFunction("indicator", k, d, L, {t}, IsolationRule::distance, kernel);
}

double EmpiricalMeasure::total_mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace detail {

void scan_scored_tuples(const PointCloud& cloud, const ScoreFunction& score, const ScoredTupleVisitor& visit,
                        const ScanOptions& options) {
  if (cloud.d != score.d()) throw DomainError("score dimension does not match the cloud");
  if (score.isolation_rule() == IsolationRule::empty_circumdisk && cloud.d != 2)
    throw DomainError("empty-circumdisk isolation needs planar points");
  const double r = cloud.regime.r;
  if (!(r > 0.0)) throw DomainError("cloud regime has no radius");
  const int k = score.k();
  const int d = cloud.d;
  const int m = score.m();
  const double reach = std::max(score.support_L(), score.max_threshold() + std::max(0.0, options.isolation_offset));
  const GridIndex grid(cloud, recommended_cell_size(cloud, r * reach));
  std::vector<double> centered(k * d);
  std::vector<double> h(m);
  std::vector<double> g(m);
  std::vector<int> iso_cache(m);
  const auto& ts = score.thresholds();

  for_each_local_tuple(cloud, grid, k, r * score.support_L(), [&](std::span<const std::uint32_t> members) {
    const auto anchor = cloud.point(members[0]);
    for (int q = 0; q < k; ++q) {
      const auto p = cloud.point(members[q]);
      for (int c = 0; c < d; ++c) centered[q * d + c] = (p[c] - anchor[c]) / r;
    }
    score.evaluate(centered, h);
    if (std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; })) return;
    if (score.isolation_rule() == IsolationRule::distance) {
      std::fill(iso_cache.begin(), iso_cache.end(), -1);
      for (int i = 0; i < m; ++i) {
        if (h[i] == 0.0) {
          g[i] = 0.0;
          continue;
        }
        if (iso_cache[i] < 0) {
          const int iso = isolation(members, cloud, grid, std::max(0.0, ts[i] + options.isolation_offset));
          for (int j = i; j < m; ++j)
            if (ts[j] == ts[i]) iso_cache[j] = iso;
        }
        g[i] = h[i] * iso_cache[i];
      }
    } else {
      const int empty = empty_open_circumdisk(members, cloud, grid, options.isolation_offset * r) ? 1 : 0;
      for (int i = 0; i < m; ++i) g[i] = h[i] * empty;
    }
    visit(members, g);
  });
}

bool empty_open_circumdisk(std::span<const std::uint32_t> members, const PointCloud& cloud, const GridIndex& grid,
                           double radius_offset) {
  const Vec2 a = cloud.vec2(members[0]), b = cloud.vec2(members[1]), c = cloud.vec2(members[2]);
  if (std::abs(twice_signed_area(a, b, c)) <= kGeomEps) return false;
  Circumcircle cc = circumcircle(a, b, c);
  cc.radius = std::max(0.0, cc.radius + radius_offset);
  const double center[2] = {cc.center.x, cc.center.y};
  bool empty = true;
  grid.for_each_candidate(std::span<const double>(center, 2), cc.radius, [&](std::uint32_t z) {
    if (!empty || z == members[0] || z == members[1] || z == members[2]) return;
    if (distance(cloud.vec2(z), cc.center) < cc.radius) empty = false;
  });
  return empty;
}

}  // namespace detail

StatisticVector compute_T(const PointCloud& cloud, const ScoreFunction& score, const ScanOptions& options) {
  StatisticVector stat;
  stat.values.assign(score.m(), 0.0);
  stat.rho = cloud.regime.rho;
  detail::scan_scored_tuples(cloud, score, [&](std::span<const std::uint32_t>, std::span<const double> g) {
    for (std::size_t i = 0; i < g.size(); ++i) stat.values[i] += g[i];
  }, options);
  return stat;
}

EmpiricalMeasure compute_U(const PointCloud& cloud, const ScoreFunction& score) {
  EmpiricalMeasure mu;
  mu.dim = score.m();
  const double w = 1.0 / cloud.regime.rho;
  detail::scan_scored_tuples(cloud, score, [&](std::span<const std::uint32_t>, std::span<const double> g) {
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) return;
    mu.locations.insert(mu.locations.end(), g.begin(), g.end());
    mu.weights.push_back(w);
  });
  return mu;
}

EmpiricalMeasure compute_xi(const PointCloud& cloud, double t, double L, int k) {
  EmpiricalMeasure mu;
  mu.dim = k * cloud.d;
  const double r = cloud.regime.r;
  const double w = 1.0 / cloud.regime.rho;
  const ScoreFunction ones = score_indicator(k, cloud.d, L, t);
  detail::scan_scored_tuples(cloud, ones, [&](std::span<const std::uint32_t> members, std::span<const double> g) {
    if (g[0] == 0.0) return;
    const auto anchor = cloud.point(members[0]);
    for (const std::uint32_t q : members) {
      const auto p = cloud.point(q);
      for (int c = 0; c < cloud.d; ++c) mu.locations.push_back((p[c] - anchor[c]) / r);
    }
    mu.weights.push_back(w);
  });
  return mu;
}

StatisticVector compute_morse(const PointCloud& cloud, std::span<const double> thresholds) {
  return compute_T(cloud, score_morse(thresholds));
}

void write_measure_csv(std::ostream& out, const EmpiricalMeasure& measure) {
  for (int c = 0; c < measure.dim; ++c) out << 'l' << c << ',';
  out << "weight\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < measure.size(); ++i) {
    for (double v : measure.location(i)) out << v << ',';
    out << measure.weights[i] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace geoldp
