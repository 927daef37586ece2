#include "geoldp/persistence2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "geoldp/errors.hpp"
#include "geoldp/rng.hpp"
#include "geoldp/spatial.hpp"

namespace geoldp {

std::size_t Triangulation::hull_edge_count() const {
  std::size_t count = 0;
  for (const auto& nb : neighbors)
    for (int t : nb) count += t < 0;
  return count;
}

namespace {

constexpr int kInf = -1;

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nb;
  bool alive = true;
};

class Builder {
 public:
  explicit Builder(std::span<const Vec2> pts, std::uint64_t seed) : pts_(pts), rng_(seed) {}

  Triangulation run();

 private:
  int new_tri(std::array<int, 3> v) {
    int id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      tris_[id] = Tri{v, {-1, -1, -1}, true};
    } else {
      id = static_cast<int>(tris_.size());
      tris_.push_back(Tri{v, {-1, -1, -1}, true});
    }
    return id;
  }

  static bool is_ghost(const Tri& t) { return t.v[0] == kInf || t.v[1] == kInf || t.v[2] == kInf; }

  bool in_conflict(const Tri& t, Vec2 p) const {
    if (!is_ghost(t)) return incircle_sign(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p) > 0;
    int j = 0;
    while (t.v[j] != kInf) ++j;
    const Vec2 x = pts_[t.v[(j + 1) % 3]];
    const Vec2 y = pts_[t.v[(j + 2) % 3]];
    const int o = orient2d_sign(x, y, p);
    if (o > 0) return true;
    if (o < 0) return false;
    return dot(p - x, y - x) > 0.0 && dot(p - y, x - y) > 0.0;
  }

  int locate(Vec2 p);
  void insert(int vertex, int start);
  bool init_triangle(const std::vector<int>& order, std::size_t& used, std::vector<int>& deferred);

  std::span<const Vec2> pts_;
  Rng rng_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  int last_ = -1;

  std::vector<int> cavity_;
  std::vector<int> stamp_;
  int stamp_id_ = 0;
  std::vector<int> start_of_;  // indexed by vertex + 1
};

int Builder::locate(Vec2 p) {
  int cur = last_;
  const std::size_t limit = 4 * tris_.size() + 16;
  for (std::size_t step = 0; step < limit; ++step) {
    const Tri& t = tris_[cur];
    if (is_ghost(t)) return cur;
    const int first = static_cast<int>(rng_() % 3);
    int next = -1;
    for (int e = 0; e < 3 && next < 0; ++e) {
      const int i = (first + e) % 3;
      const Vec2 a = pts_[t.v[(i + 1) % 3]];
      const Vec2 b = pts_[t.v[(i + 2) % 3]];
      if (orient2d_sign(a, b, p) < 0) next = t.nb[i];
    }
    if (next < 0) return cur;
    cur = next;
  }
  // Fallback scan; the walk terminates on Delaunay meshes, so this is a guard.
  for (std::size_t id = 0; id < tris_.size(); ++id)
    if (tris_[id].alive && in_conflict(tris_[id], p)) return static_cast<int>(id);
  throw DomainError("delaunay: point location failed");
}

void Builder::insert(int vertex, int start) {
  const Vec2 p = pts_[vertex];
  ++stamp_id_;
  if (stamp_.size() < tris_.size()) stamp_.resize(tris_.size() * 2, 0);
  cavity_.assign(1, start);
  stamp_[start] = stamp_id_;
  struct Boundary {
    int u, w, outside;
  };
  std::vector<Boundary> boundary;
  for (std::size_t q = 0; q < cavity_.size(); ++q) {
    const int id = cavity_[q];
    for (int i = 0; i < 3; ++i) {
      const int nb = tris_[id].nb[i];
      if (stamp_[nb] == stamp_id_) continue;
      if (in_conflict(tris_[nb], p)) {
        stamp_[nb] = stamp_id_;
        cavity_.push_back(nb);
      } else {
        boundary.push_back({tris_[id].v[(i + 1) % 3], tris_[id].v[(i + 2) % 3], nb});
      }
    }
  }
  for (int id : cavity_) {
    tris_[id].alive = false;
    free_.push_back(id);
  }
  std::vector<int> created;
  created.reserve(boundary.size());
  for (const Boundary& b : boundary) {
    const int id = new_tri({b.u, b.w, vertex});
    if (static_cast<std::size_t>(id) >= stamp_.size()) stamp_.resize(tris_.size() * 2, 0);
    stamp_[id] = 0;
    Tri& out = tris_[b.outside];
    for (int j = 0; j < 3; ++j)
      if (out.v[j] != b.u && out.v[j] != b.w) out.nb[j] = id;
    tris_[id].nb[2] = b.outside;
    start_of_[b.u + 1] = id;
    created.push_back(id);
  }
  for (int id : created) {
    const int w = tris_[id].v[1];
    const int next = start_of_[w + 1];
    tris_[id].nb[0] = next;
    tris_[next].nb[1] = id;
    if (!is_ghost(tris_[id])) last_ = id;
  }
}

bool Builder::init_triangle(const std::vector<int>& order, std::size_t& used, std::vector<int>& deferred) {
  const int a = order[0];
  std::size_t i = 1;
  while (i < order.size() && pts_[order[i]] == pts_[a]) deferred.push_back(order[i++]);
  if (i == order.size()) return false;
  const int b = order[i++];
  while (i < order.size() && orient2d_sign(pts_[a], pts_[b], pts_[order[i]]) == 0) deferred.push_back(order[i++]);
  if (i == order.size()) return false;
  int c = order[i++];
  used = i;
  int p = a, q = b;
  if (orient2d_sign(pts_[a], pts_[b], pts_[c]) < 0) std::swap(p, q);
  const int t0 = new_tri({p, q, c});
  const int g0 = new_tri({q, p, kInf});  // across edge p-q
  const int g1 = new_tri({c, q, kInf});  // across edge q-c
  const int g2 = new_tri({p, c, kInf});  // across edge c-p
  tris_[t0].nb = {g1, g2, g0};
  // Ghost (x, y, INF): nb[2] is the finite neighbour, nb[0] faces (y, INF), nb[1] faces (INF, x).
  tris_[g0].nb = {g2, g1, t0};
  tris_[g1].nb = {g0, g2, t0};
  tris_[g2].nb = {g1, g0, t0};
  last_ = t0;
  return true;
}

Triangulation collinear_result(std::span<const Vec2> pts, Triangulation out) {
  std::vector<int> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
    if (pts[a].y != pts[b].y) return pts[a].y < pts[b].y;
    return a < b;
  });
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (pts[idx[i]] == pts[idx[i - 1]]) {
      idx[i] = idx[i - 1];  // duplicates collapse onto the first copy
      continue;
    }
    int a = idx[i - 1], b = idx[i];
    out.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

Triangulation Builder::run() {
  Triangulation out;
  out.vertices.assign(pts_.begin(), pts_.end());
  const std::size_t n = pts_.size();
  for (const Vec2& p : pts_)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("delaunay: non-finite coordinate");
  if (n < 2) return out;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  {
    // Snake order over a coarse grid keeps walks short.
    double xlo = pts_[0].x, xhi = xlo, ylo = pts_[0].y, yhi = ylo;
    for (const Vec2& p : pts_) {
      xlo = std::min(xlo, p.x), xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y), yhi = std::max(yhi, p.y);
    }
    const long side = std::max(1L, static_cast<long>(std::sqrt(n / 4.0)));
    const double wx = std::max(xhi - xlo, 1e-300), wy = std::max(yhi - ylo, 1e-300);
    std::vector<long> key(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long cx = std::min(side - 1, static_cast<long>((pts_[i].x - xlo) / wx * side));
      long cy = std::min(side - 1, static_cast<long>((pts_[i].y - ylo) / wy * side));
      if (cx % 2 == 1) cy = side - 1 - cy;
      key[i] = cx * side + cy;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  }

  std::size_t used = 0;
  std::vector<int> deferred;
  if (!init_triangle(order, used, deferred)) return collinear_result(pts_, std::move(out));
  start_of_.assign(n + 1, -1);
  stamp_.assign(64, 0);

  auto insert_point = [&](int v) {
    const Vec2 p = pts_[v];
    const int start = locate(p);
    const Tri& t = tris_[start];
    for (int u : t.v)
      if (u != kInf && pts_[u] == p) return;  // duplicate
    if (!in_conflict(t, p)) {
      // The walk can stop on a ghost whose edge is collinear with p but does
      // not contain it; search the neighbouring ghosts.
      for (std::size_t id = 0; id < tris_.size(); ++id)
        if (tris_[id].alive && in_conflict(tris_[id], p)) {
          insert(v, static_cast<int>(id));
          return;
        }
      return;
    }
    insert(v, start);
  };
  for (int v : deferred) insert_point(v);
  for (std::size_t i = used; i < n; ++i) insert_point(order[i]);

  std::vector<int> remap(tris_.size(), -1);
  for (std::size_t id = 0; id < tris_.size(); ++id) {
    if (!tris_[id].alive || is_ghost(tris_[id])) continue;
    remap[id] = static_cast<int>(out.triangles.size());
    out.triangles.push_back(tris_[id].v);
  }
  out.neighbors.resize(out.triangles.size());
  for (std::size_t id = 0; id < tris_.size(); ++id) {
    if (remap[id] < 0) continue;
    for (int i = 0; i < 3; ++i) out.neighbors[remap[id]][i] = remap[tris_[id].nb[i]];
  }
  for (const auto& t : out.triangles)
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      if (a < b) out.edges.push_back({a, b});
    }
  // Hull edges are only seen from one side.
  for (std::size_t id = 0; id < out.triangles.size(); ++id)
    for (int i = 0; i < 3; ++i) {
      if (out.neighbors[id][i] >= 0) continue;
      const int a = out.triangles[id][(i + 1) % 3], b = out.triangles[id][(i + 2) % 3];
      if (a > b) out.edges.push_back({b, a});
    }
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

}  // namespace

Triangulation delaunay(std::span<const Vec2> points, std::uint64_t seed) { return Builder(points, seed).run(); }

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

bool filtration_less(const Simplex& a, const Simplex& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.dim != b.dim) return a.dim < b.dim;
  return a.vertices < b.vertices;
}

}  // namespace

AlphaFiltration alpha_filtration(const Triangulation& tri, double scale) {
  if (!(scale > 0.0)) throw DomainError("alpha_filtration: scale must be positive");
  AlphaFiltration filt;
  filt.vertex_count = tri.vertices.size();
  filt.scale = scale;
  const auto& P = tri.vertices;
  for (std::size_t v = 0; v < P.size(); ++v) filt.simplices.push_back({0, {static_cast<int>(v), -1, -1}, 0.0});

  std::unordered_map<std::uint64_t, std::size_t> edge_slot;
  edge_slot.reserve(tri.edges.size() * 2);
  std::vector<double> edge_value(tri.edges.size());
  std::vector<bool> gabriel(tri.edges.size(), true);
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    edge_slot[edge_key(tri.edges[e][0], tri.edges[e][1])] = e;
    edge_value[e] = distance(P[tri.edges[e][0]], P[tri.edges[e][1]]);
  }
  std::vector<double> tri_value(tri.triangles.size());
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& v = tri.triangles[t];
    tri_value[t] = 2.0 * circumcircle(P[v[0]], P[v[1]], P[v[2]]).radius;
    for (int i = 0; i < 3; ++i) {
      const Vec2 c = P[v[i]];
      const Vec2 a = P[v[(i + 1) % 3]];
      const Vec2 b = P[v[(i + 2) % 3]];
      const std::size_t e = edge_slot.at(edge_key(v[(i + 1) % 3], v[(i + 2) % 3]));
      if (!(dot(a - c, b - c) > 0.0)) gabriel[e] = false;
    }
  }
  std::vector<double> attached(tri.edges.size(), std::numeric_limits<double>::infinity());
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& v = tri.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const std::size_t e = edge_slot.at(edge_key(v[(i + 1) % 3], v[(i + 2) % 3]));
      attached[e] = std::min(attached[e], tri_value[t]);
    }
  }
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    const double value = gabriel[e] ? edge_value[e] : attached[e];
    filt.simplices.push_back({1, {tri.edges[e][0], tri.edges[e][1], -1}, value / scale});
  }
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    std::array<int, 3> v = tri.triangles[t];
    std::sort(v.begin(), v.end());
    filt.simplices.push_back({2, v, tri_value[t] / scale});
  }
  std::sort(filt.simplices.begin(), filt.simplices.end(), filtration_less);
  return filt;
}

std::vector<PersistencePair> PersistenceDiagram::in_dimension(int dim) const {
  std::vector<PersistencePair> out;
  for (const auto& p : pairs)
    if (p.dim == dim) out.push_back(p);
  return out;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

PersistenceDiagram persistence_diagram(const AlphaFiltration& filt) {
  PersistenceDiagram dgm;
  const auto& S = filt.simplices;
  const double inf = std::numeric_limits<double>::infinity();
  dgm.vertices = filt.vertex_count;

  std::unordered_map<std::uint64_t, int> edge_index;
  UnionFind uf(filt.vertex_count);
  std::vector<bool> creates_cycle(S.size(), false);
  std::size_t components = filt.vertex_count;
  for (std::size_t i = 0; i < S.size(); ++i) {
    if (S[i].dim != 1) continue;
    ++dgm.edges;
    const int a = S[i].vertices[0], b = S[i].vertices[1];
    edge_index[edge_key(a, b)] = static_cast<int>(i);
    // Elder rule: the younger root dies. All vertices enter at 0, so the
    // smaller index survives.
    if (uf.unite(a, b)) {
      --components;
      if (S[i].value > 0.0) dgm.pairs.push_back({0, 0.0, S[i].value});
    } else {
      creates_cycle[i] = true;
    }
  }
  dgm.components = components;
  for (std::size_t c = 0; c < components; ++c) dgm.pairs.push_back({0, 0.0, inf});

  std::unordered_map<int, std::vector<int>> reduced;  // pivot -> column
  std::vector<bool> killed(S.size(), false);
  std::vector<int> column;
  std::vector<int> merged;
  for (std::size_t j = 0; j < S.size(); ++j) {
    if (S[j].dim != 2) continue;
    const auto& v = S[j].vertices;
    column = {edge_index.at(edge_key(v[0], v[1])), edge_index.at(edge_key(v[0], v[2])),
              edge_index.at(edge_key(v[1], v[2]))};
    std::sort(column.begin(), column.end());
    while (!column.empty()) {
      auto it = reduced.find(column.back());
      if (it == reduced.end()) break;
      merged.clear();
      std::set_symmetric_difference(column.begin(), column.end(), it->second.begin(), it->second.end(),
                                    std::back_inserter(merged));
      column.swap(merged);
    }
    if (column.empty()) continue;
    const int pivot = column.back();
    killed[pivot] = true;
    ++dgm.finite_pairs_dim1;
    if (S[pivot].value < S[j].value) dgm.pairs.push_back({1, S[pivot].value, S[j].value});
    reduced.emplace(pivot, column);
  }
  for (std::size_t i = 0; i < S.size(); ++i) {
    if (creates_cycle[i] && !killed[i]) {
      ++dgm.essential_dim1;
      dgm.pairs.push_back({1, S[i].value, inf});
    }
  }
  return dgm;
}

int persistent_betti_1(const PersistenceDiagram& diagram, double s, double t) {
  if (s > t) throw DomainError("persistent_betti_1: need s <= t");
  int count = 0;
  for (const auto& p : diagram.pairs)
    if (p.dim == 1 && p.birth <= s && p.death > t) ++count;
  return count;
}

int persistent_betti_1(const AlphaFiltration& filt, double s, double t) {
  if (s > t) throw DomainError("persistent_betti_1: need s <= t");
  return persistent_betti_1(persistence_diagram(filt), s, t);
}

void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram) {
  const auto old = out.precision(17);
  out << "dim,birth,death\n";
  for (const auto& p : diagram.pairs) {
    out << p.dim << ',' << p.birth << ',';
    if (std::isinf(p.death))
      out << "inf";
    else
      out << p.death;
    out << '\n';
  }
  out.precision(old);
}

StatisticVector morse_count_delaunay(const Triangulation& tri, std::span<const double> radii, double scale) {
  if (!(scale > 0.0)) throw DomainError("morse_count_delaunay: scale must be positive");
  const ScoreFunction score = score_morse(radii);
  StatisticVector stat;
  stat.values.assign(radii.size(), 0.0);
  std::vector<double> h(radii.size());
  for (const auto& t : tri.triangles) {
    std::array<int, 3> v = t;
    std::sort(v.begin(), v.end(), [&](int a, int b) {
      const Vec2 pa = tri.vertices[a], pb = tri.vertices[b];
      if (pa.x != pb.x) return pa.x < pb.x;
      if (pa.y != pb.y) return pa.y < pb.y;
      return a < b;
    });
    const Vec2 anchor = tri.vertices[v[0]];
    double local[6];
    for (int i = 0; i < 3; ++i) {
      local[2 * i] = (tri.vertices[v[i]].x - anchor.x) / scale;
      local[2 * i + 1] = (tri.vertices[v[i]].y - anchor.y) / scale;
    }
    score.evaluate(local, h);
    for (std::size_t i = 0; i < h.size(); ++i) stat.values[i] += h[i];
  }
  return stat;
}

std::size_t component_size_vertex_count(const PointCloud& cloud, double r_edge) {
  const std::size_t n = cloud.size();
  if (n == 0) return 0;
  if (!(r_edge > 0.0)) return 0;
  const GridIndex grid(cloud, recommended_cell_size(cloud, r_edge));
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    grid.for_each_candidate(p, r_edge, [&](std::uint32_t j) {
      if (j > i && std::sqrt(squared_distance(p, cloud.point(j))) <= r_edge) uf.unite(static_cast<int>(i), j);
    });
  }
  std::vector<std::size_t> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++size[uf.find(static_cast<int>(i))];
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (size[uf.find(static_cast<int>(i))] >= 4) ++count;
  return count;
}

std::size_t component_size_vertex_count(std::span<const Vec2> points, double r_edge) {
  RegimeParams regime;
  regime.d = 2;
  return component_size_vertex_count(cloud_from_points(points, regime), r_edge);
}

}  // namespace geoldp
