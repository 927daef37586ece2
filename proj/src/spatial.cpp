#include "geoldp/spatial.hpp"

#include <algorithm>
#include <cmath>

#include "geoldp/errors.hpp"

namespace geoldp {

namespace {

constexpr int kMaxDim = 8;
constexpr std::size_t kMaxPerAxis = std::size_t{1} << 24;

// Finest lattice worth building: beyond a few cells per point along an axis,
// extra resolution only lengthens the column directory.
std::size_t per_axis_limit(std::size_t n) { return std::min(kMaxPerAxis, 4 * n + 16); }

}  // namespace

GridIndex::GridIndex(const PointCloud& cloud, double cell_size) : cloud_(&cloud), d_(cloud.d) {
  if (!(cell_size > 0.0)) throw DomainError("build_index: cell_size must be positive");
  if (d_ < 1 || d_ > kMaxDim) throw DomainError("build_index: unsupported dimension");
  const std::size_t n = cloud.size();
  const double wanted = std::ceil(1.0 / cell_size);
  per_axis_ = wanted >= static_cast<double>(per_axis_limit(n)) ? per_axis_limit(n)
                                                                : static_cast<std::size_t>(std::max(1.0, wanted));
  // Cells never shrink below the request; a capped lattice gets wider cells.
  cell_size_ = std::max(cell_size, 1.0 / static_cast<double>(per_axis_));
  inv_cell_ = 1.0 / cell_size_;

  struct Entry {
    double x;
    std::uint32_t index;
  };
  // Scratch reused across builds on the same thread; replicate loops build
  // one index per cloud.
  thread_local std::vector<std::uint32_t> column;
  thread_local std::vector<Entry> entries;
  thread_local std::vector<std::uint32_t> fill;
  column.resize(n);
  column_start_.assign(per_axis_ + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    column[i] = axis_cell(cloud.coords[i * d_]);
    ++column_start_[column[i] + 1];
  }
  for (std::size_t c = 0; c < per_axis_; ++c) column_start_[c + 1] += column_start_[c];
  entries.resize(n);
  {
    fill.assign(column_start_.begin(), column_start_.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      entries[fill[column[i]]++] = {cloud.coords[i * d_], static_cast<std::uint32_t>(i)};
  }
  const auto less = [&](const Entry& a, const Entry& b) {
    if (a.x != b.x) return a.x < b.x;
    return lex_less(cloud, a.index, b.index);
  };
  for (std::size_t col = 0; col < per_axis_; ++col) {
    Entry* first = entries.data() + column_start_[col];
    Entry* last = entries.data() + column_start_[col + 1];
    if (last - first <= 16) {
      for (Entry* it = first + 1; it < last; ++it) {
        const Entry e = *it;
        Entry* jt = it;
        for (; jt != first && less(e, *(jt - 1)); --jt) *jt = *(jt - 1);
        *jt = e;
      }
    } else {
      std::sort(first, last, less);
    }
  }
  order_.resize(n);
  sorted_.resize(n * d_);
  for (std::size_t pos = 0; pos < n; ++pos) {
    order_[pos] = entries[pos].index;
    const double* src = cloud.coords.data() + static_cast<std::size_t>(entries[pos].index) * d_;
    for (int c = 0; c < d_; ++c) sorted_[pos * d_ + c] = src[c];
  }
}

std::uint32_t GridIndex::axis_cell(double x) const {
  // Truncation is floor here because negatives and NaN were clamped to 0.
  const double f = x * inv_cell_;
  if (!(f > 0.0)) return 0;
  if (f >= static_cast<double>(per_axis_ - 1)) return static_cast<std::uint32_t>(per_axis_ - 1);
  return static_cast<std::uint32_t>(f);
}

std::size_t GridIndex::lower_position(double x) const {
  if (order_.empty()) return 0;
  std::size_t pos = column_start_[axis_cell(x)];
  while (pos < order_.size() && sorted_[pos * d_] < x) ++pos;
  return pos;
}

std::size_t GridIndex::occupied_cells() const {
  std::vector<std::vector<std::uint32_t>> keys;
  std::size_t count = 0;
  for (std::size_t col = 0; col < per_axis_; ++col) {
    std::vector<std::vector<std::uint32_t>> cells;
    for (std::uint32_t pos = column_start_[col]; pos < column_start_[col + 1]; ++pos) {
      std::vector<std::uint32_t> key;
      for (int c = 1; c < d_; ++c) key.push_back(axis_cell(sorted_[pos * d_ + c]));
      cells.push_back(std::move(key));
    }
    std::sort(cells.begin(), cells.end());
    count += static_cast<std::size_t>(std::unique(cells.begin(), cells.end()) - cells.begin());
  }
  return count;
}

std::vector<std::uint32_t> GridIndex::range_query(std::span<const double> center, double q) const {
  std::vector<std::uint32_t> out;
  for_each_candidate(center, q, [&](std::uint32_t j) {
    if (std::sqrt(squared_distance(center, cloud_->point(j))) <= q) out.push_back(j);
  });
  std::sort(out.begin(), out.end());
  return out;
}

GridIndex build_index(const PointCloud& cloud, double cell_size) { return GridIndex(cloud, cell_size); }

double recommended_cell_size(const PointCloud& cloud, double min_cell) {
  const double finest = 1.0 / static_cast<double>(per_axis_limit(cloud.size()));
  return std::min(1.0, std::max(min_cell, finest));
}

bool lex_less(const PointCloud& cloud, std::uint32_t a, std::uint32_t b) {
  const auto pa = cloud.point(a);
  const auto pb = cloud.point(b);
  for (int c = 0; c < cloud.d; ++c) {
    if (pa[c] < pb[c]) return true;
    if (pa[c] > pb[c]) return false;
  }
  return a < b;
}

namespace {

struct TupleSearch {
  const PointCloud& cloud;
  int k;
  double bound;
  const std::function<void(std::span<const std::uint32_t>)>& visit;
  std::vector<std::uint32_t> candidates;  // lexicographic order
  std::vector<std::uint32_t> chosen;

  bool close(std::uint32_t a, std::uint32_t b) const {
    return std::sqrt(squared_distance(cloud.point(a), cloud.point(b))) <= bound;
  }

  void extend(std::size_t from) {
    if (static_cast<int>(chosen.size()) == k) {
      visit(chosen);
      return;
    }
    const std::size_t need = k - chosen.size();
    for (std::size_t i = from; i + need <= candidates.size(); ++i) {
      const std::uint32_t c = candidates[i];
      bool ok = true;
      for (std::size_t m = 1; m < chosen.size() && ok; ++m) ok = close(chosen[m], c);
      if (!ok) continue;
      chosen.push_back(c);
      extend(i + 1);
      chosen.pop_back();
    }
  }
};

}  // namespace

void for_each_local_tuple(const PointCloud& cloud, const GridIndex& grid, int k, double bound,
                          const std::function<void(std::span<const std::uint32_t>)>& visit) {
  if (k < 2) throw DomainError("enumerate_tuples: k must be >= 2");
  TupleSearch search{cloud, k, bound, visit, {}, {}};
  const int d = cloud.d;
  const auto order = grid.lex_order();
  const std::size_t n = order.size();
  // Members after the anchor in lexicographic order sit at later positions,
  // all within `bound` along the first axis.
  const double* xs = n ? grid.sorted_point(0).data() : nullptr;
  for (std::size_t pa = 0; pa < n; ++pa) {
    const double* a = xs + pa * d;
    const double x_end = a[0] + bound;
    search.candidates.clear();
    for (std::size_t pj = pa + 1; pj < n; ++pj) {
      const double* p = xs + pj * d;
      if (p[0] > x_end) break;
      bool near = true;
      for (int c = 1; c < d; ++c) near &= std::abs(p[c] - a[c]) <= bound;
      if (!near) continue;
      double d2 = 0.0;
      for (int c = 0; c < d; ++c) d2 += (p[c] - a[c]) * (p[c] - a[c]);
      if (std::sqrt(d2) <= bound) search.candidates.push_back(order[pj]);
    }
    if (static_cast<int>(search.candidates.size()) < k - 1) continue;
    search.chosen.assign(1, order[pa]);
    search.extend(0);
  }
}

int isolation(std::span<const std::uint32_t> members, const PointCloud& cloud, const GridIndex& grid, double t) {
  const double radius = cloud.regime.r * t;
  bool isolated = true;
  for (const std::uint32_t y : members) {
    const auto py = cloud.point(y);
    grid.for_each_candidate(py, radius, [&](std::uint32_t z) {
      if (!isolated) return;
      if (std::find(members.begin(), members.end(), z) != members.end()) return;
      if (std::sqrt(squared_distance(py, cloud.point(z))) < radius) isolated = false;
    });
    if (!isolated) return 0;
  }
  return 1;
}

int isolation(const TupleRecord& tuple, const PointCloud& cloud, double t) {
  const double radius = cloud.regime.r * t;
  for (std::size_t z = 0; z < cloud.size(); ++z) {
    if (std::binary_search(tuple.indices.begin(), tuple.indices.end(), static_cast<std::uint32_t>(z))) continue;
    for (const std::uint32_t y : tuple.indices)
      if (std::sqrt(squared_distance(cloud.point(y), cloud.point(z))) < radius) return 0;
  }
  return 1;
}

int s_indicator(const TupleRecord& tuple, const PointCloud& cloud, double t, double L) {
  if (!(tuple.diam <= cloud.regime.r * L)) return 0;
  return isolation(tuple, cloud, t);
}

std::vector<TupleRecord> enumerate_tuples(const PointCloud& cloud, int k, double L, std::span<const double> thresholds) {
  const double r = cloud.regime.r;
  double reach = L;
  for (double t : thresholds) reach = std::max(reach, t);
  const GridIndex grid(cloud, recommended_cell_size(cloud, r * reach));
  std::vector<TupleRecord> out;
  for_each_local_tuple(cloud, grid, k, r * L, [&](std::span<const std::uint32_t> lex_members) {
    TupleRecord rec;
    rec.indices.assign(lex_members.begin(), lex_members.end());
    std::sort(rec.indices.begin(), rec.indices.end());
    std::vector<double> flat;
    flat.reserve(k * cloud.d);
    for (auto i : rec.indices) {
      const auto p = cloud.point(i);
      flat.insert(flat.end(), p.begin(), p.end());
    }
    rec.diam = diameter(flat, cloud.d);
    const auto anchor = cloud.point(lex_members[0]);
    rec.center.assign(anchor.begin(), anchor.end());
    rec.centered.resize(flat.size());
    for (std::size_t m = 0; m < rec.indices.size(); ++m)
      for (int c = 0; c < cloud.d; ++c) rec.centered[m * cloud.d + c] = (flat[m * cloud.d + c] - anchor[c]) / r;
    for (double t : thresholds) rec.isolated_at.push_back(isolation(rec.indices, cloud, grid, t) == 1);
    out.push_back(std::move(rec));
  });
  std::sort(out.begin(), out.end(), [](const TupleRecord& a, const TupleRecord& b) { return a.indices < b.indices; });
  return out;
}

}  // namespace geoldp
