#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "geoldp/pointproc.hpp"

namespace geoldp {

// Uniform lattice of cubic cells over [0,1]^d, stored by column: points are
// kept in lexicographic order (index as final tie-break), and a dense
// directory over the first-axis cells gives where each column's run begins.
// Memory is linear in the point count however small the cells are. Points
// outside the cube land in the boundary columns.
class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(const PointCloud& cloud, double cell_size);

  double cell_size() const { return cell_size_; }
  int dim() const { return d_; }
  std::size_t cells_per_axis() const { return per_axis_; }
  std::size_t occupied_cells() const;
  std::size_t point_count() const { return order_.size(); }

  // Point indices in lexicographic order, and the coordinates of the point
  // at each position of that order.
  std::span<const std::uint32_t> lex_order() const { return order_; }
  std::span<const double> sorted_point(std::size_t pos) const {
    return {sorted_.data() + pos * d_, static_cast<std::size_t>(d_)};
  }

  // First position whose first coordinate is >= x.
  std::size_t lower_position(double x) const;

  // Visits every point inside the closed box [lo, hi], in lexicographic order.
  template <class Fn>
  void for_each_in_box(std::span<const double> lo, std::span<const double> hi, Fn&& fn) const;

  // Points of the box of half-width q around `center` (a superset of the q-ball).
  template <class Fn>
  void for_each_candidate(std::span<const double> center, double q, Fn&& fn) const;

  // Indices of points at distance <= q from `center`, ascending.
  std::vector<std::uint32_t> range_query(std::span<const double> center, double q) const;

 private:
  std::uint32_t axis_cell(double x) const;

  const PointCloud* cloud_ = nullptr;
  int d_ = 0;
  double cell_size_ = 1.0;
  double inv_cell_ = 1.0;
  std::size_t per_axis_ = 1;
  std::vector<std::uint32_t> column_start_;
  std::vector<std::uint32_t> order_;
  std::vector<double> sorted_;
};

GridIndex build_index(const PointCloud& cloud, double cell_size);

// Cell size at least `min_cell`, and no finer than the lattice can resolve
// for this many points.
double recommended_cell_size(const PointCloud& cloud, double min_cell);

struct TupleRecord {
  std::vector<std::uint32_t> indices;  // ascending
  double diam = 0.0;
  std::vector<double> center;          // lexicographically smallest member
  std::vector<double> centered;        // (Y - center) / r, row-major in `indices` order
  std::vector<bool> isolated_at;       // one flag per requested threshold
};

// Lexicographic order on points with the index as final tie-break.
bool lex_less(const PointCloud& cloud, std::uint32_t a, std::uint32_t b);

// Every k-subset with diameter <= r*L, once each, via the lexicographically
// smallest member as anchor. `visit` receives member indices in
// lexicographic point order (anchor first).
void for_each_local_tuple(const PointCloud& cloud, const GridIndex& grid, int k, double bound,
                          const std::function<void(std::span<const std::uint32_t>)>& visit);

// Records sorted by member indices. `thresholds` fills isolated_at.
std::vector<TupleRecord> enumerate_tuples(const PointCloud& cloud, int k, double L,
                                          std::span<const double> thresholds = {});

// c_n: 1 iff every non-member lies at distance >= r*t from every member.
int isolation(std::span<const std::uint32_t> members, const PointCloud& cloud, const GridIndex& grid, double t);
int isolation(const TupleRecord& tuple, const PointCloud& cloud, double t);

// s_n: isolation at t and diam <= r*L.
int s_indicator(const TupleRecord& tuple, const PointCloud& cloud, double t, double L);

// Implementation.

template <class Fn>
void GridIndex::for_each_in_box(std::span<const double> lo, std::span<const double> hi, Fn&& fn) const {
  const std::size_t n = order_.size();
  for (std::size_t pos = lower_position(lo[0]); pos < n; ++pos) {
    const double* p = sorted_.data() + pos * d_;
    if (p[0] > hi[0]) break;
    bool inside = true;
    for (int c = 1; c < d_ && inside; ++c) inside = p[c] >= lo[c] && p[c] <= hi[c];
    if (inside) fn(order_[pos]);
  }
}

template <class Fn>
void GridIndex::for_each_candidate(std::span<const double> center, double q, Fn&& fn) const {
  double lo[8], hi[8];
  for (int c = 0; c < d_; ++c) {
    lo[c] = center[c] - q;
    hi[c] = center[c] + q;
  }
  for_each_in_box(std::span<const double>(lo, d_), std::span<const double>(hi, d_), fn);
}

}  // namespace geoldp
