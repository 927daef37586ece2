#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "geoldp/functionals.hpp"
#include "geoldp/geometry.hpp"
#include "geoldp/pointproc.hpp"

namespace geoldp {

// Finite Delaunay triangles in counterclockwise order. neighbors[t][i] is the
// triangle across the edge opposite triangles[t][i], or -1 on the hull.
// Duplicate input points stay in `vertices` but are not connected.
struct Triangulation {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;  // (a < b), sorted
  std::vector<std::array<int, 3>> neighbors;

  std::size_t hull_edge_count() const;
};

// Incremental Bowyer-Watson insertion. The insertion order is a seeded
// shuffle followed by a coarse spatial sort, so the result depends only on
// the points and the seed. Cocircular ties keep the earlier triangles.
Triangulation delaunay(std::span<const Vec2> points, std::uint64_t seed = 0);

struct Simplex {
  int dim = 0;
  std::array<int, 3> vertices{-1, -1, -1};  // ascending, unused slots -1
  double value = 0.0;
};

// Alpha filtration with values equal to twice the alpha radius, divided by
// `scale`: a simplex belongs to the complex at parameter s iff value <= s.
// With scale = r these values compare directly to the score thresholds.
struct AlphaFiltration {
  std::size_t vertex_count = 0;
  double scale = 1.0;
  std::vector<Simplex> simplices;  // sorted by (value, dim, vertices)
};

AlphaFiltration alpha_filtration(const Triangulation& tri, double scale = 1.0);

struct PersistencePair {
  int dim = 1;
  double birth = 0.0;
  double death = 0.0;  // +inf for essential classes
};

// Pairs with birth < death in dimensions 0 and 1. The bookkeeping counters
// include zero-length pairs so the Euler identity can be checked.
struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t components = 0;
  std::size_t finite_pairs_dim1 = 0;  // including zero-length ones
  std::size_t essential_dim1 = 0;

  std::vector<PersistencePair> in_dimension(int dim) const;
};

PersistenceDiagram persistence_diagram(const AlphaFiltration& filt);

// Dimension-1 classes born at or before s and still alive after t.
int persistent_betti_1(const PersistenceDiagram& diagram, double s, double t);
int persistent_betti_1(const AlphaFiltration& filt, double s, double t);

// Rows "dim,birth,death" with "inf" for essential classes.
void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram);

// Delaunay triangles with circumcenter inside and circumradius <= scale * t_i.
StatisticVector morse_count_delaunay(const Triangulation& tri, std::span<const double> radii, double scale);

// Vertices in connected components with at least four points of the
// geometric graph at radius r_edge.
std::size_t component_size_vertex_count(const PointCloud& cloud, double r_edge);
std::size_t component_size_vertex_count(std::span<const Vec2> points, double r_edge);

}  // namespace geoldp
