#pragma once

#include <span>
#include <vector>

namespace geoldp {

// Degeneracy tolerance in unit-cube coordinates. Random configurations are
// degenerate with probability zero, so this only absorbs rounding noise.
inline constexpr double kGeomEps = 1e-12;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return dot(a, a); }
double distance(Vec2 a, Vec2 b);

// Squared distance of two d-dimensional points; the summation order is fixed
// so every code path comparing distances sees identical values.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

struct Circumcircle {
  Vec2 center;
  double radius = 0.0;
};

// Max pairwise Euclidean distance of the points stored row-major in
// `coords` (each point has `dim` coordinates). Throws DomainError when empty.
double diameter(std::span<const double> coords, int dim);
double diameter(std::span<const Vec2> points);

// Twice the signed area of (a, b, c); positive for counter-clockwise order.
// Plain floating point, used for tolerance tests only.
double twice_signed_area(Vec2 a, Vec2 b, Vec2 c);

// Throws DegenerateTriple when |2A| <= kGeomEps.
Circumcircle circumcircle(Vec2 a, Vec2 b, Vec2 c);

// True iff the circumcenter lies strictly inside the triangle, i.e. all three
// angles are acute. Right angles (within kGeomEps in cosine) give false.
bool circumcenter_in_open_hull(Vec2 a, Vec2 b, Vec2 c);

// Radius of the smallest disk containing all points (at most four points are
// supported, which is all the Cech scores need). Equal-radius closed balls
// around the points have a common point iff this radius is <= their radius.
double enclosing_radius(std::span<const Vec2> points);

// Persistent 1-cycle indicator of three balls of radius r/2: 1 iff the balls
// pairwise intersect but have no common point. Degenerate triples give 0.
int cech_one_cycle(Vec2 a, Vec2 b, Vec2 c, double r);

// Brute-force oracle: sample the bounding box of the balls on a grid of the
// given step and report whether some grid point lies in every closed ball of
// radius s. Each grid column is resolved by intersecting the per-disk
// y-intervals, which is equivalent to testing every grid point of the column.
bool balls_intersection_oracle(std::span<const Vec2> centers, double s, double grid_step);
bool triple_intersection_oracle(Vec2 a, Vec2 b, Vec2 c, double s, double grid_step);

// Exact-sign predicates (floating-point filter with exact rational fallback).
// orient2d > 0 iff c is strictly left of a->b.
int orient2d_sign(Vec2 a, Vec2 b, Vec2 c);
// incircle > 0 iff d is strictly inside the circle through counter-clockwise a, b, c.
int incircle_sign(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

}  // namespace geoldp
