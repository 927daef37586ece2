#include "geoldp/geometry.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoldp/errors.hpp"

namespace geoldp {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double diameter(std::span<const double> coords, int dim) {
  if (dim <= 0 || coords.empty() || coords.size() % static_cast<std::size_t>(dim) != 0)
    throw DomainError("diameter: empty point list");
  const std::size_t n = coords.size() / dim;
  const auto pt = [&](std::size_t i) { return coords.subspan(i * dim, dim); };
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, squared_distance(pt(i), pt(j)));
  return std::sqrt(best);
}

double diameter(std::span<const Vec2> points) {
  if (points.empty()) throw DomainError("diameter: empty point list");
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) best = std::max(best, norm2(points[i] - points[j]));
  return std::sqrt(best);
}

double twice_signed_area(Vec2 a, Vec2 b, Vec2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

Circumcircle circumcircle(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 u = b - a;
  const Vec2 v = c - a;
  const double det = u.x * v.y - u.y * v.x;
  if (std::abs(det) <= kGeomEps) throw DegenerateTriple();
  const double uu = norm2(u);
  const double vv = norm2(v);
  const double denom = 2.0 * det;
  const Vec2 offset{(v.y * uu - u.y * vv) / denom, (u.x * vv - v.x * uu) / denom};
  return {a + offset, std::sqrt(norm2(offset))};
}

namespace {

// cos of the angle at p between rays to q and r exceeds kGeomEps.
bool acute_at(Vec2 p, Vec2 q, Vec2 r) {
  const Vec2 u = q - p;
  const Vec2 v = r - p;
  return dot(u, v) > kGeomEps * std::sqrt(norm2(u) * norm2(v));
}

bool contains_all(std::span<const Vec2> pts, Vec2 center, double radius) {
  const double tol = radius * 1e-12 + 1e-15;
  return std::all_of(pts.begin(), pts.end(), [&](Vec2 p) { return distance(p, center) <= radius + tol; });
}

}  // namespace

bool circumcenter_in_open_hull(Vec2 a, Vec2 b, Vec2 c) {
  if (std::abs(twice_signed_area(a, b, c)) <= kGeomEps) throw DegenerateTriple();
  return acute_at(a, b, c) && acute_at(b, c, a) && acute_at(c, a, b);
}

double enclosing_radius(std::span<const Vec2> points) {
  if (points.empty()) throw DomainError("enclosing_radius: empty point list");
  if (points.size() > 4) throw DomainError("enclosing_radius: at most four points supported");
  if (points.size() == 1) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 mid = 0.5 * (points[i] + points[j]);
      const double rad = 0.5 * distance(points[i], points[j]);
      if (rad < best && contains_all(points, mid, rad)) best = rad;
      for (std::size_t k = j + 1; k < n; ++k) {
        if (std::abs(twice_signed_area(points[i], points[j], points[k])) <= kGeomEps) continue;
        const Circumcircle cc = circumcircle(points[i], points[j], points[k]);
        if (cc.radius < best && contains_all(points, cc.center, cc.radius)) best = cc.radius;
      }
    }
  }
  return best;
}

int cech_one_cycle(Vec2 a, Vec2 b, Vec2 c, double r) {
  if (std::abs(twice_signed_area(a, b, c)) <= kGeomEps) return 0;
  const double dab = distance(a, b);
  const double dbc = distance(b, c);
  const double dca = distance(c, a);
  if (dab > r || dbc > r || dca > r) return 0;
  // Common point of three radius-s balls exists iff s reaches the smallest
  // enclosing radius: the circumradius for acute triangles, otherwise half
  // the longest edge.
  const double fill = circumcenter_in_open_hull(a, b, c) ? circumcircle(a, b, c).radius
                                                         : 0.5 * std::max({dab, dbc, dca});
  return 0.5 * r < fill ? 1 : 0;
}

bool balls_intersection_oracle(std::span<const Vec2> centers, double s, double grid_step) {
  if (centers.empty()) return true;
  if (!(grid_step > 0.0)) throw DomainError("grid_step must be positive");
  double xlo = -std::numeric_limits<double>::infinity();
  double xhi = std::numeric_limits<double>::infinity();
  for (const Vec2& c : centers) {
    xlo = std::max(xlo, c.x - s);
    xhi = std::min(xhi, c.x + s);
  }
  if (xlo > xhi) return false;
  const long first = static_cast<long>(std::ceil(xlo / grid_step));
  const long last = static_cast<long>(std::floor(xhi / grid_step));
  for (long ix = first; ix <= last; ++ix) {
    const double x = ix * grid_step;
    double ylo = -std::numeric_limits<double>::infinity();
    double yhi = std::numeric_limits<double>::infinity();
    bool empty = false;
    for (const Vec2& c : centers) {
      const double h2 = s * s - (x - c.x) * (x - c.x);
      if (h2 < 0.0) {
        empty = true;
        break;
      }
      const double h = std::sqrt(h2);
      ylo = std::max(ylo, c.y - h);
      yhi = std::min(yhi, c.y + h);
    }
    if (empty || ylo > yhi) continue;
    if (std::ceil(ylo / grid_step) <= std::floor(yhi / grid_step)) return true;
  }
  return false;
}

bool triple_intersection_oracle(Vec2 a, Vec2 b, Vec2 c, double s, double grid_step) {
  const Vec2 pts[3] = {a, b, c};
  return balls_intersection_oracle(pts, s, grid_step);
}

namespace {

constexpr double kOrientErrBound = 3.3306690738754716e-16;
constexpr double kIncircleErrBound = 1.1102230246251577e-15;

int sign_of(const mpq_class& q) { return sgn(q); }

int orient2d_exact(Vec2 a, Vec2 b, Vec2 c) {
  const mpq_class ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  const mpq_class det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
  return sign_of(det);
}

int incircle_exact(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const mpq_class dx(d.x), dy(d.y);
  const mpq_class adx = mpq_class(a.x) - dx, ady = mpq_class(a.y) - dy;
  const mpq_class bdx = mpq_class(b.x) - dx, bdy = mpq_class(b.y) - dy;
  const mpq_class cdx = mpq_class(c.x) - dx, cdy = mpq_class(c.y) - dy;
  const mpq_class alift = adx * adx + ady * ady;
  const mpq_class blift = bdx * bdx + bdy * bdy;
  const mpq_class clift = cdx * cdx + cdy * cdy;
  const mpq_class det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                        clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

int orient2d_sign(Vec2 a, Vec2 b, Vec2 c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  const double errbound = kOrientErrBound * (std::abs(detleft) + std::abs(detright));
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  return orient2d_exact(a, b, c);
}

int incircle_sign(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double errbound = kIncircleErrBound * permanent;
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  return incircle_exact(a, b, c, d);
}

}  // namespace geoldp
