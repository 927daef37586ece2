#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "geoldp/pointproc.hpp"

namespace geoldp {

// How a scoring tuple must be separated from the rest of the cloud.
enum class IsolationRule {
  distance,          // c_n: every other point at distance >= r * t_i
  empty_circumdisk,  // no cloud point in the open circumdisk (Morse critical points)
};

// Score H on k points of R^d given in r-units. `evaluate` canonicalizes its
// input (lexicographic sort, translation of the first point to the origin)
// before calling the kernel, so permutation invariance holds bitwise, and it
// returns zeros whenever the diameter exceeds support_L.
class ScoreFunction {
 public:
  using Kernel = std::function<void(std::span<const double> canonical, std::span<double> out)>;

  ScoreFunction() = default;
  ScoreFunction(std::string name, int k, int d, double support_L, std::vector<double> thresholds,
                IsolationRule rule, Kernel kernel);

  const std::string& name() const { return name_; }
  int k() const { return k_; }
  int d() const { return d_; }
  int m() const { return static_cast<int>(thresholds_.size()); }
  double support_L() const { return support_L_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  double max_threshold() const;
  IsolationRule isolation_rule() const { return rule_; }

  // `points` holds k points row-major (k * d values).
  void evaluate(std::span<const double> points, std::span<double> out) const;
  std::vector<double> operator()(std::span<const double> points) const;

 private:
  std::string name_;
  int k_ = 0;
  int d_ = 0;
  double support_L_ = 0.0;
  std::vector<double> thresholds_;
  IsolationRule rule_ = IsolationRule::distance;
  Kernel kernel_;
};

// Graph on k <= 6 labelled vertices reduced to the minimal edge bitmask over
// all vertex relabelings. Bit b corresponds to the b-th pair (i < j) in
// lexicographic order.
struct CanonicalGraph {
  int k = 0;
  std::uint32_t edge_bitmask = 0;
  friend bool operator==(const CanonicalGraph&, const CanonicalGraph&) = default;
};

CanonicalGraph canonicalize_graph(int k, std::span<const std::pair<int, int>> edges);
bool is_connected(int k, std::uint32_t edge_bitmask);

// One (target, threshold) pair per score component.
struct GraphTarget {
  std::vector<std::pair<int, int>> edges;
  double t = 1.0;
};

// h_i = 1{ geometric graph at radius t_i on the tuple is isomorphic to target_i }.
// Support bound L = (k - 1) * max t_i.
ScoreFunction score_rgg_component(int k, std::span<const GraphTarget> targets, int d = 2);
ScoreFunction score_rgg_component(int k, const std::vector<std::pair<int, int>>& target, double t, int d = 2);

// Pair score h_i = 1{ |y1 - y0| <= t_i }; L = max t_i.
ScoreFunction score_edge(std::span<const double> thresholds, int d = 2);

// Simplicial complex on p <= 4 vertices given by its simplices; faces are
// implied, vertices are always present.
struct ComplexTarget {
  std::vector<std::vector<int>> simplices;
  double t = 1.0;
};

// h_i = 1{ Cech complex at radius t_i (balls of radius t_i / 2) on the p
// points is isomorphic to target_i }, planar points only. L = (p - 1) * max t_i.
ScoreFunction score_cech_component(int points_per_tuple, std::span<const ComplexTarget> targets);

// h = h_s * h_t with h_r the persistent 1-cycle indicator of three balls of
// radius r/2; isolation threshold t; L = max t_i.
struct PersistenceWindow {
  double s = 0.0;
  double t = 0.0;
};
ScoreFunction score_persistent_triple(std::span<const PersistenceWindow> windows);
ScoreFunction score_persistent_triple(double s, double t);

// h_i = 1{ circumcenter in the open triangle and circumradius <= t_i }; the
// isolation rule is the empty open circumdisk. L = 2 * max t_i.
ScoreFunction score_morse(std::span<const double> thresholds);

// h = 1 for every k-tuple of diameter <= L (the xi-process count).
ScoreFunction score_indicator(int k, int d, double L, double t);

struct StatisticVector {
  std::vector<double> values;
  double rho = 0.0;
};

struct EmpiricalMeasure {
  int dim = 0;
  std::vector<double> locations;  // row-major, one row per atom
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double total_mass() const;
  std::span<const double> location(std::size_t i) const {
    return {locations.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

// Diagnostic knob for mutation testing: shifts every isolation radius by
// `isolation_offset` r-units. Production code leaves it at zero.
struct ScanOptions {
  double isolation_offset = 0.0;
};

// T: values[i] = sum over k-subsets of h_i(Y) * isolation_i(Y).
StatisticVector compute_T(const PointCloud& cloud, const ScoreFunction& score, const ScanOptions& options = {});

// U: weight 1/rho at each nonzero G vector.
EmpiricalMeasure compute_U(const PointCloud& cloud, const ScoreFunction& score);

// xi: weight 1/rho at r^-1 (Y - l(Y)) for each tuple with s_n = 1, points
// ordered lexicographically so the first block is the origin.
EmpiricalMeasure compute_xi(const PointCloud& cloud, double t, double L, int k);

// N: Morse critical points of index 2 with critical value <= r * t_i.
StatisticVector compute_morse(const PointCloud& cloud, std::span<const double> thresholds);

// One atom per row: location columns then weight.
void write_measure_csv(std::ostream& out, const EmpiricalMeasure& measure);

}  // namespace geoldp
