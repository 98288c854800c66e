#pragma once

// Sets of intervals on a graph and the isoperimetric machinery built on them:
// perimeter (combinatorial and through the small-time heat flow), the L^1
// smoothing bound, Cheeger constants by grid search, the Buser sandwich, and
// the midpoint-set construction showing geodesic Brunn-Minkowski fails on a
// spider.

#include <cstddef>
#include <utility>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/kernels.hpp"
#include "mgk/transport.hpp"

namespace mgk {

struct Interval {
  SegmentIndex seg = 0;
  double a = 0, b = 0;  // 0 <= a < b, b within the segment
};

struct IntervalSet {
  std::vector<Interval> parts;

  double measure() const {
    double s = 0;
    for (const auto& p : parts) s += p.b - p.a;
    return s;
  }
};

// Throws invalid_argument unless every part has positive length, sits inside
// its segment, and parts on a shared segment are disjoint (touching counts as
// overlap; merge such parts first).
void validate_interval_set(const MetricGraph& g, const IntervalSet& e);

struct PerimeterResult {
  // Boundary-point count.  An endpoint sitting exactly on a vertex adds
  // nothing when the set covers every incidence of that vertex (the vertex is
  // interior to the set; degree-1 endpoints are the common case) and makes
  // the count meaningless when coverage is partial: combinatorial_valid goes
  // false and only the heat estimate stands.
  int combinatorial = 0;
  bool combinatorial_valid = true;

  // integral of |d/dx P_t 1_E| extrapolated to t = 0 from the probe times,
  // assuming a sqrt(t) error model.
  double heat_estimate = 0;
  std::vector<double> heat_at;  // raw integrals, one per probe time
};

PerimeterResult perimeter(const MetricGraph& g, const IntervalSet& e,
                          const KernelOptions& opt = {},
                          const std::vector<double>& probe_times = {1e-3, 5e-4,
                                                                    2.5e-4});

// lhs = ||P_t 1_E - 1_E||_1, rhs = c1^3 sqrt(2t) P(E) with the combinatorial
// perimeter (falling back to the heat estimate when that is refused).
std::pair<double, double> l1_heat_bound_check(const MetricGraph& g,
                                              const IntervalSet& e, double t,
                                              double c1,
                                              const KernelOptions& opt = {});

struct CheegerResult {
  double h = kInf;  // best perimeter/measure ratio found; an upper bound
  IntervalSet best;
};

// Grid search over single intervals (endpoints on a resolution-point grid per
// segment) and unions of two intervals (half resolution), restricted to
// measure <= half the graph and to combinatorially valid perimeters.
CheegerResult cheeger_constant(const MetricGraph& g, int resolution = 64);

struct BuserResult {
  double lambda1 = 0;
  double h = 0;        // Cheeger upper bound from the grid search
  double upper = 0;    // 2 c1^6 (1 - 1/e)^{-2} h^2
  double lower = 0;    // h^2 / 4
  bool upper_ok = false, lower_ok = false;
};

BuserResult buser_check(const MetricGraph& g, double c1, int resolution = 64);

struct MidpointSet {
  bool supported = false;
  Interval part;      // the set [A,B]_t, a single interval on A's leg
  double t = 0;
  double measure = 0;
};

// Exact midpoint set on a spider for the configuration A = one interval on
// one leg, B = one identical interval replicated on other legs; t close
// enough to 1 that every geodesic point t-of-the-way from B to A lands on
// A's leg.  Anything else reports unsupported.
MidpointSet midpoint_set(const MetricGraph& g, const IntervalSet& a,
                         const IntervalSet& b, double t);

// Uniform atoms for discrete transport: per_interval cells per part, one atom
// at each cell midpoint, masses normalized to a probability measure.
std::vector<MassAtom> discretize_interval_set(const IntervalSet& e,
                                              int per_interval = 64);

struct BMRow {
  double t = 0;
  double lhs = 0;     // log measure of the midpoint set
  double rhs = 0;     // t log mu(A) + (1-t) log mu(B) + (K/2) t(1-t) W^2
  double margin = 0;  // rhs - lhs; positive means the inequality failed
};

struct BMReport {
  double scale = 1;       // the scale at which the rows were computed
  double w2 = 0;          // discrete Wasserstein distance between A and B
  std::vector<BMRow> rows;
  double best_margin = -kInf;
  double best_t = 0;
  bool violated = false;
};

// A = (scale, 2 scale) on the first leg of a 3-spider, B the same interval on
// the other two legs.  Evaluates the geodesic convexity inequality for the
// curvature parameter k on a grid of interpolation times; for k < 0 the scale
// shrinks (bisection, transport rerun per probe) until the violation margin
// turns positive.
BMReport brunn_minkowski_violation(const MetricGraph& g, double k,
                                   double scale = 1.0);

}  // namespace mgk
