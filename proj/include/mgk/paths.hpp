// paths.hpp — combinatorial scattering paths between two segments.
//
// A path from x on segment e0 to y on segment f is either trivial (x and y on
// the same segment, no vertex visited) or a tuple (e0, v0, e1, ..., vn, e_{n+1})
// with e_{n+1} = f, where each vk is a common endpoint of ek and e_{k+1} and
// every inner edge e1..en is traversed in full between two distinct endpoints.
// Consecutive equal edges encode a reflection.  Rays can only carry x or y;
// they are never traversed.
//
// Metric length for given coordinates:
//   d_c(x, y) = |x - c_exit| + r(e1) + ... + r(en) + |y - c_entry|
// where c_exit is the coordinate of v0 on e0 and c_entry that of vn on e_{n+1}.
//
// Scattering amplitudes:
//   S(c)    = prod_k (2/deg(vk) - [ek = e_{k+1}]),          S(trivial) = 1
//   Svec(c) = -sigma_exit * sigma_entry * S(c),             Svec(trivial) = 1
// with sigma_exit = orientation_sign(v0, e0) and sigma_entry =
// orientation_sign(vn, e_{n+1}).  Svec drives the form (anti-Kirchhoff) heat
// kernel; the sign rule makes d/dx p_t(x,y) = -d/dy pvec_t(x,y) hold term by
// term, which is what the intertwining property requires.

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <map>
#include <vector>

#include "mgk/graph.hpp"

namespace mgk {

struct CombinatorialPath {
  std::vector<SegmentIndex> edges;    // size n+2, or 1 for the trivial path
  std::vector<VertexIndex> vertices;  // size n+1, empty for the trivial path
  bool trivial() const { return vertices.empty(); }
  // Number of scattering events |c| (= vertices.size()).
  int order() const { return static_cast<int>(vertices.size()); }
};

struct PathGeometry {
  double length = 0;       // d_c(x, y)
  double amplitude = 1;    // S(c)
  double form_amplitude = 1;  // Svec(c)
  int order = 0;           // |c|
  double sigma_exit = 0;   // 0 for the trivial path
  double sigma_entry = 0;
};

// All paths with d_c(x, y) <= L_max, the trivial one first when present.
// Throws std::invalid_argument if x or y lies outside the graph or if
// L_max < rho(x, y), which would exclude every path.
std::vector<CombinatorialPath> enumerate_paths(const MetricGraph& g,
                                               const GraphPoint& x,
                                               const GraphPoint& y,
                                               double L_max);

double scattering_amplitude(const MetricGraph& g, const CombinatorialPath& c);
double form_scattering_amplitude(const MetricGraph& g, const CombinatorialPath& c);

PathGeometry path_geometry(const MetricGraph& g, const CombinatorialPath& c,
                           const GraphPoint& x, const GraphPoint& y);

// Flat arrays for kernel evaluation.  Coordinates of x and y do not change
// the combinatorial set, so one compiled set per (segment of x, segment of y,
// cutoff) serves every evaluation; the cutoff applies to the inner length
// (the infimum of d_c over coordinate choices), so the set covers every path
// with d_c <= cutoff and possibly a few longer ones, which only sharpens the
// truncated sum.  Paths whose amplitude vanishes (a reflection at a degree-2
// vertex) are dropped during the walk.
// Paths compiled for kernel evaluation.  Entries are aggregated: paths that
// agree in exit coordinate, entry coordinate, inner length and exit sign
// produce identically shaped kernel terms, so only their summed amplitudes
// are kept.  `enumerated` counts the raw nonzero paths that went in.
struct CompiledPathSet {
  bool has_trivial = false;
  std::vector<double> exit_coord;   // coordinate of v0 on the x segment
  std::vector<double> entry_coord;  // coordinate of vn on the y segment
  std::vector<double> inner_len;
  std::vector<double> amplitude;       // summed S
  std::vector<double> form_amplitude;  // summed Svec
  std::vector<double> sigma_exit;
  std::size_t enumerated = 0;
  std::size_t size() const { return inner_len.size(); }
};

// Throws ToleranceError when the walk exceeds budget paths.
std::shared_ptr<const CompiledPathSet> compile_paths(const MetricGraph& g,
                                                     SegmentIndex ex,
                                                     SegmentIndex ey,
                                                     double cutoff,
                                                     std::size_t budget);

// Concurrent memo for compiled sets.
class PathCache {
public:
  explicit PathCache(const MetricGraph& g) : g_(g) {}
  std::shared_ptr<const CompiledPathSet> get(SegmentIndex ex, SegmentIndex ey,
                                             double cutoff, std::size_t budget);
  const MetricGraph& graph() const { return g_; }

private:
  const MetricGraph& g_;
  std::mutex mu_;
  std::map<std::tuple<int, int, double>, std::shared_ptr<const CompiledPathSet>> memo_;
};

}  // namespace mgk
