#include "mgk/paths.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "mgk/errors.hpp"

namespace mgk {

namespace {

struct Walk {
  const MetricGraph& g;
  SegmentIndex ey;
  double cutoff;
  std::size_t budget;
  // Lower bound on remaining inner length: shortest vertex route into ey.
  std::vector<double> to_entry;
  // Aggregation key: two paths with equal exit coordinate, entry coordinate,
  // inner length and exit sign contribute identically shaped terms to every
  // kernel, so their amplitudes just add.  Collapsing them keeps compiled
  // sets small even when the raw path count grows exponentially (equilateral
  // graphs collapse almost completely).
  using AggKey = std::tuple<double, double, double, double>;
  std::map<AggKey, std::pair<double, double>>* agg;  // S sum, form-S sum
  std::vector<CombinatorialPath>* full_out;  // set for the public enumeration
  bool keep_zero = false;  // keep zero-amplitude paths (public listings only)
  bool found_trivial = false;
  std::size_t enumerated = 0;
  CombinatorialPath scratch;

  void record(VertexIndex v, const Incidence& inc, double acc, double S) {
    double c_entry = g.endpoint_coord(inc.seg, inc.end);
    double sigma_exit = g.orientation_sign(scratch.vertices.front(), scratch.edges.front());
    double sigma_entry = g.orientation_sign(v, inc.seg);
    if (agg) {
      double c_exit =
          g.endpoint_coord(scratch.edges.front(), scratch.vertices.front() ==
                  g.segment(scratch.edges.front()).v_minus ? 0 : 1);
      auto& slot = (*agg)[{c_exit, c_entry, acc, sigma_exit}];
      slot.first += S;
      slot.second += -sigma_exit * sigma_entry * S;
      if (++enumerated > budget)
        throw ToleranceError("path budget exceeded", kInf);
    }
    if (full_out) {
      CombinatorialPath c = scratch;
      c.edges.push_back(inc.seg);
      full_out->push_back(std::move(c));
      if (full_out->size() > budget)
        throw ToleranceError("path budget exceeded", kInf);
    }
  }

  void visit(VertexIndex v, SegmentIndex prev, double acc, double S) {
    if (acc + to_entry[v] > cutoff) return;
    const double open = 2.0 / g.degree(v);
    for (const Incidence& inc : g.incident(v)) {
      double S2 = S * (open - (inc.seg == prev ? 1.0 : 0.0));
      if (S2 == 0.0 && !keep_zero) continue;
      if (inc.seg == ey && acc <= cutoff) record(v, inc, acc, S2);
      const Segment& sg = g.segment(inc.seg);
      if (sg.is_ray()) continue;
      double acc2 = acc + sg.length;
      VertexIndex w = g.endpoint(inc.seg, 1 - inc.end);
      if (acc2 + to_entry[w] > cutoff) continue;
      scratch.edges.push_back(inc.seg);
      scratch.vertices.push_back(w);
      visit(w, inc.seg, acc2, S2);
      scratch.edges.pop_back();
      scratch.vertices.pop_back();
    }
  }

  void run(SegmentIndex ex) {
    const Segment& sx = g.segment(ex);
    if (ex == ey) {
      found_trivial = true;
      if (full_out) full_out->push_back({{ex}, {}});
    }
    const int ends = sx.is_ray() ? 1 : 2;
    for (int i = 0; i < ends; ++i) {
      VertexIndex v0 = g.endpoint(ex, i);
      scratch.edges = {ex};
      scratch.vertices = {v0};
      visit(v0, ex, 0.0, 1.0);
    }
    scratch.edges.clear();
    scratch.vertices.clear();
  }
};

Walk make_walk(const MetricGraph& g, SegmentIndex ey, double cutoff, std::size_t budget) {
  Walk w{g, ey, cutoff, budget, {}, nullptr, nullptr, false, false, 0, {}};
  const Segment& sy = g.segment(ey);
  w.to_entry.assign(g.vertex_count(), kInf);
  for (int v = 0; v < g.vertex_count(); ++v) {
    w.to_entry[v] = g.vertex_distance(v, sy.v_minus);
    if (!sy.is_ray())
      w.to_entry[v] = std::min(w.to_entry[v], g.vertex_distance(v, sy.v_plus));
  }
  return w;
}

}  // namespace

std::shared_ptr<const CompiledPathSet> compile_paths(const MetricGraph& g,
                                                     SegmentIndex ex,
                                                     SegmentIndex ey,
                                                     double cutoff,
                                                     std::size_t budget) {
  auto set = std::make_shared<CompiledPathSet>();
  Walk w = make_walk(g, ey, cutoff, budget);
  std::map<Walk::AggKey, std::pair<double, double>> agg;
  w.agg = &agg;
  w.run(ex);
  set->has_trivial = w.found_trivial;
  set->enumerated = w.enumerated;
  for (const auto& [key, amps] : agg) {
    set->exit_coord.push_back(std::get<0>(key));
    set->entry_coord.push_back(std::get<1>(key));
    set->inner_len.push_back(std::get<2>(key));
    set->sigma_exit.push_back(std::get<3>(key));
    set->amplitude.push_back(amps.first);
    set->form_amplitude.push_back(amps.second);
  }
  return set;
}

std::shared_ptr<const CompiledPathSet> PathCache::get(SegmentIndex ex,
                                                      SegmentIndex ey,
                                                      double cutoff,
                                                      std::size_t budget) {
  auto key = std::make_tuple(ex, ey, cutoff);
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  auto set = compile_paths(g_, ex, ey, cutoff, budget);
  std::lock_guard lock(mu_);
  auto [it, inserted] = memo_.emplace(key, std::move(set));
  return it->second;
}

std::vector<CombinatorialPath> enumerate_paths(const MetricGraph& g,
                                               const GraphPoint& x,
                                               const GraphPoint& y,
                                               double L_max) {
  if (!g.contains(x) || !g.contains(y))
    throw std::invalid_argument("enumerate_paths: point outside the graph");
  double rho = g.geodesic_distance(x, y);
  if (L_max < rho)
    throw std::invalid_argument(
        "enumerate_paths: L_max below the geodesic distance excludes every path");

  std::vector<CombinatorialPath> all;
  Walk w = make_walk(g, y.seg, L_max, 10'000'000);
  w.full_out = &all;
  w.keep_zero = true;
  w.run(x.seg);

  std::vector<CombinatorialPath> kept;
  for (auto& c : all)
    if (path_geometry(g, c, x, y).length <= L_max) kept.push_back(std::move(c));
  // Trivial first, then by order for reproducible listings.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.order() < b.order(); });
  return kept;
}

double scattering_amplitude(const MetricGraph& g, const CombinatorialPath& c) {
  double S = 1;
  for (std::size_t k = 0; k < c.vertices.size(); ++k) {
    double open = 2.0 / g.degree(c.vertices[k]);
    S *= open - (c.edges[k] == c.edges[k + 1] ? 1.0 : 0.0);
  }
  return S;
}

double form_scattering_amplitude(const MetricGraph& g, const CombinatorialPath& c) {
  if (c.trivial()) return 1.0;
  double se = g.orientation_sign(c.vertices.front(), c.edges.front());
  double sn = g.orientation_sign(c.vertices.back(), c.edges.back());
  return -se * sn * scattering_amplitude(g, c);
}

PathGeometry path_geometry(const MetricGraph& g, const CombinatorialPath& c,
                           const GraphPoint& x, const GraphPoint& y) {
  PathGeometry pg;
  pg.order = c.order();
  if (c.trivial()) {
    if (x.seg != c.edges.front() || y.seg != c.edges.front())
      throw std::invalid_argument("path_geometry: trivial path needs x, y on its segment");
    pg.length = std::abs(x.x - y.x);
    return pg;
  }
  if (x.seg != c.edges.front() || y.seg != c.edges.back())
    throw std::invalid_argument("path_geometry: x or y not on the path's end segments");
  double exit_c = g.endpoint_coord(
      c.edges.front(), c.vertices.front() == g.segment(c.edges.front()).v_minus ? 0 : 1);
  double entry_c = g.endpoint_coord(
      c.edges.back(), c.vertices.back() == g.segment(c.edges.back()).v_minus ? 0 : 1);
  pg.length = std::abs(x.x - exit_c) + std::abs(y.x - entry_c);
  for (std::size_t k = 1; k + 1 < c.edges.size(); ++k)
    pg.length += g.segment(c.edges[k]).length;
  pg.amplitude = scattering_amplitude(g, c);
  pg.sigma_exit = g.orientation_sign(c.vertices.front(), c.edges.front());
  pg.sigma_entry = g.orientation_sign(c.vertices.back(), c.edges.back());
  pg.form_amplitude = -pg.sigma_exit * pg.sigma_entry * pg.amplitude;
  return pg;
}

}  // namespace mgk
