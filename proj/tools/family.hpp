#pragma once

// Shared test-function family for the gradient-ratio sweeps: per segment, a
// short ramp hugging the minus end (the vertex-side worst case) and a wide
// interior plateau bump.  Measurement points sit near the vertices, where the
// ratio peaks, plus one interior point per segment.

#include <algorithm>
#include <map>
#include <memory>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/grid.hpp"
#include "mgk/semigroup.hpp"

namespace fam {

inline std::vector<mgk::EdgeDescriptor> ramp_member(const mgk::MetricGraph& g,
                                                    mgk::SegmentIndex s) {
  std::vector<mgk::EdgeDescriptor> ds(g.segment_count());
  double len = g.segment(s).length;
  double w = g.segment(s).is_ray() ? 0.005 : std::min(0.005, len / 4);
  ds[s].ramp.push_back({w, w, 1.0});
  // A plateau reaching a shared vertex would jump to the zero value of the
  // other edges there; ramp back down to stay within H^1.  Degree-one ends
  // and rays keep the plateau.
  if (!g.segment(s).is_ray() && g.degree(g.segment(s).v_plus) > 1)
    ds[s].ramp.push_back({len - w, w, -1.0});
  return ds;
}

inline std::vector<mgk::EdgeDescriptor> bump_member(const mgk::MetricGraph& g,
                                                    mgk::SegmentIndex s) {
  std::vector<mgk::EdgeDescriptor> ds(g.segment_count());
  if (g.segment(s).is_ray()) {
    ds[s].ramp.push_back({0.3, 0.2, 1.0});
    ds[s].ramp.push_back({0.9, 0.2, -1.0});
  } else {
    double len = g.segment(s).length;
    ds[s].ramp.push_back({0.25 * len, 0.15 * len, 1.0});
    ds[s].ramp.push_back({0.75 * len, 0.15 * len, -1.0});
  }
  return ds;
}

struct Family {
  std::vector<mgk::GridFunction> members;
  std::vector<mgk::GraphPoint> points;
};

// tmax and eps size the ray truncation of the quadrature grid; both are
// irrelevant on compact graphs.
inline Family build(const mgk::MetricGraph& g, double tmax, double eps) {
  // Members on rays live within 1.1 of the base vertex.
  double cap =
      g.ray_count() > 0 ? mgk::suggested_ray_cap(g, tmax, eps, 1.2) : 0.0;

  std::vector<std::vector<mgk::EdgeDescriptor>> members;
  for (mgk::SegmentIndex s = 0;
       s < static_cast<mgk::SegmentIndex>(g.segment_count()); ++s) {
    members.push_back(ramp_member(g, s));
    members.push_back(bump_member(g, s));
  }
  std::map<mgk::SegmentIndex, std::vector<double>> breaks;
  for (const auto& ds : members)
    for (mgk::SegmentIndex s = 0; s < static_cast<mgk::SegmentIndex>(ds.size());
         ++s)
      ds[s].breakpoints(breaks[s]);
  auto grid = mgk::build_quadrature(g, 0.1, cap, breaks);

  Family out;
  for (auto& ds : members)
    out.members.push_back(mgk::GridFunction::from_descriptors(g, grid, ds));
  for (mgk::SegmentIndex s = 0;
       s < static_cast<mgk::SegmentIndex>(g.segment_count()); ++s) {
    double len = g.segment(s).length;
    out.points.push_back({s, 0.002});
    out.points.push_back({s, 0.004});
    out.points.push_back({s, 0.3 * std::min(len, 1.0)});
    if (!g.segment(s).is_ray()) out.points.push_back({s, len - 0.002});
  }
  return out;
}

}  // namespace fam
