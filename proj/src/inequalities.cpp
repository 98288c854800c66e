#include "mgk/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mgk/grid.hpp"
#include "mgk/spectral.hpp"

namespace mgk {

namespace {

constexpr double kVertexTol = 1e-12;

// Endpoint sitting exactly on a vertex, up to roundoff.
bool at_minus(const Segment& sg, double x) { return x <= kVertexTol; }
bool at_plus(const Segment& sg, double x) {
  return !sg.is_ray() && x >= sg.length - kVertexTol;
}

struct CombCount {
  int count = 0;
  bool valid = true;
};

// Interior endpoints each contribute one boundary point.  Endpoints on a
// vertex contribute nothing when the set covers every incidence of that
// vertex and poison the count otherwise: the jump structure there depends on
// how many branches enter the set, and a single integer cannot represent it.
CombCount combinatorial_count(const MetricGraph& g, const IntervalSet& e) {
  CombCount out;
  std::map<VertexIndex, std::set<std::pair<SegmentIndex, int>>> covered;
  for (const auto& part : e.parts) {
    const Segment& sg = g.segment(part.seg);
    if (at_minus(sg, part.a)) {
      covered[sg.v_minus].insert({part.seg, 0});
    } else {
      ++out.count;
    }
    if (at_plus(sg, part.b)) {
      covered[sg.v_plus].insert({part.seg, 1});
    } else {
      ++out.count;
    }
  }
  for (const auto& [v, inc] : covered) {
    if (static_cast<int>(inc.size()) != g.degree(v)) out.valid = false;
  }
  return out;
}

// Quadrature nodes over the set itself, fine enough for the smallest heat
// scales used here.
struct SetQuadrature {
  std::vector<GraphPoint> y;
  std::vector<double> w;
};

SetQuadrature set_quadrature(const IntervalSet& e, double max_panel) {
  SetQuadrature q;
  const GaussRule& rule = gauss_legendre(16);
  for (const auto& part : e.parts) {
    double len = part.b - part.a;
    int panels = std::max(1, static_cast<int>(std::ceil(len / max_panel)));
    double h = len / panels;
    for (int p = 0; p < panels; ++p) {
      double lo = part.a + p * h;
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        q.y.push_back({part.seg, lo + 0.5 * h * (1.0 + rule.x[k])});
        q.w.push_back(0.5 * h * rule.w[k]);
      }
    }
  }
  return q;
}

// d/dx P_t 1_E at x, by integrating the gradient kernel over the set.
double set_gradient(const KernelEngine& eng, double t, const GraphPoint& x,
                    const SetQuadrature& q) {
  double s = 0;
  for (std::size_t i = 0; i < q.y.size(); ++i)
    s += q.w[i] * eng.gradient(t, x, q.y[i]).value;
  return s;
}

double set_heat(const KernelEngine& eng, double t, const GraphPoint& x,
                const SetQuadrature& q) {
  double s = 0;
  for (std::size_t i = 0; i < q.y.size(); ++i)
    s += q.w[i] * eng.heat(t, x, q.y[i]).value;
  return s;
}

std::map<SegmentIndex, std::vector<double>> boundary_breaks(
    const MetricGraph& g, const IntervalSet& e) {
  std::map<SegmentIndex, std::vector<double>> breaks;
  for (const auto& part : e.parts) {
    const Segment& sg = g.segment(part.seg);
    if (!at_minus(sg, part.a)) breaks[part.seg].push_back(part.a);
    if (!at_plus(sg, part.b)) breaks[part.seg].push_back(part.b);
  }
  return breaks;
}

double ray_cap_for(const MetricGraph& g, const IntervalSet& e, double t) {
  if (g.ray_count() == 0) return 0;
  double far = 0;
  for (const auto& part : e.parts) far = std::max(far, part.b);
  return far + g.total_edge_length() + std::sqrt(4 * t * 40.0) + 1.0;
}

// Integral of |d/dx P_t 1_E| over the graph.  The integrand has kinks where
// the derivative changes sign; those zeros are located by bisection between
// sign changes on a scan grid and promoted to panel breaks before the final
// pass.
double gradient_l1(const MetricGraph& g, const IntervalSet& e, double t,
                   const KernelOptions& opt) {
  KernelEngine eng(g, opt);
  SetQuadrature q = set_quadrature(e, 0.04);
  double cap = ray_cap_for(g, e, t);
  auto breaks = boundary_breaks(g, e);
  double panel = std::min(0.05, 2.0 * std::sqrt(2 * t));

  auto scan = build_quadrature(g, panel, cap, breaks);
  auto refined = breaks;
  for (SegmentIndex s = 0; s < static_cast<SegmentIndex>(scan->seg.size());
       ++s) {
    const auto& xs = scan->seg[s].x;
    double prev_x = 0, prev_d = 0;
    bool have_prev = false;
    for (double x : xs) {
      double d = set_gradient(eng, t, {s, x}, q);
      if (have_prev && ((prev_d < 0) != (d < 0)) &&
          std::max(std::fabs(prev_d), std::fabs(d)) > 1e-300) {
        double lo = prev_x, hi = x, flo = prev_d;
        for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
          double mid = 0.5 * (lo + hi);
          double fm = set_gradient(eng, t, {s, mid}, q);
          if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        refined[s].push_back(0.5 * (lo + hi));
      }
      prev_x = x;
      prev_d = d;
      have_prev = true;
    }
  }

  auto fine = build_quadrature(g, panel, cap, refined);
  double total = 0;
  for (SegmentIndex s = 0; s < static_cast<SegmentIndex>(fine->seg.size());
       ++s) {
    const auto& sn = fine->seg[s];
    for (std::size_t i = 0; i < sn.x.size(); ++i)
      total += sn.w[i] * std::fabs(set_gradient(eng, t, {s, sn.x[i]}, q));
  }
  return total;
}

bool inside(const IntervalSet& e, const GraphPoint& p) {
  for (const auto& part : e.parts)
    if (part.seg == p.seg && p.x > part.a && p.x < part.b) return true;
  return false;
}

}  // namespace

void validate_interval_set(const MetricGraph& g, const IntervalSet& e) {
  if (e.parts.empty())
    throw std::invalid_argument("interval set has no parts");
  std::map<SegmentIndex, std::vector<std::pair<double, double>>> by_seg;
  for (const auto& part : e.parts) {
    if (part.seg < 0 || part.seg >= static_cast<SegmentIndex>(g.segment_count()))
      throw std::invalid_argument("interval set references a missing segment");
    const Segment& sg = g.segment(part.seg);
    if (!(std::isfinite(part.a) && std::isfinite(part.b)))
      throw std::invalid_argument("interval endpoints must be finite");
    if (!(part.a >= 0 && part.b > part.a))
      throw std::invalid_argument("interval needs 0 <= a < b");
    if (!sg.is_ray() && part.b > sg.length + kVertexTol)
      throw std::invalid_argument("interval leaves segment " + sg.id);
    by_seg[part.seg].push_back({part.a, part.b});
  }
  for (auto& [s, list] : by_seg) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i].first <= list[i - 1].second + kVertexTol)
        throw std::invalid_argument(
            "intervals on segment " + g.segment(s).id +
            " overlap or touch; merge them first");
  }
}

PerimeterResult perimeter(const MetricGraph& g, const IntervalSet& e,
                          const KernelOptions& opt,
                          const std::vector<double>& probe_times) {
  validate_interval_set(g, e);
  PerimeterResult out;
  CombCount c = combinatorial_count(g, e);
  out.combinatorial = c.count;
  out.combinatorial_valid = c.valid;

  if (probe_times.empty())
    throw std::invalid_argument("perimeter needs at least one probe time");
  std::vector<double> ts = probe_times;
  std::sort(ts.begin(), ts.end(), std::greater<double>());
  for (double t : ts) {
    if (!(t > 0)) throw std::invalid_argument("probe times must be positive");
    out.heat_at.push_back(gradient_l1(g, e, t, opt));
  }
  // Geometric extrapolation on the increments.  A sqrt(t) boundary-layer
  // error shows up as increment ratio 1/sqrt(2) at 2:1 time refinement and
  // gets the classical Richardson answer; the Gaussian-tail errors of well
  // separated boundaries shrink much faster and then the last raw value is
  // already nearly converged, which a fitted ratio respects where a fixed
  // sqrt(t) model would overshoot.
  std::size_t n = out.heat_at.size();
  out.heat_estimate = out.heat_at[n - 1];
  if (n >= 2) {
    double d2 = out.heat_at[n - 1] - out.heat_at[n - 2];
    double r = 1.0 / std::sqrt(2.0);
    if (n >= 3) {
      double d1 = out.heat_at[n - 2] - out.heat_at[n - 3];
      r = (std::fabs(d1) > 1e-14 * (1 + std::fabs(out.heat_estimate)))
              ? d2 / d1
              : 0.0;
    }
    if (r > 0 && r < 0.95) out.heat_estimate += d2 * r / (1 - r);
  }
  return out;
}

std::pair<double, double> l1_heat_bound_check(const MetricGraph& g,
                                              const IntervalSet& e, double t,
                                              double c1,
                                              const KernelOptions& opt) {
  validate_interval_set(g, e);
  if (!(t > 0)) throw std::invalid_argument("time must be positive");

  KernelEngine eng(g, opt);
  SetQuadrature q = set_quadrature(e, 0.04);
  double cap = ray_cap_for(g, e, t);
  auto grid = build_quadrature(g, std::min(0.05, 4.0 * std::sqrt(t)), cap,
                               boundary_breaks(g, e));

  // P_t 1_E - 1_E keeps one sign on each side of the set's boundary (the
  // flow stays in [0, 1]), so panels split at the boundary integrate the
  // absolute value exactly.
  double lhs = 0;
  for (SegmentIndex s = 0; s < static_cast<SegmentIndex>(grid->seg.size());
       ++s) {
    const auto& sn = grid->seg[s];
    for (std::size_t i = 0; i < sn.x.size(); ++i) {
      GraphPoint x{s, sn.x[i]};
      double p = set_heat(eng, t, x, q);
      double ind = inside(e, x) ? 1.0 : 0.0;
      lhs += sn.w[i] * std::fabs(p - ind);
    }
  }

  CombCount c = combinatorial_count(g, e);
  double per = c.valid ? static_cast<double>(c.count)
                       : perimeter(g, e, opt).heat_estimate;
  double rhs = c1 * c1 * c1 * std::sqrt(2 * t) * per;
  return {lhs, rhs};
}

namespace {

// One grid-search candidate: an interval with endpoints on the lattice,
// flagged where it touches a vertex.
struct Candidate {
  SegmentIndex seg;
  int i, j, res;
  double a, b, mu;
};

// Boundary count of a union of candidates under the vertex-coverage rule;
// valid = false when some touched vertex is only partially covered.
CombCount union_count(const MetricGraph& g, const Candidate* const* cs,
                      int n) {
  CombCount out;
  // Vertex -> number of covered incidences; disjointness makes repeats
  // impossible, so counting suffices.
  VertexIndex touched[4];
  int cover[4];
  int nt = 0;
  auto touch = [&](VertexIndex v) {
    for (int k = 0; k < nt; ++k)
      if (touched[k] == v) {
        ++cover[k];
        return;
      }
    touched[nt] = v;
    cover[nt] = 1;
    ++nt;
  };
  for (int k = 0; k < n; ++k) {
    const Candidate& c = *cs[k];
    const Segment& sg = g.segment(c.seg);
    if (c.i == 0)
      touch(sg.v_minus);
    else
      ++out.count;
    if (c.j == c.res)
      touch(sg.v_plus);
    else
      ++out.count;
  }
  for (int k = 0; k < nt; ++k)
    if (cover[k] != g.degree(touched[k])) out.valid = false;
  return out;
}

std::vector<Candidate> lattice_candidates(const MetricGraph& g, int res) {
  std::vector<Candidate> cs;
  for (SegmentIndex s = 0; s < static_cast<SegmentIndex>(g.segment_count());
       ++s) {
    double len = g.segment(s).length;
    for (int i = 0; i < res; ++i)
      for (int j = i + 1; j <= res; ++j)
        cs.push_back({s, i, j, res, len * i / res, len * j / res,
                      len * (j - i) / res});
  }
  return cs;
}

}  // namespace

CheegerResult cheeger_constant(const MetricGraph& g, int resolution) {
  if (g.ray_count() > 0)
    throw std::invalid_argument("Cheeger search requires a compact graph");
  if (resolution < 2)
    throw std::invalid_argument("resolution must be at least 2");

  double cap = 0.5 * g.total_edge_length() * (1 + 1e-12);
  CheegerResult best;

  auto consider = [&](const Candidate* const* cs, int n) {
    double mu = 0;
    for (int k = 0; k < n; ++k) mu += cs[k]->mu;
    if (mu <= 0 || mu > cap) return;
    CombCount c = union_count(g, cs, n);
    if (!c.valid || c.count == 0) return;
    double h = c.count / mu;
    if (h < best.h) {
      best.h = h;
      best.best.parts.clear();
      for (int k = 0; k < n; ++k)
        best.best.parts.push_back({cs[k]->seg, cs[k]->a, cs[k]->b});
    }
  };

  auto singles = lattice_candidates(g, resolution);
  for (const auto& c : singles) {
    const Candidate* p = &c;
    consider(&p, 1);
  }

  auto halves = lattice_candidates(g, std::max(2, resolution / 2));
  for (std::size_t i = 0; i < halves.size(); ++i) {
    for (std::size_t j = i + 1; j < halves.size(); ++j) {
      const Candidate& c1 = halves[i];
      const Candidate& c2 = halves[j];
      // Same-segment pairs must be separated; touching unions are already
      // singles.
      if (c1.seg == c2.seg && c2.i <= c1.j && c1.i <= c2.j) continue;
      const Candidate* ps[2] = {&c1, &c2};
      consider(ps, 2);
    }
  }
  return best;
}

BuserResult buser_check(const MetricGraph& g, double c1, int resolution) {
  BuserResult out;
  CheegerResult ch = cheeger_constant(g, resolution);
  out.h = ch.h;

  double lam_max = 10.0;
  for (int tries = 0; tries < 8 && out.lambda1 <= 0; ++tries) {
    EigenBasis b = eigensolve(g, lam_max);
    for (const EigenPair& p : b.pairs)
      if (p.lambda > 1e-9) {
        out.lambda1 = p.lambda;
        break;
      }
    lam_max *= 4;
  }
  if (out.lambda1 <= 0)
    throw std::runtime_error("spectral gap not found below the search bound");

  double e_factor = 1.0 - std::exp(-1.0);
  out.upper = 2.0 * std::pow(c1, 6) / (e_factor * e_factor) * out.h * out.h;
  out.lower = 0.25 * out.h * out.h;
  out.upper_ok = out.lambda1 <= out.upper * (1 + 1e-9);
  out.lower_ok = out.lambda1 >= out.lower * (1 - 1e-9);
  return out;
}

MidpointSet midpoint_set(const MetricGraph& g, const IntervalSet& a,
                         const IntervalSet& b, double t) {
  validate_interval_set(g, a);
  validate_interval_set(g, b);
  if (!(t >= 0 && t <= 1))
    throw std::invalid_argument("interpolation time must lie in [0, 1]");
  for (const auto& e : g.segments())
    if (!e.is_ray())
      throw std::invalid_argument("midpoint sets are supported on spiders only");

  MidpointSet out;
  out.t = t;
  if (a.parts.size() != 1) return out;
  const Interval& pa = a.parts[0];
  if (b.parts.empty()) return out;
  const Interval& pb0 = b.parts[0];
  for (const auto& pb : b.parts) {
    if (pb.seg == pa.seg) return out;
    if (std::fabs(pb.a - pb0.a) > kVertexTol ||
        std::fabs(pb.b - pb0.b) > kVertexTol)
      return out;
  }

  // Geodesics from B to A pass the center; the point t of the way along is
  // at coordinate t*alpha - (1-t)*beta on A's leg, provided that stays
  // nonnegative over the whole rectangle of endpoints.
  double lower = t * pa.a - (1 - t) * pb0.b;
  double upper = t * pa.b - (1 - t) * pb0.a;
  if (lower < -kVertexTol) return out;
  out.supported = true;
  out.part = {pa.seg, std::max(lower, 0.0), upper};
  out.measure = upper - lower;
  return out;
}

std::vector<MassAtom> discretize_interval_set(const IntervalSet& e,
                                              int per_interval) {
  if (per_interval < 1)
    throw std::invalid_argument("need at least one atom per interval");
  std::vector<MassAtom> atoms;
  double total = e.measure();
  for (const auto& part : e.parts) {
    double cell = (part.b - part.a) / per_interval;
    for (int k = 0; k < per_interval; ++k)
      atoms.push_back({{part.seg, part.a + (k + 0.5) * cell}, cell / total});
  }
  return atoms;
}

namespace {

BMReport bm_evaluate(const MetricGraph& g, double k, double scale,
                     int atoms_per_interval) {
  IntervalSet a{{{0, scale, 2 * scale}}};
  IntervalSet b{{{1, scale, 2 * scale}, {2, scale, 2 * scale}}};

  BMReport rep;
  rep.scale = scale;
  rep.w2 = wasserstein2(g, discretize_interval_set(a, atoms_per_interval),
                        discretize_interval_set(b, atoms_per_interval));
  double w2sq = rep.w2 * rep.w2;
  double mu_a = a.measure(), mu_b = b.measure();

  for (double t : {0.70, 0.75, 0.80, 0.85, 0.90, 0.95}) {
    MidpointSet ms = midpoint_set(g, a, b, t);
    if (!ms.supported) continue;
    BMRow row;
    row.t = t;
    row.lhs = std::log(ms.measure);
    row.rhs = t * std::log(mu_a) + (1 - t) * std::log(mu_b) +
              0.5 * k * t * (1 - t) * w2sq;
    row.margin = row.rhs - row.lhs;
    rep.rows.push_back(row);
    if (row.margin > rep.best_margin) {
      rep.best_margin = row.margin;
      rep.best_t = t;
    }
  }
  rep.violated = rep.best_margin > 0;
  return rep;
}

}  // namespace

BMReport brunn_minkowski_violation(const MetricGraph& g, double k,
                                   double scale) {
  if (!(scale > 0) || !std::isfinite(scale) || !std::isfinite(k))
    throw std::invalid_argument("scale must be positive and finite");
  if (g.segment_count() < 3 || g.ray_count() != g.segment_count())
    throw std::invalid_argument(
        "the construction needs a spider with at least three legs");
  VertexIndex base = g.segment(0).v_minus;
  for (SegmentIndex s = 1; s < 3; ++s)
    if (g.segment(s).v_minus != base)
      throw std::invalid_argument("the first three legs must share the center");

  BMReport rep = bm_evaluate(g, k, scale, 64);
  if (rep.violated || k >= 0) return rep;

  // Negative curvature parameter: shrink until the concavity defect of the
  // log wins against the transport term.  The margin grows monotonically as
  // the scale drops, so bisect for a comfortably positive target.
  double target = 0.5 * 0.3 * std::log(2.0);
  double lo = scale * std::pow(2.0, -24), hi = scale;
  for (int it = 0; it < 40 && hi - lo > 1e-3 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    BMReport probe = bm_evaluate(g, k, mid, 32);
    if (probe.best_margin > target)
      lo = mid;
    else
      hi = mid;
  }
  return bm_evaluate(g, k, lo, 64);
}

}  // namespace mgk
