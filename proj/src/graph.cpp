#include "mgk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace mgk {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

// Total length of the union of [lo, hi) intervals clamped to [0, cap].
double interval_union_length(std::vector<std::pair<double, double>> iv, double cap) {
  for (auto& [lo, hi] : iv) {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, cap);
  }
  std::erase_if(iv, [](const auto& p) { return !(p.second > p.first); });
  std::sort(iv.begin(), iv.end());
  double total = 0, cur_lo = 0, cur_hi = -1;
  bool open = false;
  for (const auto& [lo, hi] : iv) {
    if (!open || lo > cur_hi) {
      if (open) total += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
      open = true;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

}  // namespace

MetricGraph MetricGraph::build(const GraphSpec& spec) {
  MetricGraph g;
  for (const auto& v : spec.vertices) {
    if (v.id.empty()) fail("vertex with empty id");
    if (g.find_vertex(v.id) >= 0) fail("duplicate vertex id: " + v.id);
    g.vertex_ids_.push_back(v.id);
  }
  auto need_vertex = [&](const std::string& id, const std::string& owner) {
    VertexIndex v = g.find_vertex(id);
    if (v < 0) fail("segment " + owner + " references unknown vertex: " + id);
    return v;
  };
  auto check_seg_id = [&](const std::string& id) {
    if (id.empty()) fail("segment with empty id");
    if (g.find_segment(id) >= 0) fail("duplicate segment id: " + id);
  };

  for (const auto& e : spec.edges) {
    check_seg_id(e.id);
    if (!(e.length > 0) || !std::isfinite(e.length))
      fail("edge " + e.id + ": length must be positive and finite");
    VertexIndex a = need_vertex(e.v_minus, e.id);
    VertexIndex b = need_vertex(e.v_plus, e.id);
    if (a == b) {
      // Loop: split into two halves around a fresh midpoint vertex.  The
      // midpoint has degree 2 and is invisible to the heat flow.
      std::string mid = e.id + "__mid";
      while (g.find_vertex(mid) >= 0) mid += "_";
      g.vertex_ids_.push_back(mid);
      VertexIndex m = g.vertex_count() - 1;
      check_seg_id(e.id + "__a");
      check_seg_id(e.id + "__b");
      g.segments_.push_back({e.id + "__a", a, m, e.length / 2});
      g.segments_.push_back({e.id + "__b", m, b, e.length / 2});
    } else {
      g.segments_.push_back({e.id, a, b, e.length});
    }
  }
  g.n_edges_ = static_cast<int>(g.segments_.size());
  for (const auto& r : spec.rays) {
    check_seg_id(r.id);
    VertexIndex b = need_vertex(r.base, r.id);
    g.segments_.push_back({r.id, b, -1, kInf});
  }
  g.finalize();
  return g;
}

void MetricGraph::finalize() {
  const int nv = vertex_count();
  adj_.assign(nv, {});
  for (SegmentIndex s = 0; s < segment_count(); ++s) {
    adj_[segments_[s].v_minus].push_back({s, 0});
    if (!segments_[s].is_ray()) adj_[segments_[s].v_plus].push_back({s, 1});
  }

  total_length_ = 0;
  r_min_ = kInf;
  double r_max = 0;
  for (int s = 0; s < n_edges_; ++s) {
    total_length_ += segments_[s].length;
    r_min_ = std::min(r_min_, segments_[s].length);
    r_max = std::max(r_max, segments_[s].length);
  }

  // All-pairs vertex distances over finite edges (Floyd-Warshall; graphs at
  // this scale have a handful of vertices).
  vdist_.assign(nv, std::vector<double>(nv, kInf));
  for (int v = 0; v < nv; ++v) vdist_[v][v] = 0;
  for (int s = 0; s < n_edges_; ++s) {
    int a = segments_[s].v_minus, b = segments_[s].v_plus;
    vdist_[a][b] = std::min(vdist_[a][b], segments_[s].length);
    vdist_[b][a] = vdist_[a][b];
  }
  for (int k = 0; k < nv; ++k)
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        vdist_[i][j] = std::min(vdist_[i][j], vdist_[i][k] + vdist_[k][j]);

  comp_.assign(nv, -1);
  n_components_ = 0;
  for (int v = 0; v < nv; ++v) {
    if (comp_[v] >= 0) continue;
    int c = n_components_++;
    std::queue<int> bfs;
    bfs.push(v);
    comp_[v] = c;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (const auto& inc : adj_[u]) {
        if (segments_[inc.seg].is_ray()) continue;
        int w = endpoint(inc.seg, 1 - inc.end);
        if (comp_[w] < 0) {
          comp_[w] = c;
          bfs.push(w);
        }
      }
    }
  }

  double dmax = 0;
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j)
      if (std::isfinite(vdist_[i][j])) dmax = std::max(dmax, vdist_[i][j]);
  diam_bound_ = n_edges_ > 0 ? dmax + r_max : 0.0;
}

VertexIndex MetricGraph::find_vertex(const std::string& id) const {
  for (int v = 0; v < vertex_count(); ++v)
    if (vertex_ids_[v] == id) return v;
  return -1;
}

SegmentIndex MetricGraph::find_segment(const std::string& id) const {
  for (int s = 0; s < segment_count(); ++s)
    if (segments_[s].id == id) return s;
  return -1;
}

int MetricGraph::max_degree() const {
  int d = 0;
  for (const auto& a : adj_) d = std::max(d, static_cast<int>(a.size()));
  return d;
}

int MetricGraph::orientation_sign(VertexIndex v, SegmentIndex s) const {
  const Segment& sg = segments_[s];
  if (sg.v_minus == v) return 1;
  if (sg.v_plus == v) return -1;
  fail("vertex " + vertex_ids_[v] + " is not an endpoint of segment " + sg.id);
}

bool MetricGraph::contains(const GraphPoint& p) const {
  if (p.seg < 0 || p.seg >= segment_count()) return false;
  if (!(p.x >= 0)) return false;
  return segments_[p.seg].is_ray() ? std::isfinite(p.x) : p.x <= segments_[p.seg].length;
}

bool MetricGraph::at_vertex(const GraphPoint& p, VertexIndex* v) const {
  const Segment& sg = segments_[p.seg];
  if (p.x == 0) {
    if (v) *v = sg.v_minus;
    return true;
  }
  if (!sg.is_ray() && p.x == sg.length) {
    if (v) *v = sg.v_plus;
    return true;
  }
  return false;
}

double MetricGraph::geodesic_distance(const GraphPoint& p, const GraphPoint& q) const {
  double best = kInf;
  if (p.seg == q.seg) best = std::abs(p.x - q.x);
  const Segment& sp = segments_[p.seg];
  const Segment& sq = segments_[q.seg];
  const int p_ends = sp.is_ray() ? 1 : 2;
  const int q_ends = sq.is_ray() ? 1 : 2;
  for (int i = 0; i < p_ends; ++i)
    for (int j = 0; j < q_ends; ++j) {
      double off_p = std::abs(p.x - endpoint_coord(p.seg, i));
      double off_q = std::abs(q.x - endpoint_coord(q.seg, j));
      double mid = vdist_[endpoint(p.seg, i)][endpoint(q.seg, j)];
      best = std::min(best, off_p + mid + off_q);
    }
  return best;
}

double MetricGraph::ball_measure(const GraphPoint& x, double r) const {
  if (!(r > 0)) return 0;
  // Distance from x to each vertex (through any route).
  const int nv = vertex_count();
  std::vector<double> dv(nv, kInf);
  const Segment& sx = segments_[x.seg];
  const int x_ends = sx.is_ray() ? 1 : 2;
  for (int v = 0; v < nv; ++v)
    for (int i = 0; i < x_ends; ++i)
      dv[v] = std::min(dv[v], std::abs(x.x - endpoint_coord(x.seg, i)) +
                                  vdist_[endpoint(x.seg, i)][v]);

  double total = 0;
  for (SegmentIndex s = 0; s < segment_count(); ++s) {
    const Segment& sg = segments_[s];
    std::vector<std::pair<double, double>> iv;
    if (s == x.seg) iv.push_back({x.x - r, x.x + r});
    iv.push_back({-1.0, r - dv[sg.v_minus]});  // entered from the minus end
    double cap;
    if (sg.is_ray()) {
      cap = x.x + r + 1;  // anything beyond is unreachable within r
    } else {
      cap = sg.length;
      iv.push_back({sg.length - (r - dv[sg.v_plus]), sg.length + 1});
    }
    total += interval_union_length(std::move(iv), cap);
  }
  return total;
}

MetricGraph MetricGraph::parse(const std::string& text) {
  GraphSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    auto bad = [&](const std::string& why) {
      fail("graph text line " + std::to_string(lineno) + ": " + why);
    };
    if (kind == "vertex") {
      std::string id;
      if (!(ls >> id)) bad("expected: vertex <id>");
      spec.vertices.push_back({id});
    } else if (kind == "edge") {
      GraphSpecEdge e;
      if (!(ls >> e.id >> e.v_minus >> e.v_plus >> e.length))
        bad("expected: edge <id> <v-> <v+> <length>");
      spec.edges.push_back(e);
    } else if (kind == "ray") {
      GraphSpecRay r;
      if (!(ls >> r.id >> r.base)) bad("expected: ray <id> <v->");
      spec.rays.push_back(r);
    } else {
      bad("unknown directive: " + kind);
    }
    std::string extra;
    if (ls >> extra) fail("graph text line " + std::to_string(lineno) +
                          ": trailing token: " + extra);
  }
  return build(spec);
}

std::string MetricGraph::serialize() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& id : vertex_ids_) out << "vertex " << id << "\n";
  for (const auto& s : segments_) {
    if (s.is_ray())
      out << "ray " << s.id << " " << vertex_ids_[s.v_minus] << "\n";
    else
      out << "edge " << s.id << " " << vertex_ids_[s.v_minus] << " "
          << vertex_ids_[s.v_plus] << " " << s.length << "\n";
  }
  return out.str();
}

}  // namespace mgk
