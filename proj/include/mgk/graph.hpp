// graph.hpp — metric graphs: vertices, finite edges with a length and an
// orientation, and rays [0, inf) attached at a single vertex.
//
// Conventions used throughout the library:
//   * every segment carries a coordinate; edge e runs from e- (coordinate 0)
//     to e+ (coordinate length), a ray has only a base vertex at 0;
//   * orientation_sign(v, e) is +1 iff v = e-, -1 iff v = e+;
//   * loops are never stored: build() splits a loop edge into two halves of
//     length r/2 joined at a fresh midpoint vertex, which is transparent for
//     the heat flow (transmission 1, reflection 0 at degree 2).

#pragma once

#include <limits>
#include <string>
#include <vector>

namespace mgk {

using VertexIndex = int;
using SegmentIndex = int;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Segment {
  std::string id;
  VertexIndex v_minus = -1;  // vertex at coordinate 0
  VertexIndex v_plus = -1;   // vertex at coordinate length; -1 for a ray
  double length = kInf;      // +inf for a ray
  bool is_ray() const { return v_plus < 0; }
};

// One attachment of a segment at a vertex. end = 0 means the vertex sits at
// the segment's coordinate 0 (its minus end), end = 1 at coordinate length.
struct Incidence {
  SegmentIndex seg;
  int end;
};

// A point of the graph: a segment index plus a coordinate in [0, length]
// (in [0, inf) on a ray).  Vertices are reachable as coordinate 0 / length;
// a vertex of degree > 1 has several representations, one per incidence.
struct GraphPoint {
  SegmentIndex seg = -1;
  double x = 0.0;
};

struct GraphSpecVertex {
  std::string id;
};
struct GraphSpecEdge {
  std::string id, v_minus, v_plus;
  double length;
};
struct GraphSpecRay {
  std::string id, base;
};

struct GraphSpec {
  std::vector<GraphSpecVertex> vertices;
  std::vector<GraphSpecEdge> edges;
  std::vector<GraphSpecRay> rays;
};

class MetricGraph {
public:
  // Validates and builds.  Throws std::invalid_argument naming the offending
  // id on duplicate ids, unknown endpoints, or nonpositive/nonfinite lengths.
  static MetricGraph build(const GraphSpec& spec);

  // Text format, one directive per line, '#' starts a comment:
  //   vertex <id>
  //   edge <id> <v-> <v+> <length>
  //   ray <id> <v->
  static MetricGraph parse(const std::string& text);
  std::string serialize() const;

  int vertex_count() const { return static_cast<int>(vertex_ids_.size()); }
  int segment_count() const { return static_cast<int>(segments_.size()); }
  int edge_count() const { return n_edges_; }
  int ray_count() const { return segment_count() - n_edges_; }

  const std::string& vertex_id(VertexIndex v) const { return vertex_ids_[v]; }
  const Segment& segment(SegmentIndex s) const { return segments_[s]; }
  const std::vector<Segment>& segments() const { return segments_; }
  VertexIndex find_vertex(const std::string& id) const;    // -1 if absent
  SegmentIndex find_segment(const std::string& id) const;  // -1 if absent

  // All incidences of segments at v; a finite edge with both ends at v would
  // appear twice, but build() guarantees that case never survives.
  const std::vector<Incidence>& incident(VertexIndex v) const { return adj_[v]; }
  int degree(VertexIndex v) const { return static_cast<int>(adj_[v].size()); }
  int max_degree() const;

  // +1 if v = e-, -1 if v = e+; throws if v is not an endpoint of s.
  int orientation_sign(VertexIndex v, SegmentIndex s) const;

  // Endpoint of segment s on side end (0 = minus, 1 = plus).
  VertexIndex endpoint(SegmentIndex s, int end) const {
    const Segment& sg = segments_[s];
    return end == 0 ? sg.v_minus : sg.v_plus;
  }
  // Coordinate of that endpoint along s.
  double endpoint_coord(SegmentIndex s, int end) const {
    return end == 0 ? 0.0 : segments_[s].length;
  }

  bool contains(const GraphPoint& p) const;
  // True if p sits exactly on a vertex; v receives the vertex index.
  bool at_vertex(const GraphPoint& p, VertexIndex* v = nullptr) const;

  // Shortest-path metric.  +inf between different components.
  double vertex_distance(VertexIndex a, VertexIndex b) const {
    return vdist_[a][b];
  }
  double geodesic_distance(const GraphPoint& p, const GraphPoint& q) const;

  // Lebesgue measure of the metric ball B_r(x).
  double ball_measure(const GraphPoint& x, double r) const;

  int component(VertexIndex v) const { return comp_[v]; }
  int component_count() const { return n_components_; }

  double total_edge_length() const { return total_length_; }  // finite edges
  // Min finite edge length; +inf when the graph has no finite edge.
  double min_edge_length() const { return r_min_; }
  // Upper bound for sup rho(x,y) over points of finite edges (0 if none).
  double diameter_bound() const { return diam_bound_; }

private:
  MetricGraph() = default;
  void finalize();

  std::vector<std::string> vertex_ids_;
  std::vector<Segment> segments_;  // finite edges first, rays after
  int n_edges_ = 0;
  std::vector<std::vector<Incidence>> adj_;
  std::vector<std::vector<double>> vdist_;
  std::vector<int> comp_;
  int n_components_ = 0;
  double total_length_ = 0, r_min_ = kInf, diam_bound_ = 0;
};

}  // namespace mgk
