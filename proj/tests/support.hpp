// support.hpp — shared fixtures for the test suite: standard graphs and the
// independent brute-force oracles the numerical code is checked against.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/paths.hpp"

namespace mgt {

using namespace mgk;

// Single edge of length len between two leaves.
inline MetricGraph interval_graph(double len = 1.0) {
  GraphSpec s;
  s.vertices = {{"v0"}, {"v1"}};
  s.edges = {{"e", "v0", "v1", len}};
  return MetricGraph::build(s);
}

// Circle of circumference circ as two parallel edges of length circ/2.
inline MetricGraph circle_graph(double circ = 2.0) {
  GraphSpec s;
  s.vertices = {{"v0"}, {"v1"}};
  s.edges = {{"e0", "v0", "v1", circ / 2}, {"e1", "v0", "v1", circ / 2}};
  return MetricGraph::build(s);
}

// N rays glued at one vertex (the Walsh spider).
inline MetricGraph spider_graph(int n_legs) {
  GraphSpec s;
  s.vertices = {{"c"}};
  for (int j = 0; j < n_legs; ++j)
    s.rays.push_back({"leg" + std::to_string(j), "c"});
  return MetricGraph::build(s);
}

// N finite legs of length len glued at one center.
inline MetricGraph star_graph(int n_legs, double len = 1.0) {
  GraphSpec s;
  s.vertices = {{"c"}};
  s.edges.reserve(n_legs);
  for (int j = 0; j < n_legs; ++j) {
    s.vertices.push_back({"w" + std::to_string(j)});
    s.edges.push_back({"leg" + std::to_string(j), "c", "w" + std::to_string(j), len});
  }
  return MetricGraph::build(s);
}

// n loops of circumference circ glued at one vertex (loops get split while
// building, so the center ends with degree 2n).
inline MetricGraph circle_union_graph(int n, double circ = 1.0) {
  GraphSpec s;
  s.vertices = {{"c"}};
  for (int j = 0; j < n; ++j)
    s.edges.push_back({"loop" + std::to_string(j), "c", "c", circ});
  return MetricGraph::build(s);
}

// ---------------------------------------------------------------------------
// Brute-force path oracle: plain breadth-first expansion over edge tuples with
// no amplitude bookkeeping and no pruning beyond the length cap.  Kept naive
// on purpose; do not share logic with the library's walk.

struct OraclePath {
  std::vector<SegmentIndex> edges;
  std::vector<VertexIndex> vertices;
  double length = 0;
};

inline std::vector<OraclePath> oracle_paths(const MetricGraph& g, GraphPoint x,
                                            GraphPoint y, double L_max) {
  std::vector<OraclePath> done;
  if (x.seg == y.seg && std::abs(x.x - y.x) <= L_max)
    done.push_back({{x.seg}, {}, std::abs(x.x - y.x)});

  struct State {
    std::vector<SegmentIndex> edges;
    std::vector<VertexIndex> vertices;
    double inner = 0;
  };
  std::vector<State> frontier;
  const Segment& sx = g.segment(x.seg);
  for (int i = 0; i < (sx.is_ray() ? 1 : 2); ++i)
    frontier.push_back({{x.seg}, {g.endpoint(x.seg, i)}, 0});

  while (!frontier.empty()) {
    std::vector<State> next;
    for (const State& st : frontier) {
      VertexIndex v = st.vertices.back();
      double off_x = std::abs(x.x - g.endpoint_coord(st.edges.front(),
          st.vertices.front() == g.segment(st.edges.front()).v_minus ? 0 : 1));
      for (const Incidence& inc : g.incident(v)) {
        if (inc.seg == y.seg) {
          double off_y = std::abs(y.x - g.endpoint_coord(inc.seg, inc.end));
          double d = off_x + st.inner + off_y;
          if (d <= L_max) {
            OraclePath p{st.edges, st.vertices, d};
            p.edges.push_back(inc.seg);
            done.push_back(std::move(p));
          }
        }
        const Segment& sg = g.segment(inc.seg);
        if (sg.is_ray()) continue;
        // Crossing the whole edge must stay potentially below the cap.
        if (off_x + st.inner + sg.length > L_max) continue;
        State s2 = st;
        s2.edges.push_back(inc.seg);
        s2.vertices.push_back(g.endpoint(inc.seg, 1 - inc.end));
        s2.inner += sg.length;
        next.push_back(std::move(s2));
      }
    }
    frontier = std::move(next);
  }
  return done;
}

inline std::string path_signature(const std::vector<SegmentIndex>& edges,
                                  const std::vector<VertexIndex>& vertices) {
  std::string s;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    s += "e" + std::to_string(edges[i]);
    if (i < vertices.size()) s += "v" + std::to_string(vertices[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Finite-difference Laplacian oracle: hat-function stiffness with a lumped
// mass matrix on a uniform per-edge mesh.  Second-order accurate, entirely
// independent of the secular-determinant solver it is used to check.

inline std::vector<double> fd_eigenvalues(const MetricGraph& g, double h,
                                          int count) {
  // global nodes: vertices first, then edge interiors
  int n_nodes = g.vertex_count();
  std::vector<int> first_interior(g.edge_count());
  std::vector<int> cells(g.edge_count());
  std::vector<double> mesh(g.edge_count());
  for (SegmentIndex e = 0; e < g.edge_count(); ++e) {
    const Segment& sg = g.segment(e);
    cells[e] = std::max(1, (int)std::lround(sg.length / h));
    mesh[e] = sg.length / cells[e];
    first_interior[e] = n_nodes;
    n_nodes += cells[e] - 1;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n_nodes);
  for (SegmentIndex e = 0; e < g.edge_count(); ++e) {
    auto node = [&](int i) {
      if (i == 0) return g.segment(e).v_minus;
      if (i == cells[e]) return g.segment(e).v_plus;
      return first_interior[e] + i - 1;
    };
    for (int c = 0; c < cells[e]; ++c) {
      int i = node(c), j = node(c + 1);
      double w = 1.0 / mesh[e];
      A(i, i) += w;
      A(j, j) += w;
      A(i, j) -= w;
      A(j, i) -= w;
      m(i) += mesh[e] / 2;
      m(j) += mesh[e] / 2;
    }
  }
  // drop measure-zero nodes (isolated vertices)
  for (int i = 0; i < n_nodes; ++i)
    if (m(i) == 0) m(i) = 1;  // row is zero anyway
  Eigen::VectorXd s = m.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd B = s.asDiagonal() * A * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  std::vector<double> out;
  for (int i = 0; i < std::min<int>(count, es.eigenvalues().size()); ++i)
    out.push_back(std::max(0.0, es.eigenvalues()(i)));
  return out;
}

// Richardson pair at h and h/2, assuming O(h^2) error.
inline std::vector<double> fd_eigenvalues_refined(const MetricGraph& g,
                                                  double h, int count) {
  auto a = fd_eigenvalues(g, h, count);
  auto b = fd_eigenvalues(g, h / 2, count);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (4 * b[i] - a[i]) / 3;
  return out;
}

}  // namespace mgt
