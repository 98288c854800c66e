#include "mgk/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mgk {

TransportPlan solve_transport(const std::vector<double>& supply,
                              const std::vector<double>& demand,
                              const std::vector<std::vector<double>>& cost) {
  int m = (int)supply.size(), n = (int)demand.size();
  if (m == 0 || n == 0) throw std::invalid_argument("transport: empty side");
  if ((int)cost.size() != m)
    throw std::invalid_argument("transport: cost rows must match supplies");
  double total_a = 0, total_b = 0, cmax = 0;
  for (double s : supply) {
    if (!(s >= 0) || !std::isfinite(s))
      throw std::invalid_argument("transport: supplies must be >= 0");
    total_a += s;
  }
  for (double d : demand) {
    if (!(d >= 0) || !std::isfinite(d))
      throw std::invalid_argument("transport: demands must be >= 0");
    total_b += d;
  }
  for (const auto& row : cost) {
    if ((int)row.size() != n)
      throw std::invalid_argument("transport: cost columns must match demands");
    for (double c : row) {
      if (!std::isfinite(c))
        throw std::invalid_argument("transport: costs must be finite");
      cmax = std::max(cmax, std::abs(c));
    }
  }
  if (std::abs(total_a - total_b) > 1e-9 * std::max({total_a, total_b, 1.0}))
    throw std::invalid_argument("transport: unbalanced masses");
  double tol = 1e-12 * (1 + cmax);

  // Basic cells form a spanning tree on the bipartite node set (rows first,
  // then columns).  Northwest-corner staircase start: m + n - 1 cells.
  std::vector<int> brow, bcol;
  std::vector<double> bflow;
  std::vector<char> basic((std::size_t)m * n, 0);
  {
    std::vector<double> a = supply, b = demand;
    int i = 0, j = 0;
    while (true) {
      double x = std::min(a[i], b[j]);
      brow.push_back(i);
      bcol.push_back(j);
      bflow.push_back(x);
      basic[(std::size_t)i * n + j] = 1;
      a[i] -= x;
      b[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      if (a[i] <= b[j] && i < m - 1)
        ++i;
      else if (j < n - 1)
        ++j;
      else
        ++i;
    }
  }

  int nodes = m + n;
  std::vector<double> pot(nodes);
  std::vector<char> seen(nodes);
  std::vector<int> stack, parent_edge(nodes), parent_node(nodes);
  std::vector<std::vector<int>> adj(nodes);
  std::vector<int> path;

  for (long iter = 0;; ++iter) {
    if (iter > 500000)
      throw std::runtime_error("transport: pivot budget exhausted");

    for (auto& v : adj) v.clear();
    for (std::size_t k = 0; k < brow.size(); ++k) {
      adj[brow[k]].push_back((int)k);
      adj[m + bcol[k]].push_back((int)k);
    }

    // Potentials u_i + v_j = c_ij on basic cells, rooted at row 0.
    std::fill(seen.begin(), seen.end(), 0);
    pot[0] = 0;
    seen[0] = 1;
    stack.assign(1, 0);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int k : adj[v]) {
        int r = brow[k], c = m + bcol[k];
        int other = (v == r) ? c : r;
        if (seen[other]) continue;
        seen[other] = 1;
        pot[other] = cost[r][c - m] - pot[v];
        stack.push_back(other);
      }
    }

    // Entering cell: Bland, first negative reduced cost in row-major order.
    int er = -1, ec = -1;
    for (int i = 0; i < m && er < 0; ++i)
      for (int j = 0; j < n; ++j)
        if (!basic[(std::size_t)i * n + j] &&
            cost[i][j] - pot[i] - pot[m + j] < -tol) {
          er = i;
          ec = j;
          break;
        }
    if (er < 0) break;

    // Unique tree path from row er to column ec; with the entering cell this
    // closes the pivot cycle.
    std::fill(seen.begin(), seen.end(), 0);
    seen[er] = 1;
    parent_node[er] = -1;
    stack.assign(1, er);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int k : adj[v]) {
        int r = brow[k], c = m + bcol[k];
        int other = (v == r) ? c : r;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_node[other] = v;
        parent_edge[other] = k;
        stack.push_back(other);
      }
    }
    path.clear();
    for (int v = m + ec; v != er; v = parent_node[v])
      path.push_back(parent_edge[v]);
    std::reverse(path.begin(), path.end());

    // The entering cell takes +theta; edges at even path positions lose flow.
    // Leaving cell: Bland again, smallest row-major index among the blockers.
    double theta = kInf;
    int leave = -1;
    long leave_id = 0;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      int k = path[p];
      long id = (long)brow[k] * n + bcol[k];
      if (bflow[k] < theta - 1e-15 ||
          (bflow[k] <= theta + 1e-15 && (leave < 0 || id < leave_id))) {
        theta = std::min(theta, bflow[k]);
        leave = k;
        leave_id = id;
      }
    }
    if (leave < 0) throw std::runtime_error("transport: malformed cycle");
    for (std::size_t p = 0; p < path.size(); ++p)
      bflow[path[p]] += (p % 2 == 0) ? -theta : theta;
    basic[(std::size_t)brow[leave] * n + bcol[leave]] = 0;
    basic[(std::size_t)er * n + ec] = 1;
    brow[leave] = er;
    bcol[leave] = ec;
    bflow[leave] = theta;
  }

  TransportPlan plan;
  for (std::size_t k = 0; k < brow.size(); ++k) {
    if (bflow[k] <= 0) continue;
    plan.flows.push_back({brow[k], bcol[k], bflow[k]});
    plan.cost += bflow[k] * cost[brow[k]][bcol[k]];
  }
  return plan;
}

double wasserstein2(const MetricGraph& g, const std::vector<MassAtom>& a,
                    const std::vector<MassAtom>& b) {
  std::vector<double> sa, sb;
  for (const auto& x : a) sa.push_back(x.mass);
  for (const auto& x : b) sb.push_back(x.mass);
  std::vector<std::vector<double>> cost(a.size(),
                                        std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      double d = g.geodesic_distance(a[i].p, b[j].p);
      cost[i][j] = d * d;
    }
  return std::sqrt(solve_transport(sa, sb, cost).cost);
}

}  // namespace mgk
