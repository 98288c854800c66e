#pragma once

// Exact discrete optimal transport, small scale.  solve_transport runs the
// classic transportation simplex (northwest start, MODI pricing, Bland's rule
// against cycling) on a dense cost matrix; wasserstein2 feeds it squared
// geodesic distances between weighted atom clouds on a graph.

#include <vector>

#include "mgk/graph.hpp"

namespace mgk {

struct MassAtom {
  GraphPoint p;
  double mass = 0;
};

struct TransportFlow {
  int from = 0, to = 0;  // supply index, demand index
  double mass = 0;
};

struct TransportPlan {
  double cost = 0;  // sum of flow * unit cost, at the optimum
  std::vector<TransportFlow> flows;
};

// Minimize sum c[i][j] x[ij] subject to row sums = supply, column sums =
// demand, x >= 0.  Supplies and demands must balance to ~1e-9 relative.
TransportPlan solve_transport(const std::vector<double>& supply,
                              const std::vector<double>& demand,
                              const std::vector<std::vector<double>>& cost);

// Quadratic Wasserstein distance between two normalized atom clouds; both
// total masses must agree.  Returns W_2 itself, not its square.
double wasserstein2(const MetricGraph& g, const std::vector<MassAtom>& a,
                    const std::vector<MassAtom>& b);

}  // namespace mgk
