#pragma once

// Quadrature grids and sampled functions on a metric graph.
//
// A QuadratureGrid fixes, per segment, composite Gauss-Legendre panels whose
// nodes and weights discretize integrals over the graph.  Rays carry nodes on
// [0, ray_cap] only; everything beyond the cap is outside the sampled region
// and integration against a heat kernel must choose the cap so that the
// discarded mass is below tolerance.
//
// A GridFunction stores one sample per node.  When built from per-edge
// analytic descriptors it also knows exact derivatives, which is what the
// carre du champ and the Bakry-Emery ratios consume; sample-only functions
// (e.g. the output of a semigroup application) carry optional derivative
// samples filled in by whoever produced them.

#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "mgk/graph.hpp"

namespace mgk {

struct GaussRule {
  std::vector<double> x;  // nodes in (-1, 1)
  std::vector<double> w;  // positive weights, sum 2
};

// Nodes of the n-point rule, computed once by Newton iteration on the
// Legendre polynomial and cached.
const GaussRule& gauss_legendre(int n);

// Analytic description of a function on one edge, as a sum of closed-form
// terms.  value() and deriv() are exact; deriv is taken a.e. for the terms
// with kinks or jumps.  breakpoints() lists the x where smoothness fails so
// quadrature panels can split there.
struct EdgeDescriptor {
  std::vector<double> poly;  // sum_k poly[k] x^k

  struct Trig {
    double amp, omega, phase;  // amp * cos(omega x + phase)
  };
  std::vector<Trig> trig;

  struct Hat {
    double center, halfwidth, height;  // tent, zero outside the support
  };
  std::vector<Hat> hat;

  struct Step {
    double lo, hi, height;  // height * indicator of [lo, hi]
  };
  std::vector<Step> step;

  // C^1 plateau builder: the running integral of a tent, rising from 0 to
  // height*halfwidth across [center-halfwidth, center+halfwidth].
  struct Ramp {
    double center, halfwidth, height;
  };
  std::vector<Ramp> ramp;

  double value(double x) const;
  double deriv(double x) const;
  void breakpoints(std::vector<double>& out) const;
  bool differentiable() const { return step.empty(); }
};

struct QuadratureGrid {
  struct SegNodes {
    std::vector<double> x;  // edge coordinates, strictly inside panels
    std::vector<double> w;
  };
  std::vector<SegNodes> seg;  // indexed by SegmentIndex
  double ray_cap = 0;
  std::size_t node_count() const;
};

// Composite rule with panel length <= max_panel, panels split additionally at
// the given per-segment breakpoints.  Finite edges cover [0, length]; rays
// cover [0, ray_cap] (ray_cap must be positive when rays are present).
std::shared_ptr<const QuadratureGrid> build_quadrature(
    const MetricGraph& g, double max_panel, double ray_cap = 0,
    const std::map<SegmentIndex, std::vector<double>>& breaks = {},
    int nodes_per_panel = 16);

class GridFunction {
 public:
  GridFunction(std::shared_ptr<const QuadratureGrid> grid,
               std::vector<std::vector<double>> values);

  // Samples the descriptors at the grid nodes; derivatives come along for
  // free.  One descriptor per segment, in segment order.
  static GridFunction from_descriptors(const MetricGraph& g,
                                       std::shared_ptr<const QuadratureGrid> grid,
                                       std::vector<EdgeDescriptor> desc);
  static GridFunction constant(std::shared_ptr<const QuadratureGrid> grid,
                               double c);

  const QuadratureGrid& grid() const { return *grid_; }
  std::shared_ptr<const QuadratureGrid> grid_ptr() const { return grid_; }
  const std::vector<std::vector<double>>& values() const { return values_; }
  std::vector<std::vector<double>>& values() { return values_; }

  bool has_derivative() const { return !deriv_.empty(); }
  const std::vector<std::vector<double>>& derivative() const;
  void set_derivative(std::vector<std::vector<double>> d);

  bool has_descriptors() const { return !desc_.empty(); }
  const std::vector<EdgeDescriptor>& descriptors() const { return desc_; }

  // Exact evaluation through the descriptors; throws without them.
  double eval(const GraphPoint& p) const;
  double eval_deriv(const GraphPoint& p) const;

  double integral() const;  // sum of w * v over the sampled region
  double l1_norm() const;
  double sup_norm() const;  // max |v| over nodes

  // Largest spread of endpoint values across the incidences of any vertex;
  // 0 for an H^1 representative.  Descriptor-backed functions only.
  double vertex_spread(const MetricGraph& g) const;

 private:
  std::shared_ptr<const QuadratureGrid> grid_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<double>> deriv_;
  std::vector<EdgeDescriptor> desc_;
};

// Gamma(f) = (f')^2, sampled at the nodes.  Needs a derivative (descriptor
// or stored samples).
GridFunction carre_du_champ(const GridFunction& f);

// |f'| sampled at the nodes, the square root of the carre du champ.
GridFunction gradient_modulus(const GridFunction& f);

}  // namespace mgk
