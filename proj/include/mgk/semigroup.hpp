#pragma once

// Heat and form-heat semigroups acting on sampled functions.
//
// P_t f (x) = integral of p_t(x, y) f(y) dmu(y), evaluated by the composite
// quadrature of the function's grid; derivatives of P_t f come from the
// gradient kernel under the same quadrature, never from differencing the
// output samples.  Two interchangeable kernel routes back the integrals:
//
//   * path sums, valid on any graph, with cost growing as exp(L(t)) through
//     the truncation cutoff; the route of choice for small times;
//   * the eigenbasis, valid on compact graphs, with cost shrinking as t
//     grows; the route of choice for large times.
//
// kAuto switches between them at t = 0.3 on compact graphs.  The Bakry-Emery
// ratio machinery measures sup_x sqrt(Gamma(P_t f)) / P_t sqrt(Gamma(f))
// over a point grid, skipping points whose denominator falls under ten times
// the certified integration error.

#include <cstddef>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/grid.hpp"
#include "mgk/kernels.hpp"
#include "mgk/spectral.hpp"

namespace mgk {

enum class SemigroupMode { kAuto, kPathSum, kSpectral };

struct SemigroupOptions {
  KernelOptions kernel;  // tolerance and path budget for the path route
  SemigroupMode mode = SemigroupMode::kAuto;
  double spectral_eps = 1e-10;   // eigenbasis completeness target
  double auto_switch_time = 0.3; // kAuto: spectral route at t >= this
};

// Ray truncation for integrating a time-t kernel against functions living
// within distance `reach` of the vertices: beyond the cap the kernel mass is
// below eps relative to the sampled part.
double suggested_ray_cap(const MetricGraph& g, double t, double eps,
                         double reach);

struct BERatioStats {
  std::size_t points = 0;   // evaluated
  std::size_t skipped = 0;  // denominator under the guard
  GraphPoint arg{};         // where the sup was attained
};

struct BEReport {
  std::vector<double> times;
  std::vector<double> ratios;         // sup ratio per time, over the family
  std::vector<std::size_t> skipped;   // guarded-out points per time
  double c1 = 0;                      // sup of ratios over times <= 1
  double kernel_ratio = 0;            // kernel-level |pvec|/p cross-check
  bool certified = false;             // no time lost all its points
};

struct VarianceCheck {
  double lhs = 0;  // Gamma(P_t f) at the worst point
  double rhs = 0;  // (C1^2 / 2t) (P_t f^2 - (P_t f)^2) there
  GraphPoint at{};
};

class SemigroupEngine {
 public:
  explicit SemigroupEngine(const MetricGraph& g, SemigroupOptions opt = {});

  const MetricGraph& graph() const { return g_; }

  // Pointwise applications; x must not sit on a vertex for the gradient.
  double apply_heat_at(double t, const GridFunction& f, const GraphPoint& x) const;
  double apply_form_heat_at(double t, const GridFunction& f, const GraphPoint& x) const;
  double heat_gradient_at(double t, const GridFunction& f, const GraphPoint& x) const;

  // Whole-grid application on the function's own grid.  with_derivative adds
  // gradient samples (all nodes, so roughly twice the work).
  GridFunction apply_heat(double t, const GridFunction& f,
                          bool with_derivative = false) const;
  GridFunction apply_form_heat(double t, const GridFunction& f) const;

  // sup over pts of |(P_t f)' - Pvec_t(f')|; pts defaults to all grid nodes.
  double intertwining_residual(double t, const GridFunction& f,
                               const std::vector<GraphPoint>& pts = {}) const;

  // sup over usable pts of sqrt(Gamma(P_t f)) / P_t sqrt(Gamma(f)).
  double be_ratio(double t, const GridFunction& f,
                  const std::vector<GraphPoint>& pts = {},
                  BERatioStats* stats = nullptr) const;

  // Max of be_ratio over the time grid and the function family, with the
  // kernel-level ratio measured on the same points as a cross-check.
  BEReport be_constant(const std::vector<double>& t_grid,
                       const std::vector<GridFunction>& family,
                       const std::vector<GraphPoint>& pts = {}) const;

  // Both sides of Gamma(P_t f) <= (c1^2 / 2t)(P_t f^2 - (P_t f)^2) at the
  // point where their difference is largest.
  VarianceCheck variance_decay_check(double t, const GridFunction& f, double c1,
                                     const std::vector<GraphPoint>& pts = {}) const;

 private:
  enum class Route { kPath, kSpectral };
  enum class Op { kHeat, kForm, kGradient };

  Route route(double t) const;
  const EigenBasis& basis(double t) const;  // lazy, grows on demand
  const HarmonicFormBasis& harmonics() const;

  // integral of the chosen kernel against f, with a certified error bound
  std::pair<double, double> integrate(Op op, double t, const GridFunction& f,
                                      const GraphPoint& x) const;
  std::vector<GraphPoint> all_nodes(const GridFunction& f) const;

  const MetricGraph& g_;
  SemigroupOptions opt_;
  KernelEngine kernels_;
  mutable std::mutex mu_;
  mutable std::shared_ptr<const EigenBasis> basis_;
  mutable std::shared_ptr<const HarmonicFormBasis> harm_;
};

struct CircleUnionCheck {
  double residual = 0;         // sup |P_t f - reassembled decomposition|
  double symmetric_ratio = 0;  // gradient ratio of the circle-averaged part
};

// On a union of n equal circles glued at one point, P_t splits: the part of f
// equal across circles evolves by the periodic semigroup of a single circle,
// and the remainder (circlewise sum zero, hence vanishing at the junction) by
// the Dirichlet semigroup of the cut-open circle.  Both reference evolutions
// are computed here from image series, independent of the engine under test.
// The averaged part is also fed through be_ratio: on that subspace the
// gradient ratio stays at one.  f must carry derivative samples.
CircleUnionCheck circle_union_decomposition_check(
    const MetricGraph& g, double t, const GridFunction& f,
    const std::vector<GraphPoint>& pts = {});

}  // namespace mgk
