// kernels.hpp — pointwise heat kernels by truncated path sum.
//
// p_t(x,y)    = sum_c S(c)    g_t(d_c(x,y))     (Kirchhoff conditions)
// pvec_t(x,y) = sum_c Svec(c) g_t(d_c(x,y))     (anti-Kirchhoff, one-forms)
// d/dx p_t    = sum_c S(c) sigma_x(c) (-d_c/2t) g_t(d_c)
//
// with g_t(u) = exp(-u^2/4t)/sqrt(4 pi t) and sigma_x(c) the sign of the
// x-derivative of d_c (the exit orientation; sign(x-y) on the trivial path).
// Sums run over every path whose inner length stays below a cutoff chosen so
// that a certified bound on the dropped mass is below the requested eps.

#pragma once

#include <cstddef>

#include "mgk/graph.hpp"
#include "mgk/paths.hpp"

namespace mgk {

double gaussian(double t, double u);

struct KernelValue {
  double value = 0;
  double tail_bound = 0;  // certified bound on the dropped paths' contribution
  std::size_t paths_used = 0;
  double cutoff = 0;  // inner-length cutoff of the enumerated set
};

struct KernelOptions {
  double eps = 1e-10;
  std::size_t path_budget = 2'000'000;
};

// Certified bound on sum |S(c)| g_t(d_c) over all paths with d_c > L.
// Paths with n inner edges number at most 2 b^n (b = scattering branches
// available per step) and satisfy d_c >= n r_min, so the dropped mass is at
// most  sum_{n < n0} 2 b^n g_t(L) + sum_{n >= n0} 2 b^n g_t(n r_min)  with
// n0 = ceil(L / r_min); the Gaussian tail beats the geometric growth.
double path_tail_bound(const MetricGraph& g, double t, double L);
// Same shape for the gradient kernel, with g_t replaced by its envelope
// u -> (u/2t) g_t(u) maximized over the allowed range.
double gradient_tail_bound(const MetricGraph& g, double t, double L);

// Smallest cutoff (quantized upward) with path_tail_bound <= eps, at least
// rho_floor.  eps = +inf returns rho_floor itself: only the direct paths.
double truncation_cutoff(const MetricGraph& g, double t, double eps,
                         double rho_floor = 0);

class KernelEngine {
public:
  explicit KernelEngine(const MetricGraph& g, KernelOptions opt = {})
      : g_(g), opt_(opt), cache_(g) {}

  const MetricGraph& graph() const { return g_; }
  const KernelOptions& options() const { return opt_; }

  KernelValue heat(double t, const GraphPoint& x, const GraphPoint& y) const;
  KernelValue form_heat(double t, const GraphPoint& x, const GraphPoint& y) const;
  // d/dx p_t(x, y); x must not sit on a vertex.
  KernelValue gradient(double t, const GraphPoint& x, const GraphPoint& y) const;

private:
  enum class Which { kHeat, kForm, kGradient };
  KernelValue evaluate(Which which, double t, const GraphPoint& x,
                       const GraphPoint& y) const;

  const MetricGraph& g_;
  KernelOptions opt_;
  mutable PathCache cache_;
};

// One-shot wrappers.
KernelValue heat_kernel(const MetricGraph& g, double t, const GraphPoint& x,
                        const GraphPoint& y, double eps = 1e-10);
KernelValue form_heat_kernel(const MetricGraph& g, double t, const GraphPoint& x,
                             const GraphPoint& y, double eps = 1e-10);
KernelValue gradient_kernel(const MetricGraph& g, double t, const GraphPoint& x,
                            const GraphPoint& y, double eps = 1e-10);

struct RatioSupResult {
  double sup = 0;
  GraphPoint arg_x, arg_y;
  std::size_t skipped = 0;  // pairs with p_t below its own tail bound
  std::size_t pairs = 0;
};

// sup over sample pairs of |pvec_t| / p_t.
RatioSupResult kernel_ratio_sup(const MetricGraph& g, double t,
                                const std::vector<GraphPoint>& grid,
                                const KernelOptions& opt = {});

}  // namespace mgk
