#pragma once

// Eigen-decomposition of the Kirchhoff Laplacian on compact metric graphs.
//
// On each edge an eigenfunction for lambda = k^2 > 0 is
//   phi_e(x) = A_e cos(k x) + B_e sin(k x),
// and the vertex conditions (continuity + zero sum of outward derivatives)
// assemble into a square 2|E| x 2|E| matrix M(k) whose null vectors are the
// eigenfunctions.  Roots of det M(k) are located on a scan grid, refined by
// bisection where the determinant changes sign and by golden-section descent
// of the smallest singular value where it does not (even multiplicities).
// A Weyl-count check guards against missed roots.
//
// lambda = 0 is handled separately: indicators of connected components.

#include <optional>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/grid.hpp"

namespace mgk {

struct EigenPair {
  double lambda = 0;
  // Per-segment coefficients: A cos(kx) + B sin(kx), or A + Bx when
  // lambda = 0.  Normalized so that the L^2(mu) norm over the graph is 1.
  std::vector<double> A, B;

  double value(const MetricGraph& g, const GraphPoint& p) const;
  double deriv(const MetricGraph& g, const GraphPoint& p) const;
};

struct EigenBasis {
  std::vector<EigenPair> pairs;  // ascending lambda, multiplicity unrolled
  double lambda_max = 0;         // certified completeness threshold

  // Smallest positive eigenvalue (the Poincare/spectral gap constant).
  double lambda1() const;
};

// All eigenvalues in [0, lambda_max] with multiplicity.  Throws on rays and
// when the missed-root detector cannot be satisfied within the refinement
// budget.
EigenBasis eigensolve(const MetricGraph& g, double lambda_max);

// Smallest lambda_max that makes a time-t heat sum complete to tolerance
// eps: e^{-lambda_max t} < eps/10.
double lambda_max_for_time(double t, double eps);

// Heat kernel through the eigenbasis: sum over pairs (lambda = 0 included,
// which contributes 1/mu per component) of e^{-lambda t} phi(x) phi(y).
double spectral_heat_kernel(const MetricGraph& g, const EigenBasis& basis,
                            double t, const GraphPoint& x, const GraphPoint& y);

// Per-edge-constant forms with zero signed vertex sums; dimension equals the
// cycle rank of the combinatorial graph.  Rows are L^2(mu)-orthonormal.
struct HarmonicFormBasis {
  std::vector<std::vector<double>> h;  // [form][segment]
  int dimension() const { return static_cast<int>(h.size()); }
};
HarmonicFormBasis harmonic_forms(const MetricGraph& g);

// Form heat kernel: harmonic projector plus sum of e^{-lambda t} over the
// normalized form eigenfunctions phi' / sqrt(lambda).
double spectral_form_kernel(const MetricGraph& g, const EigenBasis& basis,
                            const HarmonicFormBasis& harm, double t,
                            const GraphPoint& x, const GraphPoint& y);

// Per-edge signs s_e = +-1 with zero signed sums at every vertex, i.e. a
// unit-modulus harmonic form.  Exists iff the graph is compact and every
// vertex has even degree; found by orienting an Eulerian partition.
std::optional<std::vector<double>> poincare_orientation(const MetricGraph& g);

struct LargeTimeBE {
  double value = 0;      // C(t); meaningful only when below_t1 is false
  bool below_t1 = true;  // denominator not yet positive at this t
  double M = 0;          // kernel bound used, measured at t0
  double t0 = 0;
};

// Large-time Bakry-Emery constant
//   C(t) = M^2 S1 / (1 - M^2 S0),   S_r = sum_j lambda_j^{-r} e^{-lambda_j (t - 2 t0)}
// over the positive spectrum, with M = max(sup p_{t0}, sup Gamma(p_{t0}))
// measured on a node grid under the normalized measure mu/mu(X).  The
// normalization leaves the final inequality unchanged and matches the
// convention under which the formula is derived.
LargeTimeBE large_time_be_constant(const MetricGraph& g, const EigenBasis& basis,
                                   double t0, double t);

}  // namespace mgk
