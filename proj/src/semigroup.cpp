#include "mgk/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mgk/errors.hpp"

namespace mgk {

namespace {

void check_bounded(const GridFunction& f) {
  for (const auto& seg : f.values())
    for (double v : seg)
      if (!std::isfinite(v))
        throw std::invalid_argument("semigroup input has unbounded samples");
}

GridFunction squared(const GridFunction& f) {
  auto vals = f.values();
  for (auto& seg : vals)
    for (double& v : seg) v = v * v;
  return GridFunction(f.grid_ptr(), std::move(vals));
}

}  // namespace

double suggested_ray_cap(const MetricGraph& g, double t, double eps,
                         double reach) {
  if (!(t > 0) || !(eps > 0) || eps >= 1)
    throw std::invalid_argument("ray cap needs t > 0 and eps in (0,1)");
  (void)g;
  return reach + std::sqrt(4 * t * std::log(1 / eps)) + std::sqrt(t);
}

SemigroupEngine::SemigroupEngine(const MetricGraph& g, SemigroupOptions opt)
    : g_(g), opt_(opt), kernels_(g, opt.kernel) {}

SemigroupEngine::Route SemigroupEngine::route(double t) const {
  switch (opt_.mode) {
    case SemigroupMode::kPathSum:
      return Route::kPath;
    case SemigroupMode::kSpectral:
      if (g_.ray_count() > 0)
        throw std::invalid_argument("spectral route requires a compact graph");
      return Route::kSpectral;
    case SemigroupMode::kAuto:
      break;
  }
  return (g_.ray_count() == 0 && t >= opt_.auto_switch_time) ? Route::kSpectral
                                                             : Route::kPath;
}

const EigenBasis& SemigroupEngine::basis(double t) const {
  double need = lambda_max_for_time(t, opt_.spectral_eps);
  std::lock_guard<std::mutex> lock(mu_);
  if (!basis_ || basis_->lambda_max < need)
    basis_ = std::make_shared<EigenBasis>(eigensolve(g_, need));
  return *basis_;
}

const HarmonicFormBasis& SemigroupEngine::harmonics() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!harm_)
    harm_ = std::make_shared<HarmonicFormBasis>(harmonic_forms(g_));
  return *harm_;
}

std::pair<double, double> SemigroupEngine::integrate(Op op, double t,
                                                     const GridFunction& f,
                                                     const GraphPoint& x) const {
  if (op == Op::kGradient) {
    VertexIndex v;
    if (g_.at_vertex(x, &v))
      throw std::invalid_argument(
          "gradient evaluation at vertex " + g_.vertex_id(v) +
          " is direction-dependent");
  }

  const QuadratureGrid& grid = f.grid();
  if (route(t) == Route::kPath) {
    double val = 0, err = 0;
    for (SegmentIndex s = 0; s < (SegmentIndex)grid.seg.size(); ++s) {
      const auto& xs = grid.seg[s].x;
      const auto& ws = grid.seg[s].w;
      const auto& fs = f.values()[s];
      for (std::size_t i = 0; i < xs.size(); ++i) {
        GraphPoint y{s, xs[i]};
        KernelValue k = op == Op::kHeat    ? kernels_.heat(t, x, y)
                        : op == Op::kForm  ? kernels_.form_heat(t, x, y)
                                           : kernels_.gradient(t, x, y);
        val += ws[i] * fs[i] * k.value;
        err += ws[i] * std::abs(fs[i]) * k.tail_bound;
      }
    }
    return {val, err};
  }

  // Spectral route: Fourier coefficients of f under the eigenbasis (or the
  // form eigenbasis), then synthesis at x.
  const EigenBasis& b = basis(t);
  double val = 0;
  auto coeff = [&](auto&& shape) {
    double c = 0;
    for (SegmentIndex s = 0; s < (SegmentIndex)grid.seg.size(); ++s) {
      const auto& xs = grid.seg[s].x;
      const auto& ws = grid.seg[s].w;
      const auto& fs = f.values()[s];
      for (std::size_t i = 0; i < xs.size(); ++i)
        c += ws[i] * fs[i] * shape(GraphPoint{s, xs[i]});
    }
    return c;
  };
  if (op == Op::kForm) {
    for (const auto& h : harmonics().h) {
      double c = coeff([&](const GraphPoint& y) { return h[y.seg]; });
      val += c * h[x.seg];
    }
    for (const EigenPair& p : b.pairs) {
      if (p.lambda <= 1e-9) continue;
      double k = std::sqrt(p.lambda);
      auto e = [&](const GraphPoint& y) {
        return p.B[y.seg] * std::cos(k * y.x) - p.A[y.seg] * std::sin(k * y.x);
      };
      val += std::exp(-p.lambda * t) * coeff(e) * e(x);
    }
  } else {
    for (const EigenPair& p : b.pairs) {
      double c = coeff([&](const GraphPoint& y) { return p.value(g_, y); });
      double shape_x = op == Op::kHeat ? p.value(g_, x) : p.deriv(g_, x);
      val += std::exp(-p.lambda * t) * c * shape_x;
    }
  }
  // Completeness residue: modes above lambda_max carry at most this much.
  double err = 10 * std::exp(-b.lambda_max * t) * f.l1_norm();
  return {val, err};
}

double SemigroupEngine::apply_heat_at(double t, const GridFunction& f,
                                      const GraphPoint& x) const {
  check_bounded(f);
  return integrate(Op::kHeat, t, f, x).first;
}

double SemigroupEngine::apply_form_heat_at(double t, const GridFunction& f,
                                           const GraphPoint& x) const {
  check_bounded(f);
  return integrate(Op::kForm, t, f, x).first;
}

double SemigroupEngine::heat_gradient_at(double t, const GridFunction& f,
                                         const GraphPoint& x) const {
  check_bounded(f);
  return integrate(Op::kGradient, t, f, x).first;
}

std::vector<GraphPoint> SemigroupEngine::all_nodes(const GridFunction& f) const {
  std::vector<GraphPoint> pts;
  const QuadratureGrid& grid = f.grid();
  for (SegmentIndex s = 0; s < (SegmentIndex)grid.seg.size(); ++s)
    for (double x : grid.seg[s].x) pts.push_back({s, x});
  return pts;
}

GridFunction SemigroupEngine::apply_heat(double t, const GridFunction& f,
                                         bool with_derivative) const {
  check_bounded(f);
  const QuadratureGrid& grid = f.grid();
  std::vector<std::vector<double>> vals(grid.seg.size());
  std::vector<std::vector<double>> der(grid.seg.size());
  for (SegmentIndex s = 0; s < (SegmentIndex)grid.seg.size(); ++s) {
    for (double xx : grid.seg[s].x) {
      GraphPoint x{s, xx};
      vals[s].push_back(integrate(Op::kHeat, t, f, x).first);
      if (with_derivative)
        der[s].push_back(integrate(Op::kGradient, t, f, x).first);
    }
  }
  GridFunction out(f.grid_ptr(), std::move(vals));
  if (with_derivative) out.set_derivative(std::move(der));
  return out;
}

GridFunction SemigroupEngine::apply_form_heat(double t,
                                              const GridFunction& f) const {
  check_bounded(f);
  const QuadratureGrid& grid = f.grid();
  std::vector<std::vector<double>> vals(grid.seg.size());
  for (SegmentIndex s = 0; s < (SegmentIndex)grid.seg.size(); ++s)
    for (double xx : grid.seg[s].x)
      vals[s].push_back(integrate(Op::kForm, t, f, {s, xx}).first);
  return GridFunction(f.grid_ptr(), std::move(vals));
}

double SemigroupEngine::intertwining_residual(
    double t, const GridFunction& f, const std::vector<GraphPoint>& pts) const {
  check_bounded(f);
  if (!f.has_derivative())
    throw std::invalid_argument("intertwining needs f with a derivative");
  GridFunction fp(f.grid_ptr(), f.derivative());
  std::vector<GraphPoint> where = pts.empty() ? all_nodes(f) : pts;
  double worst = 0;
  for (const GraphPoint& x : where) {
    double lhs = integrate(Op::kGradient, t, f, x).first;
    double rhs = integrate(Op::kForm, t, fp, x).first;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double SemigroupEngine::be_ratio(double t, const GridFunction& f,
                                 const std::vector<GraphPoint>& pts,
                                 BERatioStats* stats) const {
  check_bounded(f);
  GridFunction sg = gradient_modulus(f);
  std::vector<GraphPoint> where = pts.empty() ? all_nodes(f) : pts;
  BERatioStats st;
  double sup = 0;
  for (const GraphPoint& x : where) {
    auto [den, den_err] = integrate(Op::kHeat, t, sg, x);
    if (den <= 10 * den_err) {
      ++st.skipped;
      continue;
    }
    ++st.points;
    double num = std::abs(integrate(Op::kGradient, t, f, x).first);
    if (num / den > sup) {
      sup = num / den;
      st.arg = x;
    }
  }
  if (stats) *stats = st;
  if (st.points == 0)
    throw ToleranceError("no grid point survived the denominator guard",
                         kInf);
  return sup;
}

BEReport SemigroupEngine::be_constant(const std::vector<double>& t_grid,
                                      const std::vector<GridFunction>& family,
                                      const std::vector<GraphPoint>& pts) const {
  if (t_grid.empty() || family.empty())
    throw std::invalid_argument("be_constant needs times and functions");
  BEReport rep;
  for (double t : t_grid) {
    double worst = 0;
    std::size_t skipped = 0;
    for (const GridFunction& f : family) {
      BERatioStats st;
      worst = std::max(worst, be_ratio(t, f, pts, &st));
      skipped += st.skipped;
    }
    rep.times.push_back(t);
    rep.ratios.push_back(worst);
    rep.skipped.push_back(skipped);
    if (t <= 1.0) rep.c1 = std::max(rep.c1, worst);
  }
  std::vector<GraphPoint> where = pts.empty() ? all_nodes(family[0]) : pts;
  for (double t : t_grid)
    if (t <= 1.0)
      rep.kernel_ratio = std::max(
          rep.kernel_ratio, kernel_ratio_sup(g_, t, where, opt_.kernel).sup);
  rep.certified = true;
  for (std::size_t k : rep.skipped) rep.certified = rep.certified && k == 0;
  return rep;
}

namespace {

// Wrapped Gaussian: heat kernel of a circle of circumference c.
double periodic_gaussian(double t, double u, double c) {
  int M = (int)std::ceil((std::sqrt(4 * t * 37.0) + std::abs(u)) / c) + 1;
  double s = 0;
  for (int m = -M; m <= M; ++m) s += gaussian(t, u + m * c);
  return s;
}

// Heat kernel of the circle cut open at one point (Dirichlet at both ends of
// the arc (0, c)).
double dirichlet_gaussian(double t, double a, double b, double c) {
  int M = (int)std::ceil((std::sqrt(4 * t * 37.0) + a + b) / (2 * c)) + 1;
  double s = 0;
  for (int m = -M; m <= M; ++m)
    s += gaussian(t, a - b + 2 * m * c) - gaussian(t, a + b + 2 * m * c);
  return s;
}

}  // namespace

CircleUnionCheck circle_union_decomposition_check(
    const MetricGraph& g, double t, const GridFunction& f,
    const std::vector<GraphPoint>& pts) {
  int ns = g.segment_count();
  if (g.ray_count() > 0 || ns < 2 || ns % 2 != 0)
    throw std::invalid_argument("decomposition needs a union of circles");
  int n = ns / 2;
  double half = g.segment(0).length;
  VertexIndex center = g.segment(0).v_minus;
  for (int j = 0; j < n; ++j) {
    const Segment& a = g.segment(2 * j);
    const Segment& b = g.segment(2 * j + 1);
    if (a.length != half || b.length != half || a.v_minus != center ||
        b.v_plus != center || a.v_plus != b.v_minus ||
        g.degree(a.v_plus) != 2)
      throw std::invalid_argument("decomposition needs a union of circles");
  }
  if (g.degree(center) != 2 * n)
    throw std::invalid_argument("decomposition needs a union of circles");
  if (!f.has_derivative())
    throw std::invalid_argument("decomposition needs derivative samples");
  const QuadratureGrid& grid = f.grid();
  for (int j = 1; j < n; ++j)
    for (int k = 0; k < 2; ++k)
      if (grid.seg[2 * j + k].x != grid.seg[k].x)
        throw std::invalid_argument("grid must be identical across circles");

  // Circle-averaged samples (and derivatives), replicated over every circle.
  std::vector<std::vector<double>> avg(2), avg_d(2);
  for (int k = 0; k < 2; ++k) {
    avg[k].assign(grid.seg[k].x.size(), 0.0);
    avg_d[k] = avg[k];
    for (int j = 0; j < n; ++j)
      for (std::size_t i = 0; i < avg[k].size(); ++i) {
        avg[k][i] += f.values()[2 * j + k][i] / n;
        avg_d[k][i] += f.derivative()[2 * j + k][i] / n;
      }
  }
  std::vector<std::vector<double>> sym(ns), sym_d(ns);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < 2; ++k) {
      sym[2 * j + k] = avg[k];
      sym_d[2 * j + k] = avg_d[k];
    }
  GridFunction f_sym(f.grid_ptr(), sym);
  f_sym.set_derivative(sym_d);

  // Arc coordinate around a circle, measured from the junction.
  double circ = 2 * half;
  auto arc = [&](int k, double x) { return k == 0 ? x : half + x; };

  SemigroupEngine eng(g);
  GridFunction full = eng.apply_heat(t, f);

  double residual = 0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < 2; ++k)
      for (std::size_t i = 0; i < grid.seg[k].x.size(); ++i) {
        double s = arc(k, grid.seg[k].x[i]);
        double periodic = 0, dirichlet = 0;
        for (int kk = 0; kk < 2; ++kk)
          for (std::size_t ii = 0; ii < grid.seg[kk].x.size(); ++ii) {
            double sp = arc(kk, grid.seg[kk].x[ii]);
            double w = grid.seg[kk].w[ii];
            periodic += w * avg[kk][ii] * periodic_gaussian(t, s - sp, circ);
            double orth = f.values()[2 * j + kk][ii] - avg[kk][ii];
            dirichlet += w * orth * dirichlet_gaussian(t, s, sp, circ);
          }
        double got = full.values()[2 * j + k][i];
        residual = std::max(residual, std::abs(got - periodic - dirichlet));
      }

  CircleUnionCheck out;
  out.residual = residual;
  double dmass = 0;
  for (int k = 0; k < 2; ++k)
    for (double v : avg_d[k]) dmass += std::abs(v);
  // A flat averaged part has nothing to measure; report ratio zero.
  out.symmetric_ratio = dmass > 0 ? eng.be_ratio(t, f_sym, pts) : 0.0;
  return out;
}

VarianceCheck SemigroupEngine::variance_decay_check(
    double t, const GridFunction& f, double c1,
    const std::vector<GraphPoint>& pts) const {
  check_bounded(f);
  GridFunction f2 = squared(f);
  std::vector<GraphPoint> where = pts.empty() ? all_nodes(f) : pts;
  VarianceCheck out;
  double worst = -kInf;
  for (const GraphPoint& x : where) {
    double grad = integrate(Op::kGradient, t, f, x).first;
    double lhs = grad * grad;
    double pf = integrate(Op::kHeat, t, f, x).first;
    double pf2 = integrate(Op::kHeat, t, f2, x).first;
    double rhs = c1 * c1 / (2 * t) * (pf2 - pf * pf);
    if (lhs - rhs > worst) {
      worst = lhs - rhs;
      out = {lhs, rhs, x};
    }
  }
  return out;
}

}  // namespace mgk
