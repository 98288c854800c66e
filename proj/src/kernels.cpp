#include "mgk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mgk/errors.hpp"

namespace mgk {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_time(double t) {
  if (!(t > 0) || !std::isfinite(t))
    throw std::invalid_argument("kernel time must be positive and finite");
}

// Effective branching factor for the crude path count 2 b^n.
double branch_factor(const MetricGraph& g) {
  return std::max(0, std::min(g.max_degree(), g.edge_count()));
}

// Envelope sup_{d > L} (d/2t) g_t(d); the integrand peaks at d = sqrt(2t).
double gradient_envelope(double t, double L) {
  double u = std::max(L, std::sqrt(2 * t));
  return u / (2 * t) * gaussian(t, u);
}

double tail_bound_impl(const MetricGraph& g, double t, double L, bool grad) {
  check_time(t);
  L = std::max(L, 0.0);
  auto env = [&](double u) {
    return grad ? gradient_envelope(t, u) : gaussian(t, u);
  };
  const double r = g.min_edge_length();
  const double b = branch_factor(g);
  if (!std::isfinite(r) || b == 0) return 2 * env(L);  // only n = 0 paths exist

  const double n0 = std::max(0.0, std::ceil(L / r));
  // Flat part: n < n0 paths, each bounded by env(L).
  double flat_count;
  if (b == 1)
    flat_count = n0;
  else
    flat_count = (std::pow(b, n0) - 1) / (b - 1);
  double bound = 2 * env(L) * flat_count;

  // Decaying part: n >= n0, bounded by env(n r).  Once the term ratio
  // q_n = b exp(-(2n+1) r^2 / 4t) drops below 1/2 the rest is geometric.
  double term = 2 * std::pow(b, n0) * env(n0 * r);
  double n = n0;
  for (int guard = 0; guard < 100000; ++guard) {
    bound += term;
    double q = b * std::exp(-(2 * n + 1) * r * r / (4 * t));
    if (q < 0.5) {
      bound += term * q / (1 - q);
      break;
    }
    n += 1;
    term *= q;
  }
  return bound;
}

// Smallest admissible quantized cutoff for a given certified tail bound.
template <class Tail>
double cutoff_search(const MetricGraph& g, double t, double eps,
                     double rho_floor, Tail tail) {
  check_time(t);
  if (!(eps > 0)) throw std::invalid_argument("truncation eps must be positive");
  rho_floor = std::max(rho_floor, 0.0);
  if (std::isinf(eps)) return rho_floor;

  // Quantize upward in eighths so nearby requests share one compiled set.
  auto quantize = [](double L) { return std::ceil(L * 8) / 8; };
  double L = quantize(rho_floor);
  double step = std::max(std::sqrt(t), std::isfinite(g.min_edge_length())
                                           ? g.min_edge_length() / 2
                                           : 0.5);
  for (int guard = 0; guard < 10000 && tail(L) > eps; ++guard)
    L = quantize(L + step);
  if (tail(L) > eps)
    throw ToleranceError("truncation cutoff search failed", tail(L));
  while (L - 0.125 >= rho_floor && tail(L - 0.125) <= eps) L -= 0.125;
  return L;
}

}  // namespace

double gaussian(double t, double u) {
  check_time(t);
  return std::exp(-u * u / (4 * t)) / std::sqrt(4 * kPi * t);
}

double path_tail_bound(const MetricGraph& g, double t, double L) {
  return tail_bound_impl(g, t, L, false);
}

double gradient_tail_bound(const MetricGraph& g, double t, double L) {
  return tail_bound_impl(g, t, L, true);
}

double truncation_cutoff(const MetricGraph& g, double t, double eps,
                         double rho_floor) {
  return cutoff_search(g, t, eps, rho_floor,
                       [&](double L) { return path_tail_bound(g, t, L); });
}

KernelValue KernelEngine::evaluate(Which which, double t, const GraphPoint& x,
                                   const GraphPoint& y) const {
  check_time(t);
  if (!g_.contains(x) || !g_.contains(y))
    throw std::invalid_argument("kernel evaluation: point outside the graph");
  if (which == Which::kGradient) {
    VertexIndex v;
    if (g_.at_vertex(x, &v))
      throw std::invalid_argument(
          "gradient kernel: x sits on vertex " + g_.vertex_id(v) +
          " where the derivative is direction-dependent");
  }

  const double rho = g_.geodesic_distance(x, y);
  if (std::isinf(rho)) return {0.0, 0.0, 0, 0.0};  // different components

  const bool grad = which == Which::kGradient;
  auto tail_at = [&](double L) {
    return grad ? gradient_tail_bound(g_, t, L) : path_tail_bound(g_, t, L);
  };

  // Aim the certified tail three digits below the leading term so that far
  // apart pairs keep a usable relative error; opt_.eps stays the hard
  // contract and the relative goal degrades silently under budget pressure.
  double eps_goal =
      std::isinf(opt_.eps)
          ? opt_.eps
          : std::min(opt_.eps, std::max(1e-3 * gaussian(t, rho), 1e-300));
  double L = cutoff_search(g_, t, eps_goal, rho, tail_at);
  std::shared_ptr<const CompiledPathSet> set;
  while (true) {
    try {
      set = cache_.get(x.seg, y.seg, L, opt_.path_budget);
      break;
    } catch (const ToleranceError&) {
      // Budget hit: back off the cutoff toward the direct distance and let
      // the certified bound report what was actually achieved.
      double L2 = std::max(rho, L - std::max(0.25, 0.1 * L));
      if (L2 >= L)
        throw ToleranceError("path budget exhausted at the direct distance",
                             kInf);
      L = L2;
    }
  }
  double tail = tail_at(L);
  if (tail > opt_.eps)
    throw ToleranceError(
        "requested kernel tolerance unreachable within the path budget; "
        "achieved " + std::to_string(tail),
        tail);

  double v = 0;
  std::size_t used = 0;
  if (set->has_trivial) {
    double u = std::abs(x.x - y.x);
    switch (which) {
      case Which::kHeat:
      case Which::kForm:
        v += gaussian(t, u);
        break;
      case Which::kGradient: {
        double sgn = x.x > y.x ? 1.0 : (x.x < y.x ? -1.0 : 0.0);
        v += sgn * (-u / (2 * t)) * gaussian(t, u);
        break;
      }
    }
    ++used;
  }
  const auto& amp = which == Which::kForm ? set->form_amplitude : set->amplitude;
  for (std::size_t i = 0; i < set->size(); ++i) {
    double d = std::abs(x.x - set->exit_coord[i]) + set->inner_len[i] +
               std::abs(y.x - set->entry_coord[i]);
    double gt = gaussian(t, d);
    if (grad)
      v += amp[i] * set->sigma_exit[i] * (-d / (2 * t)) * gt;
    else
      v += amp[i] * gt;
  }
  used += set->size();
  return {v, tail, used, L};
}

KernelValue KernelEngine::heat(double t, const GraphPoint& x,
                               const GraphPoint& y) const {
  return evaluate(Which::kHeat, t, x, y);
}
KernelValue KernelEngine::form_heat(double t, const GraphPoint& x,
                                    const GraphPoint& y) const {
  return evaluate(Which::kForm, t, x, y);
}
KernelValue KernelEngine::gradient(double t, const GraphPoint& x,
                                   const GraphPoint& y) const {
  return evaluate(Which::kGradient, t, x, y);
}

KernelValue heat_kernel(const MetricGraph& g, double t, const GraphPoint& x,
                        const GraphPoint& y, double eps) {
  return KernelEngine(g, {eps}).heat(t, x, y);
}
KernelValue form_heat_kernel(const MetricGraph& g, double t, const GraphPoint& x,
                             const GraphPoint& y, double eps) {
  return KernelEngine(g, {eps}).form_heat(t, x, y);
}
KernelValue gradient_kernel(const MetricGraph& g, double t, const GraphPoint& x,
                            const GraphPoint& y, double eps) {
  return KernelEngine(g, {eps}).gradient(t, x, y);
}

RatioSupResult kernel_ratio_sup(const MetricGraph& g, double t,
                                const std::vector<GraphPoint>& grid,
                                const KernelOptions& opt) {
  KernelEngine engine(g, opt);
  RatioSupResult r;
  for (const GraphPoint& x : grid)
    for (const GraphPoint& y : grid) {
      ++r.pairs;
      KernelValue p = engine.heat(t, x, y);
      if (p.value <= p.tail_bound) {
        ++r.skipped;
        continue;
      }
      KernelValue q = engine.form_heat(t, x, y);
      double ratio = std::abs(q.value) / p.value;
      if (ratio > r.sup) {
        r.sup = ratio;
        r.arg_x = x;
        r.arg_y = y;
      }
    }
  return r;
}

}  // namespace mgk
