#include "mgk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace mgk {

namespace {

constexpr double kPi = 3.14159265358979323846;

GaussRule compute_rule(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be at least 1");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::sort(r.x.begin(), r.x.end());
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex m;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double EdgeDescriptor::value(double x) const {
  double v = 0;
  for (std::size_t k = poly.size(); k-- > 0;) v = v * x + poly[k];
  for (const Trig& t : trig) v += t.amp * std::cos(t.omega * x + t.phase);
  for (const Hat& h : hat) {
    double u = 1.0 - std::abs(x - h.center) / h.halfwidth;
    if (u > 0) v += h.height * u;
  }
  for (const Step& s : step)
    if (x >= s.lo && x <= s.hi) v += s.height;
  for (const Ramp& r : ramp) {
    double a = r.center - r.halfwidth, b = r.center + r.halfwidth;
    if (x <= a) continue;
    if (x >= b) {
      v += r.height * r.halfwidth;
    } else if (x <= r.center) {
      double d = x - a;
      v += r.height * d * d / (2 * r.halfwidth);
    } else {
      double d = b - x;
      v += r.height * (r.halfwidth - d * d / (2 * r.halfwidth));
    }
  }
  return v;
}

double EdgeDescriptor::deriv(double x) const {
  double v = 0;
  for (std::size_t k = poly.size(); k-- > 1;) v = v * x + poly[k] * double(k);
  for (const Trig& t : trig) v -= t.amp * t.omega * std::sin(t.omega * x + t.phase);
  for (const Hat& h : hat) {
    double u = x - h.center;
    if (std::abs(u) < h.halfwidth && u != 0)
      v -= h.height / h.halfwidth * (u > 0 ? 1.0 : -1.0);
  }
  for (const Ramp& r : ramp) {
    double u = 1.0 - std::abs(x - r.center) / r.halfwidth;
    if (u > 0) v += r.height * u;
  }
  return v;  // steps contribute 0 a.e.
}

void EdgeDescriptor::breakpoints(std::vector<double>& out) const {
  for (const Hat& h : hat) {
    out.push_back(h.center - h.halfwidth);
    out.push_back(h.center);
    out.push_back(h.center + h.halfwidth);
  }
  for (const Step& s : step) {
    out.push_back(s.lo);
    out.push_back(s.hi);
  }
  for (const Ramp& r : ramp) {
    out.push_back(r.center - r.halfwidth);
    out.push_back(r.center);
    out.push_back(r.center + r.halfwidth);
  }
}

std::size_t QuadratureGrid::node_count() const {
  std::size_t n = 0;
  for (const SegNodes& s : seg) n += s.x.size();
  return n;
}

std::shared_ptr<const QuadratureGrid> build_quadrature(
    const MetricGraph& g, double max_panel, double ray_cap,
    const std::map<SegmentIndex, std::vector<double>>& breaks,
    int nodes_per_panel) {
  if (!(max_panel > 0) || !std::isfinite(max_panel))
    throw std::invalid_argument("quadrature panel length must be positive and finite");
  const GaussRule& rule = gauss_legendre(nodes_per_panel);

  auto grid = std::make_shared<QuadratureGrid>();
  grid->ray_cap = ray_cap;
  grid->seg.resize(g.segment_count());
  for (SegmentIndex s = 0; s < g.segment_count(); ++s) {
    const Segment& sg = g.segment(s);
    double L = sg.length;
    if (sg.is_ray()) {
      if (!(ray_cap > 0))
        throw std::invalid_argument("graph has rays: a positive ray_cap is required");
      L = ray_cap;
    }

    std::vector<double> cuts{0.0, L};
    auto it = breaks.find(s);
    if (it != breaks.end())
      for (double b : it->second)
        if (b > 1e-12 && b < L - 1e-12) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return b - a < 1e-12; }),
               cuts.end());

    QuadratureGrid::SegNodes& out = grid->seg[s];
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      double a = cuts[c], b = cuts[c + 1];
      int panels = std::max(1, (int)std::ceil((b - a) / max_panel));
      double h = (b - a) / panels;
      for (int p = 0; p < panels; ++p) {
        double pa = a + p * h;
        for (int i = 0; i < nodes_per_panel; ++i) {
          out.x.push_back(pa + h * (rule.x[i] + 1) / 2);
          out.w.push_back(rule.w[i] * h / 2);
        }
      }
    }
  }
  return grid;
}

GridFunction::GridFunction(std::shared_ptr<const QuadratureGrid> grid,
                           std::vector<std::vector<double>> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->seg.size())
    throw std::invalid_argument("grid function: one value array per segment required");
  for (std::size_t s = 0; s < values_.size(); ++s)
    if (values_[s].size() != grid_->seg[s].x.size())
      throw std::invalid_argument("grid function: sample count must match node count");
}

GridFunction GridFunction::from_descriptors(
    const MetricGraph& g, std::shared_ptr<const QuadratureGrid> grid,
    std::vector<EdgeDescriptor> desc) {
  if ((SegmentIndex)desc.size() != g.segment_count())
    throw std::invalid_argument("one descriptor per segment required");
  std::vector<std::vector<double>> vals(grid->seg.size());
  std::vector<std::vector<double>> der(grid->seg.size());
  for (std::size_t s = 0; s < grid->seg.size(); ++s) {
    const auto& xs = grid->seg[s].x;
    vals[s].reserve(xs.size());
    der[s].reserve(xs.size());
    for (double x : xs) {
      vals[s].push_back(desc[s].value(x));
      der[s].push_back(desc[s].deriv(x));
    }
  }
  GridFunction f(std::move(grid), std::move(vals));
  f.deriv_ = std::move(der);
  f.desc_ = std::move(desc);
  return f;
}

GridFunction GridFunction::constant(std::shared_ptr<const QuadratureGrid> grid,
                                    double c) {
  std::vector<std::vector<double>> vals(grid->seg.size());
  std::vector<std::vector<double>> der(grid->seg.size());
  for (std::size_t s = 0; s < grid->seg.size(); ++s) {
    vals[s].assign(grid->seg[s].x.size(), c);
    der[s].assign(grid->seg[s].x.size(), 0.0);
  }
  GridFunction f(std::move(grid), std::move(vals));
  f.deriv_ = std::move(der);
  return f;
}

const std::vector<std::vector<double>>& GridFunction::derivative() const {
  if (deriv_.empty())
    throw std::logic_error("grid function carries no derivative samples");
  return deriv_;
}

void GridFunction::set_derivative(std::vector<std::vector<double>> d) {
  if (d.size() != values_.size())
    throw std::invalid_argument("derivative arrays must match segment count");
  for (std::size_t s = 0; s < d.size(); ++s)
    if (d[s].size() != values_[s].size())
      throw std::invalid_argument("derivative sample count must match node count");
  deriv_ = std::move(d);
}

double GridFunction::eval(const GraphPoint& p) const {
  if (desc_.empty())
    throw std::logic_error("grid function has no analytic descriptors");
  return desc_[p.seg].value(p.x);
}

double GridFunction::eval_deriv(const GraphPoint& p) const {
  if (desc_.empty())
    throw std::logic_error("grid function has no analytic descriptors");
  return desc_[p.seg].deriv(p.x);
}

double GridFunction::integral() const {
  double v = 0;
  for (std::size_t s = 0; s < values_.size(); ++s)
    for (std::size_t i = 0; i < values_[s].size(); ++i)
      v += grid_->seg[s].w[i] * values_[s][i];
  return v;
}

double GridFunction::l1_norm() const {
  double v = 0;
  for (std::size_t s = 0; s < values_.size(); ++s)
    for (std::size_t i = 0; i < values_[s].size(); ++i)
      v += grid_->seg[s].w[i] * std::abs(values_[s][i]);
  return v;
}

double GridFunction::sup_norm() const {
  double v = 0;
  for (const auto& seg : values_)
    for (double x : seg) v = std::max(v, std::abs(x));
  return v;
}

double GridFunction::vertex_spread(const MetricGraph& g) const {
  if (desc_.empty())
    throw std::logic_error("vertex continuity check needs analytic descriptors");
  double worst = 0;
  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    double lo = kInf, hi = -kInf;
    for (const Incidence& inc : g.incident(v)) {
      double x = inc.end == 0 ? 0.0 : g.segment(inc.seg).length;
      double val = desc_[inc.seg].value(x);
      lo = std::min(lo, val);
      hi = std::max(hi, val);
    }
    if (hi > lo) worst = std::max(worst, hi - lo);
  }
  return worst;
}

namespace {

std::vector<std::vector<double>> deriv_samples(const GridFunction& f) {
  if (f.has_derivative()) return f.derivative();
  throw std::logic_error(
      "function is not differentiable: no descriptor and no derivative samples");
}

}  // namespace

GridFunction carre_du_champ(const GridFunction& f) {
  auto d = deriv_samples(f);
  for (auto& seg : d)
    for (double& x : seg) x = x * x;
  return GridFunction(f.grid_ptr(), std::move(d));
}

GridFunction gradient_modulus(const GridFunction& f) {
  auto d = deriv_samples(f);
  for (auto& seg : d)
    for (double& x : seg) x = std::abs(x);
  return GridFunction(f.grid_ptr(), std::move(d));
}

}  // namespace mgk
