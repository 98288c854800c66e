#include "mgk/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mgk/errors.hpp"

namespace mgk {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Vertex-condition matrix at frequency k > 0.  Unknowns are (A_e, B_e) per
// edge in columns (2e, 2e+1); rows are the continuity chains plus one
// Kirchhoff row per vertex, with derivative rows divided by k so all entries
// stay O(1).
Eigen::MatrixXd secular_matrix(const MetricGraph& g, double k) {
  const int E = g.edge_count();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * E, 2 * E);
  int row = 0;
  auto val_coeff = [&](const Incidence& inc, double* ca, double* cb) {
    if (inc.end == 0) {
      *ca = 1;
      *cb = 0;
    } else {
      double kl = k * g.segment(inc.seg).length;
      *ca = std::cos(kl);
      *cb = std::sin(kl);
    }
  };
  auto outderiv_coeff = [&](const Incidence& inc, double* ca, double* cb) {
    if (inc.end == 0) {
      *ca = 0;
      *cb = 1;
    } else {
      double kl = k * g.segment(inc.seg).length;
      *ca = std::sin(kl);
      *cb = -std::cos(kl);
    }
  };
  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    const auto& inc = g.incident(v);
    if (inc.empty()) continue;
    double a0, b0;
    val_coeff(inc[0], &a0, &b0);
    for (std::size_t i = 1; i < inc.size(); ++i) {
      double a, b;
      val_coeff(inc[i], &a, &b);
      M(row, 2 * inc[0].seg) -= a0;
      M(row, 2 * inc[0].seg + 1) -= b0;
      M(row, 2 * inc[i].seg) += a;
      M(row, 2 * inc[i].seg + 1) += b;
      ++row;
    }
    for (const Incidence& ic : inc) {
      double a, b;
      outderiv_coeff(ic, &a, &b);
      M(row, 2 * ic.seg) += a;
      M(row, 2 * ic.seg + 1) += b;
    }
    ++row;
  }
  return M;
}

int det_sign(const Eigen::MatrixXd& M) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  double s = lu.permutationP().determinant();
  for (int i = 0; i < M.rows(); ++i) {
    double d = lu.matrixLU()(i, i);
    if (d == 0) return 0;
    if (d < 0) s = -s;
  }
  return s > 0 ? 1 : -1;
}

double sigma_min(const MetricGraph& g, double k) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(secular_matrix(g, k));
  return svd.singularValues().tail(1)(0);
}

double bisect_root(const MetricGraph& g, double a, double b, int sa) {
  for (int i = 0; i < 200 && b - a > 1e-13 * std::max(1.0, a); ++i) {
    double m = (a + b) / 2;
    int sm = det_sign(secular_matrix(g, m));
    if (sm == 0) return m;
    if (sm == sa)
      a = m;
    else
      b = m;
  }
  return (a + b) / 2;
}

double golden_min(const MetricGraph& g, double a, double b) {
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = sigma_min(g, c), fd = sigma_min(g, d);
  for (int i = 0; i < 120 && b - a > 1e-14 * std::max(1.0, a); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = sigma_min(g, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = sigma_min(g, d);
    }
  }
  return (a + b) / 2;
}

// Exact edge integrals of products of cos(kx), sin(kx) over [0, L].
struct TrigMoments {
  double cc, cs, ss;
};
TrigMoments trig_moments(double k, double L) {
  double s2 = std::sin(2 * k * L), s1 = std::sin(k * L);
  return {L / 2 + s2 / (4 * k), s1 * s1 / (2 * k), L / 2 - s2 / (4 * k)};
}

double pair_inner(const MetricGraph& g, double k, const Eigen::VectorXd& u,
                  const Eigen::VectorXd& v) {
  double acc = 0;
  for (SegmentIndex e = 0; e < g.edge_count(); ++e) {
    TrigMoments m = trig_moments(k, g.segment(e).length);
    double A = u(2 * e), B = u(2 * e + 1), C = v(2 * e), D = v(2 * e + 1);
    acc += A * C * m.cc + (A * D + B * C) * m.cs + B * D * m.ss;
  }
  return acc;
}

// Null vectors of the secular matrix at a refined root, turned into an
// L^2(mu)-orthonormal set of eigenpairs.
void emit_eigenpairs(const MetricGraph& g, double k,
                     std::vector<EigenPair>* out) {
  Eigen::MatrixXd M = secular_matrix(g, k);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double thresh = 1e-8 * std::max(sv(0), 1e-300);
  std::vector<Eigen::VectorXd> null;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= thresh) null.push_back(svd.matrixV().col(i));
  if (null.empty()) return;

  const int m = static_cast<int>(null.size());
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j)
      gram(i, j) = gram(j, i) = pair_inner(g, k, null[i], null[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  for (int j = 0; j < m; ++j) {
    double gj = es.eigenvalues()(j);
    if (gj <= 1e-12 * es.eigenvalues().maxCoeff()) continue;  // defensive
    Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * g.edge_count());
    for (int i = 0; i < m; ++i) w += es.eigenvectors()(i, j) * null[i];
    w /= std::sqrt(gj);
    EigenPair p;
    p.lambda = k * k;
    p.A.resize(g.edge_count());
    p.B.resize(g.edge_count());
    for (SegmentIndex e = 0; e < g.edge_count(); ++e) {
      p.A[e] = w(2 * e);
      p.B[e] = w(2 * e + 1);
    }
    out->push_back(std::move(p));
  }
}

void emit_constants(const MetricGraph& g, std::vector<EigenPair>* out) {
  for (int c = 0; c < g.component_count(); ++c) {
    double mass = 0;
    for (SegmentIndex e = 0; e < g.edge_count(); ++e)
      if (g.component(g.segment(e).v_minus) == c) mass += g.segment(e).length;
    if (mass <= 0) continue;  // isolated vertex carries no measure
    EigenPair p;
    p.lambda = 0;
    p.A.assign(g.edge_count(), 0.0);
    p.B.assign(g.edge_count(), 0.0);
    for (SegmentIndex e = 0; e < g.edge_count(); ++e)
      if (g.component(g.segment(e).v_minus) == c)
        p.A[e] = 1.0 / std::sqrt(mass);
    out->push_back(std::move(p));
  }
}

}  // namespace

double EigenPair::value(const MetricGraph& g, const GraphPoint& p) const {
  (void)g;
  if (lambda == 0) return A[p.seg] + B[p.seg] * p.x;
  double k = std::sqrt(lambda);
  return A[p.seg] * std::cos(k * p.x) + B[p.seg] * std::sin(k * p.x);
}

double EigenPair::deriv(const MetricGraph& g, const GraphPoint& p) const {
  (void)g;
  if (lambda == 0) return B[p.seg];
  double k = std::sqrt(lambda);
  return k * (B[p.seg] * std::cos(k * p.x) - A[p.seg] * std::sin(k * p.x));
}

double EigenBasis::lambda1() const {
  for (const EigenPair& p : pairs)
    if (p.lambda > 1e-9) return p.lambda;
  throw std::logic_error("no positive eigenvalue in basis");
}

double lambda_max_for_time(double t, double eps) {
  if (!(t > 0) || !(eps > 0))
    throw std::invalid_argument("time and tolerance must be positive");
  return std::log(10.0 / eps) / t;
}

EigenBasis eigensolve(const MetricGraph& g, double lambda_max) {
  if (g.ray_count() > 0)
    throw std::invalid_argument("eigensolve requires a compact graph (no rays)");
  if (!(lambda_max > 0) || !std::isfinite(lambda_max))
    throw std::invalid_argument("lambda_max must be positive and finite");

  EigenBasis basis;
  basis.lambda_max = lambda_max;
  emit_constants(g, &basis.pairs);
  if (g.edge_count() == 0) return basis;

  const double L = g.total_edge_length();
  const double kmax = std::sqrt(lambda_max);
  double h = kPi / (8 * L);

  for (int attempt = 0;; ++attempt) {
    std::vector<EigenPair> found;
    emit_constants(g, &found);

    // One extra point past kmax: a root just below the cutoff still needs a
    // bracket (odd multiplicity) or an interior dip (even) to be seen.
    int n = static_cast<int>(std::ceil(kmax / h)) + 1;
    double step = kmax / (n - 1);
    std::vector<double> ks(n), smin(n);
    std::vector<int> sgn(n);
    for (int i = 0; i < n; ++i) {
      ks[i] = (i + 1) * step;
      Eigen::MatrixXd M = secular_matrix(g, ks[i]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
      smin[i] = svd.singularValues().tail(1)(0);
      sgn[i] = det_sign(M);
    }

    std::vector<double> roots;
    std::vector<bool> bracket(n, false);
    for (int i = 0; i + 1 < n; ++i) {
      if (sgn[i] != 0 && sgn[i + 1] != 0 && sgn[i] != sgn[i + 1]) {
        roots.push_back(bisect_root(g, ks[i], ks[i + 1], sgn[i]));
        bracket[i] = bracket[i + 1] = true;
      }
    }
    for (int i = 1; i + 1 < n; ++i) {
      if (bracket[i]) continue;
      if (smin[i] < smin[i - 1] && smin[i] <= smin[i + 1]) {
        double k = golden_min(g, ks[i - 1], ks[i + 1]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(secular_matrix(g, k));
        const auto& sv = svd.singularValues();
        if (sv.tail(1)(0) <= 1e-8 * std::max(sv(0), 1e-300)) roots.push_back(k);
      }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) {
                              return b - a < 1e-9 * (1 + a);
                            }),
                roots.end());
    for (double k : roots)
      if (k * k <= lambda_max * (1 + 1e-12)) emit_eigenpairs(g, k, &found);

    std::sort(found.begin(), found.end(),
              [](const EigenPair& a, const EigenPair& b) {
                return a.lambda < b.lambda;
              });

    // Weyl-count detector: the eigenvalue staircase tracks (L/pi) sqrt(lambda)
    // within a graph-size offset; a larger gap means the scan missed roots.
    double expected = L / kPi * kmax;
    double slack = g.vertex_count() + g.edge_count();
    if (std::abs(static_cast<double>(found.size()) - expected) <= slack) {
      basis.pairs = std::move(found);
      return basis;
    }
    if (attempt >= 4)
      throw ToleranceError(
          "eigensolve: missed-root detector still failing after refinement",
          std::abs(static_cast<double>(found.size()) - expected));
    h /= 2;
  }
}

double spectral_heat_kernel(const MetricGraph& g, const EigenBasis& basis,
                            double t, const GraphPoint& x,
                            const GraphPoint& y) {
  if (!(t > 0)) throw std::invalid_argument("kernel time must be positive");
  double acc = 0;
  for (const EigenPair& p : basis.pairs)
    acc += std::exp(-p.lambda * t) * p.value(g, x) * p.value(g, y);
  return acc;
}

HarmonicFormBasis harmonic_forms(const MetricGraph& g) {
  HarmonicFormBasis basis;
  const int E = g.edge_count();
  if (E == 0) return basis;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(g.vertex_count(), E);
  for (SegmentIndex e = 0; e < E; ++e) {
    D(g.segment(e).v_minus, e) += 1;
    D(g.segment(e).v_plus, e) -= 1;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double thresh = 1e-10 * std::max(sv.size() > 0 ? sv(0) : 0.0, 1e-300);
  std::vector<Eigen::VectorXd> null;
  for (int i = 0; i < E; ++i)
    if (i >= sv.size() || sv(i) <= thresh) null.push_back(svd.matrixV().col(i));
  if (null.empty()) return basis;

  // Orthonormalize in L^2(mu): the inner product weights edge e by its length.
  const int m = static_cast<int>(null.size());
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      double acc = 0;
      for (SegmentIndex e = 0; e < E; ++e)
        acc += null[i](e) * null[j](e) * g.segment(e).length;
      gram(i, j) = gram(j, i) = acc;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  for (int j = 0; j < m; ++j) {
    double gj = es.eigenvalues()(j);
    if (gj <= 1e-12 * es.eigenvalues().maxCoeff()) continue;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(E);
    for (int i = 0; i < m; ++i) w += es.eigenvectors()(i, j) * null[i];
    w /= std::sqrt(gj);
    basis.h.emplace_back(w.data(), w.data() + E);
  }
  return basis;
}

double spectral_form_kernel(const MetricGraph& g, const EigenBasis& basis,
                            const HarmonicFormBasis& harm, double t,
                            const GraphPoint& x, const GraphPoint& y) {
  if (!(t > 0)) throw std::invalid_argument("kernel time must be positive");
  double acc = 0;
  for (const auto& h : harm.h) acc += h[x.seg] * h[y.seg];
  for (const EigenPair& p : basis.pairs) {
    if (p.lambda <= 1e-9) continue;
    double k = std::sqrt(p.lambda);
    // Normalized form eigenfunction phi' / k swaps the coefficients.
    double ex = p.B[x.seg] * std::cos(k * x.x) - p.A[x.seg] * std::sin(k * x.x);
    double ey = p.B[y.seg] * std::cos(k * y.x) - p.A[y.seg] * std::sin(k * y.x);
    acc += std::exp(-p.lambda * t) * ex * ey;
  }
  return acc;
}

std::optional<std::vector<double>> poincare_orientation(const MetricGraph& g) {
  if (g.ray_count() > 0) return std::nullopt;
  for (VertexIndex v = 0; v < g.vertex_count(); ++v)
    if (g.degree(v) % 2 != 0) return std::nullopt;

  // Hierholzer: walk unused incidences until stuck (necessarily back at the
  // start when all degrees are even), orienting edges along the walk.
  std::vector<double> sign(g.edge_count(), 0.0);
  std::vector<bool> used(g.edge_count(), false);
  std::vector<std::size_t> cursor(g.vertex_count(), 0);
  for (VertexIndex start = 0; start < g.vertex_count(); ++start) {
    while (true) {
      // find an unused incidence at some vertex of this walk's territory
      VertexIndex v = start;
      const auto& inc0 = g.incident(v);
      while (cursor[v] < inc0.size() && used[inc0[cursor[v]].seg]) ++cursor[v];
      if (cursor[v] >= inc0.size()) break;
      VertexIndex w = v;
      do {
        const auto& inc = g.incident(w);
        while (cursor[w] < inc.size() && used[inc[cursor[w]].seg]) ++cursor[w];
        if (cursor[w] >= inc.size()) break;
        const Incidence& ic = inc[cursor[w]];
        used[ic.seg] = true;
        // traverse away from w: sign +1 when leaving the minus end
        sign[ic.seg] = ic.end == 0 ? 1.0 : -1.0;
        w = g.endpoint(ic.seg, 1 - ic.end);
      } while (w != v);
    }
  }
  for (SegmentIndex e = 0; e < g.edge_count(); ++e)
    if (sign[e] == 0) return std::nullopt;  // defensive; cannot happen
  return sign;
}

LargeTimeBE large_time_be_constant(const MetricGraph& g, const EigenBasis& basis,
                                   double t0, double t) {
  if (!(t0 > 0) || !(t > 0))
    throw std::invalid_argument("times must be positive");
  if (basis.lambda_max * t0 < std::log(1e8))
    throw ToleranceError("eigenbasis too short for the requested t0",
                         basis.lambda_max * t0);
  LargeTimeBE out;
  out.t0 = t0;

  // Sweep the kernel and its squared gradient at t0 on a node grid, under
  // the normalized measure mu/mu(X).
  double muX = g.total_edge_length();
  double panel = std::min(std::sqrt(t0), g.min_edge_length() / 2);
  auto grid = build_quadrature(g, panel, 0, {}, 8);
  std::vector<GraphPoint> pts;
  for (SegmentIndex s = 0; s < g.segment_count(); ++s)
    for (double x : grid->seg[s].x) pts.push_back({s, x});
  double M = 0;
  for (const GraphPoint& x : pts)
    for (const GraphPoint& y : pts) {
      double p = 0, dp = 0;
      for (const EigenPair& ep : basis.pairs) {
        double w = std::exp(-ep.lambda * t0);
        double vy = ep.value(g, y);
        p += w * ep.value(g, x) * vy;
        dp += w * ep.deriv(g, x) * vy;
      }
      M = std::max(M, muX * p);
      M = std::max(M, muX * muX * dp * dp);
    }
  out.M = M;

  if (t <= 2 * t0) return out;  // below_t1 stays set
  double S0 = 0, S1 = 0;
  for (const EigenPair& p : basis.pairs) {
    if (p.lambda <= 1e-9) continue;
    double w = std::exp(-p.lambda * (t - 2 * t0));
    S0 += w;
    S1 += w / p.lambda;
  }
  double den = 1 - M * M * S0;
  if (den <= 0) return out;
  out.below_t1 = false;
  out.value = M * M * S1 / den;
  return out;
}

}  // namespace mgk
