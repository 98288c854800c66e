#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../tests/support.hpp"
#include "mgk/errors.hpp"
#include "mgk/kernels.hpp"
#include "mgk/spectral.hpp"

using namespace mgt;

namespace {

constexpr double kPi = 3.14159265358979323846;

// L^2 inner product of two eigenfunctions by quadrature.
double quad_inner(const MetricGraph& g, const EigenBasis& b, std::size_t i,
                  std::size_t j) {
  auto grid = build_quadrature(g, 0.05);
  double acc = 0;
  for (SegmentIndex s = 0; s < g.segment_count(); ++s)
    for (std::size_t n = 0; n < grid->seg[s].x.size(); ++n) {
      GraphPoint p{s, grid->seg[s].x[n]};
      acc += grid->seg[s].w[n] * b.pairs[i].value(g, p) * b.pairs[j].value(g, p);
    }
  return acc;
}

double quad_deriv_inner(const MetricGraph& g, const EigenBasis& b,
                        std::size_t i, std::size_t j) {
  auto grid = build_quadrature(g, 0.05);
  double acc = 0;
  for (SegmentIndex s = 0; s < g.segment_count(); ++s)
    for (std::size_t n = 0; n < grid->seg[s].x.size(); ++n) {
      GraphPoint p{s, grid->seg[s].x[n]};
      acc += grid->seg[s].w[n] * b.pairs[i].deriv(g, p) * b.pairs[j].deriv(g, p);
    }
  return acc;
}

}  // namespace

TEST_CASE("interval spectrum is the Neumann cosine ladder") {
  MetricGraph g = interval_graph(1.0);
  EigenBasis b = eigensolve(g, 100.0);
  REQUIRE(b.pairs.size() == 4);  // 0, pi^2, 4pi^2, 9pi^2
  CHECK(b.pairs[0].lambda == doctest::Approx(0.0));
  for (int n = 1; n <= 3; ++n)
    CHECK(b.pairs[n].lambda ==
          doctest::Approx(n * n * kPi * kPi).epsilon(1e-9));
  CHECK(b.lambda1() == doctest::Approx(kPi * kPi).epsilon(1e-9));

  // first excited state is +-sqrt(2) cos(pi x)
  GraphPoint p{0, 0.3};
  CHECK(std::abs(b.pairs[1].value(g, p)) ==
        doctest::Approx(std::sqrt(2.0) * std::cos(0.3 * kPi)).epsilon(1e-8));

  // independent finite-difference oracle agrees
  auto fd = fd_eigenvalues_refined(g, 0.01, 4);
  for (int n = 0; n < 4; ++n)
    CHECK(b.pairs[n].lambda ==
          doctest::Approx(fd[n]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("interval eigenfunctions satisfy normalization and the equation") {
  MetricGraph g = interval_graph(1.0);
  EigenBasis b = eigensolve(g, 50.0);
  for (std::size_t i = 0; i < b.pairs.size(); ++i) {
    CHECK(quad_inner(g, b, i, i) == doctest::Approx(1.0).epsilon(1e-10));
    // Dirichlet energy equals the eigenvalue
    CHECK(quad_deriv_inner(g, b, i, i) ==
          doctest::Approx(b.pairs[i].lambda).epsilon(1e-8).scale(1.0));
    // Neumann ends: derivative vanishes at both leaves
    CHECK(std::abs(b.pairs[i].deriv(g, {0, 0.0})) < 1e-7);
    CHECK(std::abs(b.pairs[i].deriv(g, {0, 1.0})) < 1e-7);
  }
  for (std::size_t i = 0; i < b.pairs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      CHECK(std::abs(quad_inner(g, b, i, j)) < 1e-8);
}

TEST_CASE("circle spectrum doubles every positive eigenvalue") {
  MetricGraph g = circle_graph(2.0);  // circumference 2
  EigenBasis b = eigensolve(g, 100.0);
  // 0, then (n pi)^2 with multiplicity 2 for n = 1..3
  REQUIRE(b.pairs.size() == 7);
  CHECK(b.pairs[0].lambda == doctest::Approx(0.0));
  for (int n = 1; n <= 3; ++n) {
    double want = n * n * kPi * kPi;
    CHECK(b.pairs[2 * n - 1].lambda == doctest::Approx(want).epsilon(1e-9));
    CHECK(b.pairs[2 * n].lambda == doctest::Approx(want).epsilon(1e-9));
  }
  // orthonormal across the double eigenspaces
  for (std::size_t i = 0; i < b.pairs.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      CHECK(quad_inner(g, b, i, j) ==
            doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));

  auto fd = fd_eigenvalues_refined(g, 0.01, 7);
  for (int n = 0; n < 7; ++n)
    CHECK(b.pairs[n].lambda ==
          doctest::Approx(fd[n]).epsilon(2e-4).scale(1.0));
}

TEST_CASE("equilateral star spectrum interleaves symmetric and antisymmetric modes") {
  MetricGraph g = star_graph(3, 1.0);
  EigenBasis b = eigensolve(g, 100.0);
  // 0; (pi/2)^2 x2; pi^2; (3pi/2)^2 x2; (2pi)^2; (5pi/2)^2 x2; (3pi)^2
  std::vector<double> want{0.0};
  std::vector<double> mult{1};
  for (int n = 1; 0.25 * n * n * kPi * kPi <= 100.0; ++n) {
    want.push_back(0.25 * n * n * kPi * kPi);
    mult.push_back(n % 2 == 1 ? 2 : 1);
  }
  std::size_t idx = 0;
  for (std::size_t w = 0; w < want.size(); ++w) {
    for (int r = 0; r < mult[w]; ++r) {
      REQUIRE(idx < b.pairs.size());
      CHECK(b.pairs[idx].lambda ==
            doctest::Approx(want[w]).epsilon(1e-9).scale(1.0));
      ++idx;
    }
  }
  CHECK(idx == b.pairs.size());
  CHECK(b.lambda1() == doctest::Approx(kPi * kPi / 4).epsilon(1e-9));

  auto fd = fd_eigenvalues_refined(g, 0.005, 6);
  for (int n = 0; n < 6; ++n)
    CHECK(b.pairs[n].lambda ==
          doctest::Approx(fd[n]).epsilon(1e-4).scale(1.0));

  // vertex conditions: continuity and zero outward-derivative sum at the
  // center, Neumann at the leaves
  VertexIndex c = g.find_vertex("c");
  for (const EigenPair& p : b.pairs) {
    double v0 = p.value(g, {g.incident(c)[0].seg, 0.0});
    double dsum = 0;
    for (const Incidence& inc : g.incident(c)) {
      CHECK(p.value(g, {inc.seg, g.endpoint_coord(inc.seg, inc.end)}) ==
            doctest::Approx(v0).epsilon(1e-9).scale(1.0));
      double d = p.deriv(g, {inc.seg, g.endpoint_coord(inc.seg, inc.end)});
      dsum += (inc.end == 0 ? 1.0 : -1.0) * d;
    }
    CHECK(std::abs(dsum) < 1e-7);
  }
}

TEST_CASE("spectral kernel approaches equilibrium and matches the path sum") {
  MetricGraph g = star_graph(3, 1.0);
  EigenBasis b = eigensolve(g, lambda_max_for_time(0.05, 1e-10));

  // large time: uniform distribution 1/mu(X)
  CHECK(spectral_heat_kernel(g, b, 50.0, {0, 0.4}, {2, 0.9}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  // cross-check two fully independent kernel constructions
  KernelEngine engine(g, {1e-10, 20'000'000});
  for (double t : {0.05, 0.3, 1.0}) {
    for (auto [x, y] : {std::pair<GraphPoint, GraphPoint>({0, 0.35}, {1, 0.6}),
                        {{0, 0.12}, {0, 0.8}},
                        {{2, 0.5}, {2, 0.5}}}) {
      double ps = engine.heat(t, x, y).value;
      double sp = spectral_heat_kernel(g, b, t, x, y);
      CHECK(sp == doctest::Approx(ps).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("harmonic forms span the cycle space") {
  CHECK(harmonic_forms(star_graph(3, 1.0)).dimension() == 0);
  CHECK(harmonic_forms(interval_graph(1.0)).dimension() == 0);

  MetricGraph circle = circle_graph(2.0);
  HarmonicFormBasis hb = harmonic_forms(circle);
  REQUIRE(hb.dimension() == 1);
  // both parallel edges leave the same vertex, so the signed sum there is
  // h0 + h1; the cycle runs one edge forward and the other backward
  double h0 = hb.h[0][0], h1 = hb.h[0][1];
  CHECK(h0 * h0 * 1.0 + h1 * h1 * 1.0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h0 + h1 == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  MetricGraph unions = circle_union_graph(3, 1.0);
  CHECK(harmonic_forms(unions).dimension() == 3);
}

TEST_CASE("duality orientation needs even degrees") {
  CHECK_FALSE(poincare_orientation(star_graph(3, 1.0)).has_value());
  CHECK_FALSE(poincare_orientation(spider_graph(3)).has_value());

  for (int n : {1, 2, 3}) {
    MetricGraph g = circle_union_graph(n, 1.0);
    auto ori = poincare_orientation(g);
    REQUIRE(ori.has_value());
    REQUIRE((int)ori->size() == g.edge_count());
    for (double s : *ori) CHECK(std::abs(s) == doctest::Approx(1.0));
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
      double sum = 0;
      for (const Incidence& inc : g.incident(v))
        sum += (inc.end == 0 ? 1.0 : -1.0) * (*ori)[inc.seg];
      CHECK(sum == doctest::Approx(0.0).scale(1.0));
    }
  }
}

TEST_CASE("form kernel keeps its harmonic part as t grows") {
  MetricGraph g = circle_graph(2.0);
  EigenBasis b = eigensolve(g, 60.0);
  HarmonicFormBasis hb = harmonic_forms(g);
  double late = spectral_form_kernel(g, b, hb, 60.0, {0, 0.3}, {1, 0.7});
  // only the harmonic projector survives; on the circle that is +-1/mu(X)
  CHECK(std::abs(late) == doctest::Approx(0.5).epsilon(1e-10));

  // form eigenfunctions are orthonormal: <phi_i', phi_j'> = lambda_i delta_ij
  for (std::size_t i = 0; i < b.pairs.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double want = (i == j) ? b.pairs[i].lambda : 0.0;
      CHECK(quad_deriv_inner(g, b, i, j) ==
            doctest::Approx(want).epsilon(1e-8).scale(1.0 + want));
    }
}

TEST_CASE("large time constant turns on after t1 and decays") {
  MetricGraph g = star_graph(3, 1.0);
  EigenBasis b = eigensolve(g, 30.0);
  CHECK_THROWS_AS((void)large_time_be_constant(g, b, 0.1, 5.0), ToleranceError);

  EigenBasis full = eigensolve(g, 60.0);
  LargeTimeBE early = large_time_be_constant(g, full, 1.0, 1.5);
  CHECK(early.below_t1);

  double prev = kInf;
  for (double t : {6.0, 8.0, 10.0, 14.0}) {
    LargeTimeBE c = large_time_be_constant(g, full, 1.0, t);
    REQUIRE_FALSE(c.below_t1);
    CHECK(c.value > 0);
    CHECK(c.value < prev);
    prev = c.value;
  }
  // asymptotically C(t) ~ M^2 e^{-lambda1 (t - 2 t0)} / lambda1
  LargeTimeBE a = large_time_be_constant(g, full, 1.0, 20.0);
  LargeTimeBE a2 = large_time_be_constant(g, full, 1.0, 22.0);
  CHECK(a2.value / a.value ==
        doctest::Approx(std::exp(-full.lambda1() * 2.0)).epsilon(1e-3));
}

TEST_CASE("eigensolve rejects rays and bad ranges") {
  CHECK_THROWS_AS((void)eigensolve(spider_graph(3), 10.0), std::invalid_argument);
  CHECK_THROWS_AS((void)eigensolve(interval_graph(1.0), -1.0), std::invalid_argument);
}

TEST_CASE("weyl count tracks the staircase on a mixed graph") {
  // circle with a pendant edge: lengths 0.7 + 0.7 + 0.9
  GraphSpec s;
  s.vertices = {{"a"}, {"b"}, {"w"}};
  s.edges = {{"c0", "a", "b", 0.7}, {"c1", "a", "b", 0.7}, {"p", "b", "w", 0.9}};
  MetricGraph g = MetricGraph::build(s);
  double lmax = 150.0;
  EigenBasis b = eigensolve(g, lmax);
  double expected = g.total_edge_length() / kPi * std::sqrt(lmax);
  CHECK(std::abs((double)b.pairs.size() - expected) <=
        g.vertex_count() + g.edge_count());
  // eigenvalues ascend and stay in range
  for (std::size_t i = 1; i < b.pairs.size(); ++i) {
    CHECK(b.pairs[i].lambda >= b.pairs[i - 1].lambda - 1e-12);
    CHECK(b.pairs[i].lambda <= lmax * (1 + 1e-9));
  }
  // FD oracle on the first handful
  auto fd = fd_eigenvalues_refined(g, 0.005, 5);
  for (int n = 0; n < 5; ++n)
    CHECK(b.pairs[n].lambda ==
          doctest::Approx(fd[n]).epsilon(2e-4).scale(1.0));
}
