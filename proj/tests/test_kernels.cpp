#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../tests/support.hpp"
#include "mgk/closed_form.hpp"
#include "mgk/errors.hpp"
#include "mgk/kernels.hpp"

using namespace mgk;
using namespace mgt;

TEST_CASE("gaussian values") {
  const double pi = std::acos(-1.0);
  CHECK(gaussian(1.0, 0.0) == doctest::Approx(0.28209479177387814).epsilon(1e-12));
  // u^2/4t = 1 at t = 1/4, and the prefactor is 1/sqrt(pi).
  CHECK(gaussian(0.25, 1.0) == doctest::Approx(std::exp(-1.0) / std::sqrt(pi)));
  CHECK_THROWS_AS(gaussian(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("spider closed forms match the hand value") {
  // Cross-leg kernel with one path: (2/3) g_t(0.3).
  double v = closed_form::spider_heat(3, 0.05, 0, 0.1, 1, 0.2);
  CHECK(v == doctest::Approx(0.53627).epsilon(1e-4));
  CHECK(v == doctest::Approx(2.0 / 3 * gaussian(0.05, 0.3)).epsilon(1e-14));
}

TEST_CASE("path-sum kernel matches the spider closed forms") {
  for (int N : {2, 3, 5}) {
    MetricGraph g = spider_graph(N);
    KernelEngine engine(g, {1e-12});
    std::mt19937_64 rng(7 + N);
    std::uniform_real_distribution<double> leg(0.03, 2.0);
    std::uniform_int_distribution<int> pick(0, N - 1);
    for (double t : {0.01, 0.2, 1.0}) {
      for (int trial = 0; trial < 12; ++trial) {
        int j = pick(rng), k = pick(rng);
        double x = leg(rng), y = leg(rng);
        KernelValue p = engine.heat(t, {j, x}, {k, y});
        KernelValue q = engine.form_heat(t, {j, x}, {k, y});
        CHECK(p.value ==
              doctest::Approx(closed_form::spider_heat(N, t, j, x, k, y)).epsilon(1e-10));
        CHECK(q.value ==
              doctest::Approx(closed_form::spider_form_heat(N, t, j, x, k, y))
                  .epsilon(1e-10));
        CHECK(p.tail_bound <= 1e-12);
      }
    }
  }
}

TEST_CASE("interval kernels match the image series") {
  MetricGraph g = interval_graph(1.0);
  KernelEngine engine(g, {1e-12});
  for (double t : {0.01, 0.1, 0.5}) {
    for (double x : {0.07, 0.5, 0.93}) {
      for (double y : {0.21, 0.64}) {
        CHECK(engine.heat(t, {0, x}, {0, y}).value ==
              doctest::Approx(closed_form::interval_neumann(1.0, t, x, y))
                  .epsilon(1e-10));
        CHECK(engine.form_heat(t, {0, x}, {0, y}).value ==
              doctest::Approx(closed_form::interval_dirichlet(1.0, t, x, y))
                  .epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("circle kernels match the periodic series up to orientation") {
  MetricGraph g = circle_graph(2.0);
  KernelEngine engine(g, {1e-12});
  // Both stored edges run v0 -> v1, so a rotationally consistent orientation
  // keeps e0 and reverses e1; the form kernel twists by that sign.
  auto arc = [&](const GraphPoint& p) { return p.seg == 0 ? p.x : 2.0 - p.x; };
  auto sigma = [&](const GraphPoint& p) { return p.seg == 0 ? 1.0 : -1.0; };
  for (double t : {0.02, 0.3}) {
    for (GraphPoint x : {GraphPoint{0, 0.3}, GraphPoint{1, 0.8}}) {
      for (GraphPoint y : {GraphPoint{0, 0.9}, GraphPoint{1, 0.2}}) {
        double ref = closed_form::circle_periodic(2.0, t, arc(x), arc(y));
        CHECK(engine.heat(t, x, y).value == doctest::Approx(ref).epsilon(1e-10));
        CHECK(engine.form_heat(t, x, y).value ==
              doctest::Approx(sigma(x) * sigma(y) * ref).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("kernel symmetry and positivity") {
  MetricGraph g = star_graph(3);
  KernelEngine engine(g, {1e-11});
  for (double t : {0.05, 0.7}) {
    for (GraphPoint x : {GraphPoint{0, 0.4}, GraphPoint{2, 0.85}}) {
      for (GraphPoint y : {GraphPoint{1, 0.1}, GraphPoint{0, 0.9}}) {
        KernelValue a = engine.heat(t, x, y);
        KernelValue b = engine.heat(t, y, x);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-11));
        CHECK(a.value > 0);
        KernelValue fa = engine.form_heat(t, x, y);
        KernelValue fb = engine.form_heat(t, y, x);
        CHECK(fa.value == doctest::Approx(fb.value).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("certified truncation: loose answer within its own tail bound of a tight one") {
  MetricGraph g = star_graph(3);
  GraphPoint x{0, 0.31}, y{1, 0.77};
  for (double t : {0.05, 0.4}) {
    KernelValue tight = heat_kernel(g, t, x, y, 1e-13);
    KernelValue loose = heat_kernel(g, t, x, y, 1e-4);
    CHECK(loose.tail_bound <= 1e-4);
    CHECK(std::abs(loose.value - tight.value) <= loose.tail_bound + 1e-12);
    CHECK(loose.paths_used <= tight.paths_used);
  }
}

TEST_CASE("truncation cutoff behavior") {
  MetricGraph g = star_graph(3);
  CHECK(truncation_cutoff(g, 0.1, kInf, 1.7) == doctest::Approx(1.7));
  double l1 = truncation_cutoff(g, 0.1, 1e-6);
  double l2 = truncation_cutoff(g, 0.1, 1e-12);
  CHECK(l1 <= l2);
  CHECK(path_tail_bound(g, 0.1, l1) <= 1e-6);
  CHECK(path_tail_bound(g, 0.1, l2) <= 1e-12);
  // The bound is monotone in L.
  CHECK(path_tail_bound(g, 0.1, 3.0) >= path_tail_bound(g, 0.1, 4.0));
}

TEST_CASE("different components give zero with zero tail") {
  GraphSpec s;
  s.vertices = {{"a"}, {"b"}, {"c"}, {"d"}};
  s.edges = {{"e0", "a", "b", 1.0}, {"e1", "c", "d", 1.0}};
  MetricGraph g = MetricGraph::build(s);
  KernelValue v = heat_kernel(g, 0.3, {0, 0.5}, {1, 0.5});
  CHECK(v.value == 0.0);
  CHECK(v.tail_bound == 0.0);
  CHECK(v.paths_used == 0);
}

TEST_CASE("gradient kernel against Richardson finite differences") {
  auto fd_gradient = [](const MetricGraph& g, double t, GraphPoint x,
                        GraphPoint y) {
    double h = 1e-3 * std::sqrt(t);
    auto at = [&](double dx) {
      return heat_kernel(g, t, {x.seg, x.x + dx}, y, 1e-14).value;
    };
    double d1 = (at(h) - at(-h)) / (2 * h);
    double d2 = (at(h / 2) - at(-h / 2)) / h;
    return (4 * d2 - d1) / 3;
  };

  MetricGraph g = interval_graph(1.0);
  double t = 1e-3;
  KernelValue gr = gradient_kernel(g, t, {0, 0.5}, {0, 0.4}, 1e-14);
  CHECK(gr.value ==
        doctest::Approx(-(0.1 / (2 * t)) * gaussian(t, 0.1)).epsilon(1e-8));
  CHECK(gr.value == doctest::Approx(fd_gradient(g, t, {0, 0.5}, {0, 0.4}))
                        .epsilon(1e-7));

  MetricGraph star = star_graph(3);
  for (double tt : {0.05, 0.3}) {
    for (auto [x, y] : {std::pair<GraphPoint, GraphPoint>{{0, 0.35}, {1, 0.6}},
                        {{2, 0.8}, {2, 0.15}}}) {
      CHECK(gradient_kernel(star, tt, x, y, 1e-13).value ==
            doctest::Approx(fd_gradient(star, tt, x, y)).epsilon(1e-6));
    }
  }
}

TEST_CASE("gradient kernel refuses vertex base points") {
  MetricGraph g = star_graph(3);
  CHECK_THROWS_WITH_AS(gradient_kernel(g, 0.1, {0, 0.0}, {1, 0.5}),
                       doctest::Contains("c"), std::invalid_argument);
  CHECK_THROWS_AS(gradient_kernel(g, 0.1, {0, 1.0}, {1, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("form kernel satisfies the signed vertex sum in y") {
  // At each vertex v the incidence-signed sum of one-sided traces vanishes.
  for (auto g : {star_graph(3), circle_graph(2.0), star_graph(5, 0.8)}) {
    KernelEngine engine(g, {1e-12});
    double t = 0.07;
    GraphPoint x{0, 0.37};
    for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
      double sum = 0;
      for (const Incidence& inc : g.incident(v)) {
        GraphPoint yv{inc.seg, g.endpoint_coord(inc.seg, inc.end)};
        sum += g.orientation_sign(v, inc.seg) * engine.form_heat(t, x, yv).value;
      }
      CHECK(sum == doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("heat kernel is continuous across vertices in y") {
  MetricGraph g = star_graph(3);
  KernelEngine engine(g, {1e-12});
  GraphPoint x{1, 0.42};
  VertexIndex c = g.find_vertex("c");
  std::vector<double> traces;
  for (const Incidence& inc : g.incident(c))
    traces.push_back(
        engine.heat(0.09, x, {inc.seg, g.endpoint_coord(inc.seg, inc.end)}).value);
  for (double tr : traces) CHECK(tr == doctest::Approx(traces[0]).epsilon(1e-11));
}

TEST_CASE("ratio sup on spiders") {
  // Two legs: the form kernel equals the scalar one in absolute value.
  {
    MetricGraph g = spider_graph(2);
    std::vector<GraphPoint> grid;
    for (int leg : {0, 1})
      for (double x : {0.05, 0.3, 0.9, 1.7}) grid.push_back({leg, x});
    RatioSupResult r = kernel_ratio_sup(g, 0.05, grid, {1e-13});
    CHECK(r.sup == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.skipped == 0);
  }
  // Three legs: ratio approaches 2 for points huddled at the center.
  {
    MetricGraph g = spider_graph(3);
    std::vector<GraphPoint> grid;
    for (int leg : {0, 1, 2})
      for (double x : {0.002, 0.005, 0.01, 0.3}) grid.push_back({leg, x});
    RatioSupResult r = kernel_ratio_sup(g, 0.05, grid, {1e-13});
    CHECK(r.sup > 2 - 1e-3);
    CHECK(r.sup < 2 + 1e-12);
  }
}

TEST_CASE("ratio sup reports unusable pairs") {
  MetricGraph g = spider_graph(3);
  std::vector<GraphPoint> grid{{0, 40.0}, {1, 40.0}};
  RatioSupResult r = kernel_ratio_sup(g, 0.01, grid, {1e-6});
  // Distances of order 80 leave nothing above the certified floor.
  CHECK(r.skipped > 0);
}

TEST_CASE("path budget failure carries the achieved bound") {
  MetricGraph g = star_graph(3);
  KernelEngine engine(g, {1e-12, 50});
  try {
    engine.heat(2.0, {0, 0.5}, {1, 0.5});
    FAIL("expected ToleranceError");
  } catch (const ToleranceError& e) {
    CHECK(e.achieved_bound > 1e-12);
  }
}
