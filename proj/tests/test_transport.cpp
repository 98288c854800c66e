#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>
#include "mgk/graph.hpp"
#include "mgk/inequalities.hpp"
#include "support.hpp"
#include "mgk/transport.hpp"

using namespace mgk;

namespace {

// Row and column sums of a plan must reproduce the marginals.
void check_feasible(const TransportPlan& plan, const std::vector<double>& supply,
                    const std::vector<double>& demand) {
  std::vector<double> row(supply.size(), 0), col(demand.size(), 0);
  for (const auto& f : plan.flows) {
    REQUIRE(f.mass > 0);
    row[f.from] += f.mass;
    col[f.to] += f.mass;
  }
  for (std::size_t i = 0; i < supply.size(); ++i)
    CHECK(row[i] == doctest::Approx(supply[i]).epsilon(1e-12));
  for (std::size_t j = 0; j < demand.size(); ++j)
    CHECK(col[j] == doctest::Approx(demand[j]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("two by two instance solved to its known optimum") {
  std::vector<double> supply{3, 4}, demand{2, 5};
  std::vector<std::vector<double>> cost{{1, 3}, {4, 2}};
  // Cost along the one degree of freedom is 21 - 4 x00, so the optimum pushes
  // x00 to its cap of 2.
  TransportPlan plan = solve_transport(supply, demand, cost);
  CHECK(plan.cost == doctest::Approx(13.0).epsilon(1e-14));
  check_feasible(plan, supply, demand);
}

TEST_CASE("single supplier pays the demand-weighted average cost") {
  std::vector<double> supply{1.0};
  std::vector<double> demand{0.25, 0.5, 0.25};
  std::vector<std::vector<double>> cost{{2.0, 3.0, 10.0}};
  TransportPlan plan = solve_transport(supply, demand, cost);
  CHECK(plan.cost == doctest::Approx(0.25 * 2 + 0.5 * 3 + 0.25 * 10));
  CHECK(plan.flows.size() == 3);
}

TEST_CASE("sorted points with convex cost take the monotone coupling") {
  // Supplies at 0, 1, 2 and demands at 0.5, 1.5, 2.5, quadratic cost: the
  // monotone matching i -> i is optimal with cost 3 * 0.25.
  std::vector<double> supply{1, 1, 1}, demand{1, 1, 1};
  std::vector<std::vector<double>> cost(3, std::vector<double>(3));
  double sx[3] = {0, 1, 2}, dx[3] = {0.5, 1.5, 2.5};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      cost[i][j] = (sx[i] - dx[j]) * (sx[i] - dx[j]);
  TransportPlan plan = solve_transport(supply, demand, cost);
  CHECK(plan.cost == doctest::Approx(0.75).epsilon(1e-14));
  check_feasible(plan, supply, demand);
}

TEST_CASE("flat costs and uniform masses terminate despite degeneracy") {
  int n = 24;
  std::vector<double> supply(n, 1.0 / n), demand(n, 1.0 / n);
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 1.0));
  TransportPlan plan = solve_transport(supply, demand, cost);
  CHECK(plan.cost == doctest::Approx(1.0).epsilon(1e-12));
  check_feasible(plan, supply, demand);
}

TEST_CASE("input validation rejects malformed instances") {
  std::vector<std::vector<double>> cost{{1, 2}, {3, 4}};
  CHECK_THROWS_AS(solve_transport({}, {1}, {}), std::invalid_argument);
  CHECK_THROWS_AS(solve_transport({1, 1}, {1, 1}, {{1, 2}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_transport({1, 1}, {1, 1}, {{1}, {2}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_transport({1, -1}, {0}, {{1}, {1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_transport({1, 1}, {1, 0.5}, cost),
                  std::invalid_argument);
  std::vector<std::vector<double>> bad{{1, 2}, {3, 1.0 / 0.0}};
  CHECK_THROWS_AS(solve_transport({1, 1}, {1, 1}, bad), std::invalid_argument);
}

TEST_CASE("point masses transport at exactly the geodesic distance") {
  MetricGraph g = mgt::star_graph(3);
  std::vector<MassAtom> a{{{0, 0.25}, 1.0}};
  std::vector<MassAtom> b{{{2, 0.6}, 1.0}};
  double d = g.geodesic_distance({0, 0.25}, {2, 0.6});
  CHECK(d == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(wasserstein2(g, a, b) == doctest::Approx(d).epsilon(1e-14));

  // Splitting the target over two legs at equal distance changes nothing.
  std::vector<MassAtom> c{{{1, 0.6}, 0.5}, {{2, 0.6}, 0.5}};
  CHECK(wasserstein2(g, a, c) == doctest::Approx(d).epsilon(1e-14));
}

TEST_CASE("spider configuration reaches the constant-displacement optimum") {
  // One interval (s, 2s) on a leg against the same interval on the two other
  // legs: pairing x with 3s - x keeps every trip at length 3s, and Jensen
  // shows no coupling beats it, so W_2^2 = 9 s^2 exactly, atoms included.
  MetricGraph g = mgt::spider_graph(3);
  double s = 0.35;
  IntervalSet a{{{0, s, 2 * s}}};
  IntervalSet b{{{1, s, 2 * s}, {2, s, 2 * s}}};

  double w = wasserstein2(g, discretize_interval_set(a, 64),
                          discretize_interval_set(b, 64));
  CHECK(w * w == doctest::Approx(9 * s * s).epsilon(1e-12));

  double w2 = wasserstein2(g, discretize_interval_set(a, 128),
                           discretize_interval_set(b, 128));
  CHECK(std::fabs(w - w2) <= 2 * (s / 64));
}

TEST_CASE("wasserstein2 validates its inputs") {
  MetricGraph g = mgt::star_graph(3);
  std::vector<MassAtom> a{{{0, 0.25}, 1.0}};
  std::vector<MassAtom> heavy{{{1, 0.5}, 2.0}};
  std::vector<MassAtom> none;
  CHECK_THROWS_AS(wasserstein2(g, a, heavy), std::invalid_argument);
  CHECK_THROWS_AS(wasserstein2(g, none, a), std::invalid_argument);
}
