#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgk/graph.hpp"
#include "mgk/kernels.hpp"

#ifndef MGKERN_BIN
#error "MGKERN_BIN must point at the CLI binary"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string("\"") + MGKERN_BIN + "\" " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_graph(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream f(path);
  f << text;
  return path.string();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

const std::string kInterval = "vertex a\nvertex b\nedge e a b 1.0\n";
const std::string kSpider3 = "vertex c\nray leg0 c\nray leg1 c\nray leg2 c\n";
const std::string kTwoCircles = "vertex c\nedge l1 c c 1.0\nedge l2 c c 1.0\n";

}  // namespace

TEST_CASE("usage errors exit with code 2, help with 0") {
  CHECK(run("bogus").exit_code == 2);
  CHECK(run("").exit_code == 2);
  CHECK(run("--help").exit_code == 0);
  CHECK(run("kernel --help").exit_code == 0);
  CHECK(run("kernel --x e:0.3 --y e:0.6 --t 0.1").exit_code == 2);  // no graph
  std::string g = write_graph("cli_interval.g", kInterval);
  CHECK(run("kernel --graph " + g + " --x e:0.3 --y e:0.6").exit_code == 2);
}

TEST_CASE("kernel rows reproduce the library values") {
  std::string g = write_graph("cli_interval.g", kInterval);
  RunResult r = run("kernel --graph " + g + " --t 0.1 --t 0.5 --x e:0.3 --y e:0.6");
  REQUIRE(r.exit_code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == "t,x,y,heat,heat_tail,form,form_tail,gradient,gradient_tail");

  mgk::MetricGraph graph = mgk::MetricGraph::parse(kInterval);
  mgk::GraphPoint x{0, 0.3}, y{0, 0.6};
  double ts[2] = {0.1, 0.5};
  for (int i = 0; i < 2; ++i) {
    auto f = fields(ls[1 + i]);
    REQUIRE(f.size() == 9);
    CHECK(std::stod(f[0]) == doctest::Approx(ts[i]).epsilon(1e-15));
    CHECK(f[1] == "e:0.29999999999999999");
    double heat = mgk::heat_kernel(graph, ts[i], x, y).value;
    double form = mgk::form_heat_kernel(graph, ts[i], x, y).value;
    double grad = mgk::gradient_kernel(graph, ts[i], x, y).value;
    CHECK(std::stod(f[3]) == doctest::Approx(heat).epsilon(1e-15));
    CHECK(std::stod(f[5]) == doctest::Approx(form).epsilon(1e-15));
    CHECK(std::stod(f[7]) == doctest::Approx(grad).epsilon(1e-15));
    CHECK(std::stod(f[4]) < 1e-9);  // certified tails came along
  }
}

TEST_CASE("spider oracle reports a tiny max_diff") {
  RunResult r = run("spider-oracle --legs 3 --t 0.05 --t 0.2 --pairs 6 --seed 9");
  REQUIRE(r.exit_code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 2 + 12);  // header + rows + max_diff
  REQUIRE(ls.back().rfind("max_diff=", 0) == 0);
  CHECK(std::stod(ls.back().substr(9)) < 1e-10);
}

TEST_CASE("duality prints orientation and harmonic dimension") {
  std::string g = write_graph("cli_two_circles.g", kTwoCircles);
  RunResult r = run("duality --graph " + g);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "orientation=yes, harmonic_dim=2\n");

  std::string gi = write_graph("cli_interval.g", kInterval);
  RunResult ri = run("duality --graph " + gi);
  REQUIRE(ri.exit_code == 0);
  CHECK(ri.out == "orientation=no, harmonic_dim=0\n");
}

TEST_CASE("identical seed and flags give byte-identical output") {
  std::string a = run("spider-oracle --legs 4 --t 0.1 --pairs 8 --seed 12345").out;
  std::string b = run("spider-oracle --legs 4 --t 0.1 --pairs 8 --seed 12345").out;
  std::string c = run("spider-oracle --legs 4 --t 0.1 --pairs 8 --seed 54321").out;
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("config file fills flags and explicit flags win") {
  auto ini = std::filesystem::temp_directory_path() / "cli_oracle.ini";
  {
    std::ofstream f(ini);
    f << "[spider-oracle]\nlegs=5\npairs=4\nt=0.1\nseed=42\n";
  }
  std::string via_cfg = run("spider-oracle --config " + ini.string()).out;
  std::string via_flags = run("spider-oracle --legs 5 --pairs 4 --t 0.1 --seed 42").out;
  CHECK(via_cfg == via_flags);

  RunResult fewer = run("spider-oracle --config " + ini.string() + " --pairs 2");
  CHECK(lines(fewer.out).size() == 2 + 2);
}

TEST_CASE("computational failures exit 1 with an error line") {
  std::string g = write_graph("cli_interval.g", kInterval);
  RunResult r1 = run("kernel --graph " + g + " --t 0.1 --x zz:0.3 --y e:0.6");
  CHECK(r1.exit_code == 1);
  CHECK(r1.out.rfind("error=", 0) == 0);

  std::string gs = write_graph("cli_spider3.g", kSpider3);
  RunResult r2 = run("spectrum --graph " + gs);
  CHECK(r2.exit_code == 1);
  CHECK(r2.out.rfind("error=", 0) == 0);
}

TEST_CASE("cheeger and buser report the interval answers") {
  std::string g = write_graph("cli_interval.g", kInterval);
  RunResult rc = run("cheeger --graph " + g);
  REQUIRE(rc.exit_code == 0);
  auto cf = fields(lines(rc.out)[1]);
  CHECK(std::stod(cf[0]) == doctest::Approx(2.0).epsilon(1e-12));

  RunResult rb = run("buser --graph " + g + " --c1 1");
  REQUIRE(rb.exit_code == 0);
  auto bf = fields(lines(rb.out)[1]);
  CHECK(std::stod(bf[0]) == doctest::Approx(9.8696044010893586).epsilon(1e-8));
  CHECK(fields(lines(rb.out)[0])[4] == "lower_ok");
  CHECK(bf[4] == "yes");
  CHECK(bf[5] == "yes");
}

TEST_CASE("be-constant on the three-legged spider lands at two") {
  std::string g = write_graph("cli_spider3.g", kSpider3);
  RunResult r = run("be-constant --graph " + g + " --t-grid 0.01:1:log8");
  REQUIRE(r.exit_code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.back().rfind("C1=", 0) == 0);
  double c1 = std::stod(ls.back().substr(3));
  CHECK(c1 == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(ls[ls.size() - 2] == "certified=yes");
}

TEST_CASE("output lands in the file named by --out") {
  auto out = std::filesystem::temp_directory_path() / "cli_out.csv";
  std::filesystem::remove(out);
  RunResult r = run("spider-oracle --legs 3 --t 0.05 --pairs 2 --out " + out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.empty());
  std::ifstream f(out);
  REQUIRE(f.good());
  std::string first;
  std::getline(f, first);
  CHECK(first.rfind("t,leg_x", 0) == 0);
}
