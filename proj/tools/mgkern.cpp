// Command-line driver: load a graph, run one computation, emit CSV rows with
// 17-significant-digit floats.  Exit codes: 0 success, 1 computational error
// (with a machine-readable error= line), 2 usage or argument errors.

#include <CLI11.hpp>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "family.hpp"
#include "mgk/closed_form.hpp"
#include "mgk/graph.hpp"
#include "mgk/grid.hpp"
#include "mgk/inequalities.hpp"
#include "mgk/kernels.hpp"
#include "mgk/parallel.hpp"
#include "mgk/semigroup.hpp"
#include "mgk/spectral.hpp"

using namespace mgk;

namespace {

struct RunConfig {
  std::string command;
  std::string graph_path;
  std::string out_path;
  std::vector<double> ts;
  double eps = 1e-10;
  int threads = 0;
  unsigned long long seed = 1;

  std::string x_spec, y_spec;    // kernel
  double lambda_max = 50.0;      // spectrum
  std::string t_grid = "0.01:1:log16";  // be-constant
  int legs = 3;                  // spider-oracle
  int pairs = 20;
  double c1 = 2.0;               // buser
  int resolution = 64;           // buser, cheeger
  double curvature = 0.0;        // bm-check
  double scale = 1.0;
  std::vector<std::string> intervals;  // perimeter
};

class Out {
 public:
  explicit Out(const std::string& path) {
    if (!path.empty()) {
      f_ = std::fopen(path.c_str(), "w");
      if (!f_) throw std::runtime_error("cannot open output file " + path);
      owned_ = true;
    } else {
      f_ = stdout;
    }
  }
  ~Out() {
    if (owned_) std::fclose(f_);
  }
  void line(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    va_list ap;
    va_start(ap, fmt);
    std::vfprintf(f_, fmt, ap);
    va_end(ap);
    std::fputc('\n', f_);
  }

 private:
  FILE* f_ = nullptr;
  bool owned_ = false;
};

MetricGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read graph file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return MetricGraph::parse(ss.str());
}

GraphPoint parse_point(const MetricGraph& g, const std::string& spec) {
  auto pos = spec.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == spec.size())
    throw std::invalid_argument("point must look like <segment-id>:<coord>, got '" +
                                spec + "'");
  std::string id = spec.substr(0, pos);
  SegmentIndex s = g.find_segment(id);
  if (s < 0) throw std::invalid_argument("unknown segment id '" + id + "'");
  double x = std::stod(spec.substr(pos + 1));
  return {s, x};
}

std::string format_point(const MetricGraph& g, const GraphPoint& p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s:%.17g", g.segment(p.seg).id.c_str(), p.x);
  return buf;
}

// Grammar lo:hi:logN (geometric) or lo:hi:linN (arithmetic).
std::vector<double> parse_t_grid(const std::string& spec) {
  auto p1 = spec.find(':');
  auto p2 = spec.find(':', p1 == std::string::npos ? p1 : p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos)
    throw std::invalid_argument("t grid must look like lo:hi:log16 or lo:hi:lin16");
  double lo = std::stod(spec.substr(0, p1));
  double hi = std::stod(spec.substr(p1 + 1, p2 - p1 - 1));
  std::string tail = spec.substr(p2 + 1);
  bool log_spaced;
  if (tail.rfind("log", 0) == 0)
    log_spaced = true;
  else if (tail.rfind("lin", 0) == 0)
    log_spaced = false;
  else
    throw std::invalid_argument("t grid spacing must be logN or linN");
  int n = std::stoi(tail.substr(3));
  if (!(lo > 0 && hi >= lo && n >= 1))
    throw std::invalid_argument("t grid needs 0 < lo <= hi and at least one point");
  std::vector<double> ts;
  for (int i = 0; i < n; ++i) {
    double a = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    ts.push_back(log_spaced ? lo * std::pow(hi / lo, a) : lo + (hi - lo) * a);
  }
  return ts;
}

IntervalSet parse_intervals(const MetricGraph& g,
                            const std::vector<std::string>& specs) {
  IntervalSet e;
  for (const std::string& spec : specs) {
    auto p1 = spec.find(':');
    auto p2 = spec.find(':', p1 == std::string::npos ? p1 : p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos)
      throw std::invalid_argument("interval must look like <segment-id>:<a>:<b>");
    std::string id = spec.substr(0, p1);
    SegmentIndex s = g.find_segment(id);
    if (s < 0) throw std::invalid_argument("unknown segment id '" + id + "'");
    e.parts.push_back({s, std::stod(spec.substr(p1 + 1, p2 - p1 - 1)),
                       std::stod(spec.substr(p2 + 1))});
  }
  return e;
}

MetricGraph make_spider(int legs) {
  if (legs < 2) throw std::invalid_argument("a spider needs at least two legs");
  GraphSpec spec;
  spec.vertices.push_back({"c"});
  for (int j = 0; j < legs; ++j)
    spec.rays.push_back({"leg" + std::to_string(j), "c"});
  return MetricGraph::build(spec);
}

int run_kernel(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  GraphPoint x = parse_point(g, cfg.x_spec);
  GraphPoint y = parse_point(g, cfg.y_spec);
  if (cfg.ts.empty()) throw std::invalid_argument("kernel needs at least one --t");
  KernelOptions opt;
  opt.eps = cfg.eps;

  struct Row {
    KernelValue heat, form, grad;
  };
  std::vector<Row> rows(cfg.ts.size());
  parallel_for(cfg.ts.size(), cfg.threads,
               [&](int, std::size_t lo, std::size_t hi) {
                 KernelEngine eng(g, opt);
                 for (std::size_t i = lo; i < hi; ++i) {
                   rows[i].heat = eng.heat(cfg.ts[i], x, y);
                   rows[i].form = eng.form_heat(cfg.ts[i], x, y);
                   rows[i].grad = eng.gradient(cfg.ts[i], x, y);
                 }
               });

  out.line("t,x,y,heat,heat_tail,form,form_tail,gradient,gradient_tail");
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.line("%.17g,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", cfg.ts[i],
             format_point(g, x).c_str(), format_point(g, y).c_str(),
             rows[i].heat.value, rows[i].heat.tail_bound, rows[i].form.value,
             rows[i].form.tail_bound, rows[i].grad.value,
             rows[i].grad.tail_bound);
  return 0;
}

int run_spectrum(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  EigenBasis basis = eigensolve(g, cfg.lambda_max);
  out.line("index,lambda,multiplicity,lambda_max");
  int index = 0;
  std::size_t i = 0;
  while (i < basis.pairs.size()) {
    double lam = basis.pairs[i].lambda;
    std::size_t j = i;
    while (j < basis.pairs.size() &&
           basis.pairs[j].lambda - lam <= 1e-9 * (1 + lam))
      ++j;
    out.line("%d,%.17g,%zu,%.17g", index++, lam, j - i, basis.lambda_max);
    i = j;
  }
  return 0;
}

int run_be_constant(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  std::vector<double> ts = parse_t_grid(cfg.t_grid);
  SemigroupOptions opt;
  opt.kernel.eps = cfg.eps;

  double tmax = ts.back();
  for (double t : ts) tmax = std::max(tmax, t);
  fam::Family family = fam::build(g, tmax, cfg.eps);

  SemigroupEngine eng(g, opt);
  BEReport rep = eng.be_constant(ts, family.members, family.points);

  out.line("t,ratio_sup,skipped,eps");
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    out.line("%.17g,%.17g,%zu,%.17g", rep.times[i], rep.ratios[i],
             rep.skipped[i], cfg.eps);
  out.line("kernel_ratio=%.17g", rep.kernel_ratio);
  out.line("certified=%s", rep.certified ? "yes" : "no");
  out.line("C1=%.17g", rep.c1);
  return 0;
}

int run_ratio_sup(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  std::vector<double> ts = cfg.ts.empty() ? std::vector<double>{0.05} : cfg.ts;
  KernelOptions opt;
  opt.eps = cfg.eps;

  std::vector<GraphPoint> grid;
  for (SegmentIndex s = 0; s < static_cast<SegmentIndex>(g.segment_count());
       ++s) {
    double reach = std::min(g.segment(s).length, 2.0);
    grid.push_back({s, 0.002});
    grid.push_back({s, 0.004});
    for (int i = 1; i <= 8; ++i) grid.push_back({s, reach * i / 9.0});
  }

  out.line("t,sup,arg_x,arg_y,pairs,skipped,eps");
  for (double t : ts) {
    RatioSupResult r = kernel_ratio_sup(g, t, grid, opt);
    out.line("%.17g,%.17g,%s,%s,%zu,%zu,%.17g", t, r.sup,
             format_point(g, r.arg_x).c_str(), format_point(g, r.arg_y).c_str(),
             r.pairs, r.skipped, cfg.eps);
  }
  return 0;
}

int run_spider_oracle(const RunConfig& cfg, Out& out) {
  MetricGraph g = make_spider(cfg.legs);
  std::vector<double> ts = cfg.ts.empty() ? std::vector<double>{0.05} : cfg.ts;
  KernelOptions opt;
  opt.eps = cfg.eps;

  struct Row {
    double t;
    int lx, ly;
    double x, y;
    double hp = 0, hc = 0, fp = 0, fc = 0;
  };
  std::vector<Row> rows;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> leg(0, cfg.legs - 1);
  std::uniform_real_distribution<double> coord(0.01, 2.0);
  for (double t : ts)
    for (int i = 0; i < cfg.pairs; ++i) {
      Row r;
      r.t = t;
      r.lx = leg(rng);
      r.x = coord(rng);
      r.ly = leg(rng);
      r.y = coord(rng);
      rows.push_back(r);
    }

  parallel_for(rows.size(), cfg.threads,
               [&](int, std::size_t lo, std::size_t hi) {
                 KernelEngine eng(g, opt);
                 for (std::size_t i = lo; i < hi; ++i) {
                   Row& r = rows[i];
                   GraphPoint x{r.lx, r.x}, y{r.ly, r.y};
                   r.hp = eng.heat(r.t, x, y).value;
                   r.fp = eng.form_heat(r.t, x, y).value;
                   r.hc = closed_form::spider_heat(cfg.legs, r.t, r.lx, r.x,
                                                   r.ly, r.y);
                   r.fc = closed_form::spider_form_heat(cfg.legs, r.t, r.lx,
                                                        r.x, r.ly, r.y);
                 }
               });

  out.line(
      "t,leg_x,x,leg_y,y,heat_path,heat_closed,heat_diff,form_path,"
      "form_closed,form_diff,eps");
  double max_diff = 0;
  for (const Row& r : rows) {
    double hd = std::fabs(r.hp - r.hc), fd = std::fabs(r.fp - r.fc);
    max_diff = std::max({max_diff, hd, fd});
    out.line("%.17g,%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
             r.t, r.lx, r.x, r.ly, r.y, r.hp, r.hc, hd, r.fp, r.fc, fd,
             cfg.eps);
  }
  out.line("max_diff=%.17g", max_diff);
  return 0;
}

int run_buser(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  BuserResult r = buser_check(g, cfg.c1, cfg.resolution);
  out.line("lambda1,h,lower,upper,lower_ok,upper_ok,c1,resolution");
  out.line("%.17g,%.17g,%.17g,%.17g,%s,%s,%.17g,%d", r.lambda1, r.h, r.lower,
           r.upper, r.lower_ok ? "yes" : "no", r.upper_ok ? "yes" : "no",
           cfg.c1, cfg.resolution);
  return 0;
}

int run_cheeger(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  CheegerResult r = cheeger_constant(g, cfg.resolution);
  if (r.best.parts.empty())
    throw std::runtime_error("no admissible candidate set found");
  out.line("h,seg,a,b,resolution");
  for (const auto& part : r.best.parts)
    out.line("%.17g,%s,%.17g,%.17g,%d", r.h, g.segment(part.seg).id.c_str(),
             part.a, part.b, cfg.resolution);
  return 0;
}

int run_bm_check(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  BMReport rep = brunn_minkowski_violation(g, cfg.curvature, cfg.scale);
  out.line("t,lhs,rhs,margin,scale,w2");
  for (const auto& row : rep.rows)
    out.line("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", row.t, row.lhs, row.rhs,
             row.margin, rep.scale, rep.w2);
  out.line("violated=%s, best_t=%.17g, best_margin=%.17g, scale=%.17g",
           rep.violated ? "yes" : "no", rep.best_t, rep.best_margin, rep.scale);
  return 0;
}

int run_perimeter(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  IntervalSet e = parse_intervals(g, cfg.intervals);
  KernelOptions opt;
  opt.eps = cfg.eps;
  PerimeterResult r = perimeter(g, e, opt);
  out.line("combinatorial,combinatorial_valid,heat_estimate,heat_raw_coarse,"
           "heat_raw_mid,heat_raw_fine,eps");
  out.line("%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g", r.combinatorial,
           r.combinatorial_valid ? "yes" : "no", r.heat_estimate, r.heat_at[0],
           r.heat_at[1], r.heat_at[2], cfg.eps);
  return 0;
}

int run_duality(const RunConfig& cfg, Out& out) {
  MetricGraph g = load_graph(cfg.graph_path);
  bool oriented = poincare_orientation(g).has_value();
  HarmonicFormBasis basis = harmonic_forms(g);
  out.line("orientation=%s, harmonic_dim=%d", oriented ? "yes" : "no",
           basis.dimension());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"heat kernels, semigroups, and functional inequalities on metric graphs"};
  app.require_subcommand(1);
  // Config parsing happens on the root app only; fallthrough lets a --config
  // placed after the subcommand name reach it.  Keys live in a [subcommand]
  // section of the file.
  app.set_config("--config", "", "read options from a key=value file");

  auto add_common = [&](CLI::App* sub, bool needs_graph) {
    sub->fallthrough();
    if (needs_graph)
      sub->add_option("--graph", cfg.graph_path, "graph description file")
          ->required()
          ->check(CLI::ExistingFile);
    sub->add_option("--eps", cfg.eps, "certified kernel tolerance");
    sub->add_option("--threads", cfg.threads,
                    "worker threads (0 = available parallelism)");
    sub->add_option("--seed", cfg.seed, "seed for randomized sampling");
    sub->add_option("--out", cfg.out_path, "output file (default stdout)");
  };

  CLI::App* kernel = app.add_subcommand(
      "kernel", "heat, form, and gradient kernels at point pairs");
  add_common(kernel, true);
  kernel->add_option("--t", cfg.ts, "evaluation times")->required();
  kernel->add_option("--x", cfg.x_spec, "first point, <segment>:<coord>")
      ->required();
  kernel->add_option("--y", cfg.y_spec, "second point, <segment>:<coord>")
      ->required();

  CLI::App* spectrum =
      app.add_subcommand("spectrum", "eigenvalue table up to lambda-max");
  add_common(spectrum, true);
  spectrum->add_option("--lambda-max", cfg.lambda_max,
                       "completeness threshold");

  CLI::App* bec = app.add_subcommand(
      "be-constant", "gradient-to-semigroup ratio sweep and its supremum");
  add_common(bec, true);
  bec->add_option("--t-grid", cfg.t_grid, "time grid, lo:hi:logN or lo:hi:linN");

  CLI::App* rsup = app.add_subcommand(
      "ratio-sup", "sup of |form kernel| / heat kernel over a point grid");
  add_common(rsup, true);
  rsup->add_option("--t", cfg.ts, "evaluation times");

  CLI::App* oracle = app.add_subcommand(
      "spider-oracle", "path-sum kernels against the closed spider formulas");
  add_common(oracle, false);
  oracle->add_option("--legs", cfg.legs, "number of legs")
      ->check(CLI::Range(2, 64));
  oracle->add_option("--t", cfg.ts, "evaluation times");
  oracle->add_option("--pairs", cfg.pairs, "random point pairs per time")
      ->check(CLI::PositiveNumber);

  CLI::App* buser = app.add_subcommand(
      "buser", "spectral gap against the Cheeger-constant sandwich");
  add_common(buser, true);
  buser->add_option("--c1", cfg.c1, "Bakry-Emery constant of the graph");
  buser->add_option("--resolution", cfg.resolution, "Cheeger grid resolution");

  CLI::App* cheeger =
      app.add_subcommand("cheeger", "grid search for the Cheeger constant");
  add_common(cheeger, true);
  cheeger->add_option("--resolution", cfg.resolution, "grid points per edge");

  CLI::App* bm = app.add_subcommand(
      "bm-check", "geodesic Brunn-Minkowski violation on a spider");
  add_common(bm, true);
  bm->add_option("--K", cfg.curvature, "curvature parameter");
  bm->add_option("--scale", cfg.scale, "interval scale for the test sets");

  CLI::App* peri = app.add_subcommand(
      "perimeter", "combinatorial and heat-flow perimeter of an interval set");
  add_common(peri, true);
  peri->add_option("--interval", cfg.intervals,
                   "interval <segment>:<a>:<b>, repeatable")
      ->required();

  CLI::App* duality = app.add_subcommand(
      "duality", "orientation existence and harmonic form dimension");
  add_common(duality, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    Out out(cfg.out_path);
    if (cfg.command == "kernel") return run_kernel(cfg, out);
    if (cfg.command == "spectrum") return run_spectrum(cfg, out);
    if (cfg.command == "be-constant") return run_be_constant(cfg, out);
    if (cfg.command == "ratio-sup") return run_ratio_sup(cfg, out);
    if (cfg.command == "spider-oracle") return run_spider_oracle(cfg, out);
    if (cfg.command == "buser") return run_buser(cfg, out);
    if (cfg.command == "cheeger") return run_cheeger(cfg, out);
    if (cfg.command == "bm-check") return run_bm_check(cfg, out);
    if (cfg.command == "perimeter") return run_perimeter(cfg, out);
    if (cfg.command == "duality") return run_duality(cfg, out);
    std::fprintf(stderr, "unknown command %s\n", cfg.command.c_str());
    return 2;
  } catch (const std::exception& e) {
    std::printf("error=%s\n", e.what());
    return 1;
  }
}
