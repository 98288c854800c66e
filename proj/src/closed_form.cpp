#include "mgk/closed_form.hpp"

#include <cmath>
#include <stdexcept>

#include "mgk/kernels.hpp"

namespace mgk {
namespace closed_form {

namespace {

void check_args(double t, double a, double b) {
  if (!(t > 0)) throw std::invalid_argument("closed form: t must be positive");
  if (a < 0 || b < 0)
    throw std::invalid_argument("closed form: coordinates must be nonnegative");
}

// Number of image shells needed so the dropped terms are below 1e-18 of the
// on-diagonal scale: solve g_t(u) tiny, u in steps of the period.
int shell_count(double period, double t) {
  double u = std::sqrt(4 * t * 18.5 * 2.30258509299404568402) + 2 * period;
  return static_cast<int>(std::ceil(u / period)) + 2;
}

}  // namespace

double spider_heat(int n_legs, double t, int leg_x, double x, int leg_y,
                   double y) {
  check_args(t, x, y);
  if (n_legs < 2) throw std::invalid_argument("spider needs at least 2 legs");
  if (leg_x < 0 || leg_x >= n_legs || leg_y < 0 || leg_y >= n_legs)
    throw std::invalid_argument("spider leg index out of range");
  double cross = 2.0 / n_legs * gaussian(t, x + y);
  if (leg_x != leg_y) return cross;
  return gaussian(t, std::abs(x - y)) - (1.0 - 2.0 / n_legs) * gaussian(t, x + y);
}

double spider_form_heat(int n_legs, double t, int leg_x, double x, int leg_y,
                        double y) {
  check_args(t, x, y);
  if (n_legs < 2) throw std::invalid_argument("spider needs at least 2 legs");
  if (leg_x < 0 || leg_x >= n_legs || leg_y < 0 || leg_y >= n_legs)
    throw std::invalid_argument("spider leg index out of range");
  if (leg_x != leg_y) return -2.0 / n_legs * gaussian(t, x + y);
  return gaussian(t, std::abs(x - y)) + (1.0 - 2.0 / n_legs) * gaussian(t, x + y);
}

double interval_neumann(double len, double t, double x, double y) {
  check_args(t, x, y);
  if (!(len > 0) || x > len || y > len)
    throw std::invalid_argument("interval image series: bad geometry");
  double s = 0;
  int N = shell_count(2 * len, t);
  for (int n = -N; n <= N; ++n)
    s += gaussian(t, x - y + 2 * len * n) + gaussian(t, x + y + 2 * len * n);
  return s;
}

double interval_dirichlet(double len, double t, double x, double y) {
  check_args(t, x, y);
  if (!(len > 0) || x > len || y > len)
    throw std::invalid_argument("interval image series: bad geometry");
  double s = 0;
  int N = shell_count(2 * len, t);
  for (int n = -N; n <= N; ++n)
    s += gaussian(t, x - y + 2 * len * n) - gaussian(t, x + y + 2 * len * n);
  return s;
}

double circle_periodic(double circ, double t, double x, double y) {
  check_args(t, x, y);
  if (!(circ > 0)) throw std::invalid_argument("circle circumference must be positive");
  double s = 0;
  int N = shell_count(circ, t);
  for (int n = -N; n <= N; ++n) s += gaussian(t, x - y + circ * n);
  return s;
}

}  // namespace closed_form
}  // namespace mgk
