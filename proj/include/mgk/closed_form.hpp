// closed_form.hpp — reference kernels with known series or closed expressions:
// the star of N half-lines glued at one point (both kernels), and the interval
// and circle by the method of images.  These are independent of the path-sum
// machinery and double as oracles for it.

#pragma once

namespace mgk {
namespace closed_form {

// Heat kernel of the N-legged star of rays, x on leg j, y on leg k:
//   j != k:  (2/N) g_t(x + y)
//   j == k:  g_t(|x - y|) - (1 - 2/N) g_t(x + y)
double spider_heat(int n_legs, double t, int leg_x, double x, int leg_y, double y);

// Companion kernel for one-forms; the cross-leg term flips sign and the
// reflected term adds:
//   j != k:  -(2/N) g_t(x + y)
//   j == k:  g_t(|x - y|) + (1 - 2/N) g_t(x + y)
double spider_form_heat(int n_legs, double t, int leg_x, double x, int leg_y,
                        double y);

// Image series on [0, len]: all reflections positive (Neumann) or alternating
// (Dirichlet).
double interval_neumann(double len, double t, double x, double y);
double interval_dirichlet(double len, double t, double x, double y);

// Circle of circumference circ: sum of translates g_t(x - y + n circ).
double circle_periodic(double circ, double t, double x, double y);

}  // namespace closed_form
}  // namespace mgk
