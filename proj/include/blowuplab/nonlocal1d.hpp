#pragma once
// The 1D nonlocal model: stream function
//   psi(x)   = integral_0^inf (|x+y|^a - |x-y|^a) w(y) dy,
// its derivative, the "ring" variants with the far-field linear part removed,
//   psi_ring(x)  = psi(x)  - 2 a x J_inf,   (ring kernel subtracts 2 a x y^(a-1))
//   dpsi_ring(x) = psi'(x) - 2 a J_inf,
// and the fractional moment J(x) = integral_0^x y^(a-1) w(y) dy.
//
// Two evaluation paths share the same kernels:
//  * Density1D: an analytic odd density (callable + breakpoints + power tail),
//    integrated adaptively — used by oracles and high-accuracy checks.
//  * OddGridFunction1D: node samples on a graded grid, integrated with fixed
//    Gauss panels on 4-point Lagrange interpolation, cusp-graded subpanels and
//    singularity subtraction near y = x, plus a power-law tail model beyond
//    the last node. NodeEvaluator1D assembles this rule once into matrices
//    for batch evaluation at all nodes (the profile solver's inner loop).

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

#include "blowuplab/common.hpp"
#include "blowuplab/grid1d.hpp"
#include "blowuplab/model_params.hpp"

namespace blowuplab {

// ---------------------------------------------------------------------------
// Kernels (x, y >= 0).
// ---------------------------------------------------------------------------

inline double kern_psi(double a, double x, double y) {
  return abspow(x + y, a) - abspow(x - y, a);
}
inline double kern_dpsi(double a, double x, double y) {
  return a * (abspow(x + y, a - 1.0) - abspow(x - y, a - 1.0) * sgn(x - y));
}

// Ring kernels. For y >> x the direct differences cancel catastrophically
// (the result is O((x/y)^3) resp. O((x/y)^2) of the individual terms), so the
// far field uses the binomial series in t = x/y:
//   (1+t)^a - (1-t)^a - 2at      = 2 sum_{j>=1} C(a, 2j+1) t^(2j+1),
//   (1+t)^(a-1) + (1-t)^(a-1) - 2 = 2 sum_{j>=1} C(a-1, 2j) t^(2j).
namespace detail {
inline double odd_binom_series(double a, double t) {
  // sum over odd k >= 3 of C(a, k) t^k, C(a,k) = a(a-1)...(a-k+1)/k!
  double coef = a * (a - 1.0) * (a - 2.0) / 6.0;  // C(a, 3)
  double term = coef * t * t * t;
  double sum = term;
  for (int k = 3; k < 199; k += 2) {
    coef *= (a - k) * (a - k - 1.0) / ((k + 1.0) * (k + 2.0));
    term = coef * std::pow(t, k + 2.0);
    sum += term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}
inline double even_binom_series(double a1, double t) {
  // sum over even k >= 2 of C(a1, k) t^k
  double coef = a1 * (a1 - 1.0) / 2.0;  // C(a1, 2)
  double term = coef * t * t;
  double sum = term;
  for (int k = 2; k < 200; k += 2) {
    coef *= (a1 - k) * (a1 - k - 1.0) / ((k + 1.0) * (k + 2.0));
    term = coef * std::pow(t, k + 2.0);
    sum += term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}
}  // namespace detail

inline double kern_psi_ring(double a, double x, double y) {
  if (y > 0.0 && x < 0.6 * y) {
    return 2.0 * std::pow(y, a) * detail::odd_binom_series(a, x / y);
  }
  return kern_psi(a, x, y) - 2.0 * a * x * abspow(y, a - 1.0);
}
inline double kern_dpsi_ring(double a, double x, double y) {
  if (y > 0.0 && x < 0.6 * y) {
    return 2.0 * a * std::pow(y, a - 1.0) * detail::even_binom_series(a - 1.0, x / y);
  }
  return kern_dpsi(a, x, y) - 2.0 * a * abspow(y, a - 1.0);
}

// ---------------------------------------------------------------------------
// Tail model w(y) ~ A y^(-p) for y beyond the resolved range.
// ---------------------------------------------------------------------------

struct TailModel {
  double A = 0.0;
  double p = 0.0;
  double fit_residual = 0.0;  // max |log-log fit residual| over the window
};

// ---------------------------------------------------------------------------
// Analytic odd density.
// ---------------------------------------------------------------------------

struct Density1D {
  std::function<double(double)> f;    // density on (0, y_cut)
  std::vector<double> breakpoints;    // interior non-smooth points, increasing
  double y_cut = std::numeric_limits<double>::infinity();
  TailModel tail;                     // beyond y_cut (ignored when tail.A == 0)
};

double psi_1d(const Density1D& w, double alpha, double x, double rel_tol = 1e-10);
double dpsi_1d(const Density1D& w, double alpha, double x, double rel_tol = 1e-10);
double psi_ring(const Density1D& w, double alpha, double x, double rel_tol = 1e-10);
double dpsi_ring(const Density1D& w, double alpha, double x, double rel_tol = 1e-10);
// x may be +infinity (gives J_inf). Requires tail.p > alpha when the tail is
// active and the range touches it.
double j_alpha(const Density1D& w, double alpha, double x, double rel_tol = 1e-10);

// ---------------------------------------------------------------------------
// Grid samples of an odd function.
// ---------------------------------------------------------------------------

struct OddGridFunction1D {
  Grid1D grid;
  Eigen::VectorXd values;  // w(x_i), same length as grid.nodes
  TailModel tail;          // behaviour beyond grid.x_max()

  // Odd extension everywhere: linear w_1 x / x_1 on [0, x_1), 4-point Lagrange
  // inside the grid, tail model beyond x_max.
  double eval(double x) const;

  // Least-squares power fit over the last window_frac of the node range in
  // log x; requires the window values to be one-signed.
  void refit_tail(double window_frac = 0.1);

  void validate() const;  // shape/monotonicity checks, throws GridError
};

TailModel tail_fit(const Grid1D& grid, const Eigen::VectorXd& values,
                   double window_frac = 0.1);

// Least-squares amplitude fit with the exponent held at p (log-space mean of
// |w_i| x_i^p over the window). Used to project an iterate whose fitted decay
// is inadmissibly slow onto a prescribed decay class.
TailModel tail_fit_fixed_exponent(const Grid1D& grid, const Eigen::VectorXd& values,
                                  double p, double window_frac = 0.1);

// Adapter: expose the grid function through the analytic-density interface
// (interpolant as callable, nodes as breakpoints, same tail model).
Density1D density_from_grid_function(const OddGridFunction1D& w);

// Per-point evaluation against grid samples (composite Gauss rule; identical
// panels/stencils as NodeEvaluator1D, so the two paths agree at nodes).
double psi_1d(const OddGridFunction1D& w, double alpha, double x);
double dpsi_1d(const OddGridFunction1D& w, double alpha, double x);
double psi_ring(const OddGridFunction1D& w, double alpha, double x);
double dpsi_ring(const OddGridFunction1D& w, double alpha, double x);
double j_alpha(const OddGridFunction1D& w, double alpha, double x);

// ---------------------------------------------------------------------------
// Batch node evaluation: the composite rule assembled into dense matrices
// (linear in the node values) plus tail corrections recomputed per call.
// ---------------------------------------------------------------------------

class NodeEvaluator1D {
 public:
  NodeEvaluator1D(const Grid1D& grid, double alpha);

  struct NodeFields {
    Eigen::VectorXd psi, dpsi, psi_ring, dpsi_ring;
    double j_inf = 0.0;
  };

  NodeFields evaluate(const Eigen::VectorXd& values, const TailModel& tail) const;

  const Grid1D& grid() const { return grid_; }
  double alpha() const { return alpha_; }

 private:
  Grid1D grid_;
  double alpha_;
  Eigen::MatrixXd m_ring_, m_dring_;  // ring kernel and its derivative
  Eigen::VectorXd j_row_;             // J_inf over the resolved range
};

// ---------------------------------------------------------------------------
// Difference kernel H(a) = integral_0^inf [h(a,y) - h(1,y)] dy with
// h(c,y) = y^(2+a) (y^2 + c^2)^(-3/2); closed form (1 - |a|^alpha)/kappa_psi1.
// ---------------------------------------------------------------------------

double h_kernel_difference(double alpha, double a, double rel_tol = 1e-10);
double h_kernel_closed_form(const ModelParams& params, double a);

}  // namespace blowuplab
