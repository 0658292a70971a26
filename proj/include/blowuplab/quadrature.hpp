#pragma once
// Thin wrappers around boost::math::quadrature: fixed Gauss-Legendre panels
// (used to assemble quadrature matrices) and adaptive Gauss-Kronrod with an
// error contract (throws QuadratureError carrying the achieved estimate).

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "blowuplab/common.hpp"

namespace blowuplab {

// Nodes/weights of an n-point Gauss-Legendre rule mapped to [a, b].
// n must be one of the instantiated sizes below.
struct GLPanel {
  std::vector<double> x;
  std::vector<double> w;
};

namespace detail {
template <unsigned N>
GLPanel gl_on(double a, double b) {
  using rule = boost::math::quadrature::gauss<double, N>;
  // boost stores the non-negative half of the symmetric rule.
  const auto& xs = rule::abscissa();
  const auto& ws = rule::weights();
  GLPanel p;
  p.x.reserve(N);
  p.w.reserve(N);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = xs.size(); i-- > 0;) {
    if (xs[i] > 0.0) {
      p.x.push_back(mid - half * xs[i]);
      p.w.push_back(half * ws[i]);
    }
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (N % 2 == 1 && xs[i] == 0.0) {
      p.x.push_back(mid);
      p.w.push_back(half * ws[i]);
    } else if (xs[i] > 0.0) {
      p.x.push_back(mid + half * xs[i]);
      p.w.push_back(half * ws[i]);
    }
  }
  return p;
}
}  // namespace detail

inline GLPanel gl_panel(unsigned n, double a, double b) {
  switch (n) {
    case 4: return detail::gl_on<4>(a, b);
    case 6: return detail::gl_on<6>(a, b);
    case 8: return detail::gl_on<8>(a, b);
    case 12: return detail::gl_on<12>(a, b);
    case 16: return detail::gl_on<16>(a, b);
    case 32: return detail::gl_on<32>(a, b);
    default: throw DomainError("gl_panel: unsupported rule size " + std::to_string(n));
  }
}

template <class F>
double integrate_gl(const F& f, double a, double b, unsigned n = 8) {
  const GLPanel p = gl_panel(n, a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i) s += p.w[i] * f(p.x[i]);
  return s;
}

// Adaptive Gauss-Kronrod over [a, b]; a and/or b may be +/-infinity (boost
// maps infinite ranges internally). Throws QuadratureError when the internal
// error estimate exceeds rel_tol * max(|I|, abs_floor).
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-12,
                          unsigned max_depth = 15, double abs_floor = 1e-300) {
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  const double val = gk::integrate(f, a, b, max_depth, rel_tol, &err);
  if (!(err <= rel_tol * std::max(std::fabs(val), abs_floor)) && !(err < 1e-14)) {
    throw QuadratureError(
        "adaptive quadrature stalled: estimate " + fmt_g17(err) + " vs requested " +
            fmt_g17(rel_tol * std::max(std::fabs(val), abs_floor)),
        err);
  }
  return val;
}

// tanh-sinh over a finite interval. Robust for integrands with algebraic
// endpoint singularities (|x-a|^p kernels) where Gauss-Kronrod's error
// estimate stalls. Same error contract as integrate_adaptive.
template <class F>
double integrate_ts(const F& f, double a, double b, double rel_tol = 1e-12) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0, l1 = 0.0;
  const double val = integrator.integrate(f, a, b, rel_tol, &err, &l1);
  // boost reports err as an estimate of the relative error against the L1 norm.
  if (!(err <= 10.0 * rel_tol) && !(std::fabs(val) < 1e-300)) {
    throw QuadratureError("tanh-sinh quadrature stalled: relative estimate " + fmt_g17(err) +
                              " vs requested " + fmt_g17(rel_tol),
                          err);
  }
  return val;
}

// exp-sinh over [a, infinity). Handles algebraically decaying tails
// (|x|^p, p < -1) with double-exponential convergence.
template <class F>
double integrate_expsinh(const F& f, double a, double rel_tol = 1e-12) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0, l1 = 0.0;
  const double val = integrator.integrate(f, a, std::numeric_limits<double>::infinity(),
                                          rel_tol, &err, &l1);
  if (!(err <= 10.0 * rel_tol) && !(std::fabs(val) < 1e-300)) {
    throw QuadratureError("exp-sinh quadrature stalled: relative estimate " + fmt_g17(err) +
                              " vs requested " + fmt_g17(rel_tol),
                          err);
  }
  return val;
}

}  // namespace blowuplab
