#pragma once
// Interpolation helpers: 4-point Lagrange stencils (used by the quadrature
// rules) and monotone clamped cubic Hermite interpolation (used by the
// semi-Lagrangian stepper, where overshoots would create spurious extrema).

#include <array>
#include <cstddef>
#include <vector>

#include "blowuplab/common.hpp"

namespace blowuplab {

// Weights of the cubic Lagrange interpolant through (xs[0..3], .) at point y.
std::array<double, 4> lagrange4_weights(const std::array<double, 4>& xs, double y);

// First stencil index for a 4-point stencil around panel j of an n-node grid:
// clamp(j-1, 0, n-4).
inline std::size_t stencil4_start(std::size_t panel, std::size_t n) {
  if (n < 4) throw GridError("stencil4_start: need at least 4 nodes");
  const std::size_t hi = n - 4;
  return panel == 0 ? 0 : std::min(panel - 1, hi);
}

// Fritsch-Carlson limited slopes: the cubic Hermite built on them preserves
// monotonicity of the data and never overshoots local extrema.
std::vector<double> monotone_slopes(const std::vector<double>& x,
                                    const std::vector<double>& y);

// Cubic Hermite evaluation on [x0, x1] with values y0, y1 and slopes m0, m1.
double hermite_eval(double x0, double x1, double y0, double y1, double m0, double m1,
                    double x);

// Convenience: full monotone-cubic interpolant over a sorted node set.
// Evaluation outside [x.front(), x.back()] clamps to the boundary value.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double xq) const;

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace blowuplab
