#include "blowuplab/interp.hpp"

#include <algorithm>
#include <cmath>

namespace blowuplab {

std::array<double, 4> lagrange4_weights(const std::array<double, 4>& xs, double y) {
  std::array<double, 4> w{1.0, 1.0, 1.0, 1.0};
  for (int c = 0; c < 4; ++c) {
    for (int d = 0; d < 4; ++d) {
      if (d != c) w[c] *= (y - xs[d]) / (xs[c] - xs[d]);
    }
  }
  return w;
}

std::vector<double> monotone_slopes(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw GridError("monotone_slopes: need matching n >= 2");
  std::vector<double> d(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = x[i + 1] - x[i];
    if (!(h > 0.0)) throw GridError("monotone_slopes: nodes must increase");
    d[i] = (y[i + 1] - y[i]) / h;
  }
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m[i] = 0.0;  // local extremum: flat slope prevents overshoot
    } else {
      // Weighted harmonic mean of the one-sided secants (Fritsch-Carlson).
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
      m[i] = (w0 + w1) / (w0 / d[i - 1] + w1 / d[i]);
    }
  }
  // Clamp the end slopes to keep the boundary cells monotone as well.
  const auto clamp_end = [](double& me, double dd) {
    if (me * dd <= 0.0) {
      me = 0.0;
    } else if (std::fabs(me) > 3.0 * std::fabs(dd)) {
      me = 3.0 * dd;
    }
  };
  clamp_end(m[0], d[0]);
  clamp_end(m[n - 1], d[n - 2]);
  return m;
}

double hermite_eval(double x0, double x1, double y0, double y1, double m0, double m1,
                    double x) {
  const double h = x1 - x0;
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (1.0 - 3.0 * t2 + 2.0 * t3) * y0 + (t - 2.0 * t2 + t3) * h * m0 +
         (3.0 * t2 - 2.0 * t3) * y1 + (t3 - t2) * h * m1;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  m_ = monotone_slopes(x_, y_);
}

double MonotoneCubic::operator()(double xq) const {
  if (xq <= x_.front()) return y_.front();
  if (xq >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
  const std::size_t j = static_cast<std::size_t>(it - x_.begin()) - 1;
  return hermite_eval(x_[j], x_[j + 1], y_[j], y_[j + 1], m_[j], m_[j + 1], xq);
}

}  // namespace blowuplab
