#include "blowuplab/nonlocal1d.hpp"

#include <algorithm>
#include <cmath>

#include "blowuplab/interp.hpp"
#include "blowuplab/quadrature.hpp"

namespace blowuplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Graded subdivision fractions: geometrically shrinking subpanels whose
// smallest cell hugs the singular/cusp end (2^-12 of the panel), so the
// |x-y|^a cusp and the post-subtraction |x-y|^a remainders are resolved to
// ~1e-9 of the local scale.
std::vector<double> make_graded(bool toward_right) {
  std::vector<double> f;
  f.push_back(0.0);
  for (int k = 12; k >= 1; --k) f.push_back(std::pow(2.0, -k));
  f.push_back(1.0);
  if (toward_right) {
    for (double& v : f) v = 1.0 - v;
    std::reverse(f.begin(), f.end());
  }
  return f;
}
const std::vector<double>& frac_toward_left() {
  static const std::vector<double> f = make_graded(false);
  return f;
}
const std::vector<double>& frac_toward_right() {
  static const std::vector<double> f = make_graded(true);
  return f;
}

// Fixed 6-point Gauss rule on [0, 1], cached once.
const GLPanel& gl6_unit() {
  static const GLPanel p = gl_panel(6, 0.0, 1.0);
  return p;
}

template <class F>
void for_gl6(double lo, double hi, F&& cb) {
  const GLPanel& u = gl6_unit();
  const double len = hi - lo;
  for (std::size_t q = 0; q < u.x.size(); ++q) {
    cb(lo + len * u.x[q], len * u.w[q]);
  }
}

template <class F>
void for_gl6_graded(double lo, double hi, const std::vector<double>& fracs, F&& cb) {
  for (std::size_t s = 0; s + 1 < fracs.size(); ++s) {
    for_gl6(lo + (hi - lo) * fracs[s], lo + (hi - lo) * fracs[s + 1], cb);
  }
}

enum class Kind { PsiRing, DPsiRing };

double kern_of(Kind k, double a, double x, double y) {
  return k == Kind::PsiRing ? kern_psi_ring(a, x, y) : kern_dpsi_ring(a, x, y);
}

// Regular part of the derivative ring kernel (singular term removed):
//   K'_ring(x,y) + a |x-y|^(a-1) sgn(x-y).
double kern_dring_regular(double a, double x, double y) {
  return a * (abspow(x + y, a - 1.0) - 2.0 * abspow(y, a - 1.0));
}

// One row of the composite quadrature rule for the ring kernels: the value of
// the integral over [0, x_max] is wts . values + wx_coeff * w(x). The tail
// beyond x_max is handled separately (it depends on the tail model).
struct Row {
  Eigen::VectorXd wts;
  double wx_coeff = 0.0;
};

Row build_row(const Grid1D& g, double alpha, double x, Kind kind) {
  const std::vector<double>& xs = g.nodes;
  const std::size_t n = xs.size();
  Row row;
  row.wts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  // Accumulate kernel * Lagrange basis at quadrature point y of panel j.
  const auto add_point = [&](std::size_t panel, double kern_val, double y, double qw) {
    const std::size_t k0 = stencil4_start(panel, n);
    const std::array<double, 4> sx = {xs[k0], xs[k0 + 1], xs[k0 + 2], xs[k0 + 3]};
    const std::array<double, 4> b = lagrange4_weights(sx, y);
    for (int c = 0; c < 4; ++c) {
      row.wts[static_cast<Eigen::Index>(k0 + c)] += qw * kern_val * b[c];
    }
  };

  // Subtraction zone around the derivative kernel's |x-y|^(a-1) singularity:
  // the grid panels whose closure contains x (empty when x is below x_first,
  // where only the tiny lead panel sees the singularity).
  double zl = 0.0, zr = 0.0;
  bool has_zone = false;
  if (kind == Kind::DPsiRing && x >= xs.front()) {
    const std::size_t j = g.locate(x);
    zl = xs[j];
    zr = xs[j + 1];
    if (x == xs[j] && j > 0) zl = xs[j - 1];
    if (x == xs[j + 1] && j + 2 < n) zr = xs[j + 2];
    has_zone = true;
  }

  // Lead panel [0, x_1] with the linear odd model w(y) = w_1 y / x_1; graded
  // toward 0 where the ring kernels carry the y^(a-1) factor.
  for_gl6_graded(0.0, xs.front(), frac_toward_left(), [&](double y, double qw) {
    row.wts[0] += qw * kern_of(kind, alpha, x, y) * (y / xs.front());
  });

  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double lo = xs[j], hi = xs[j + 1];
    const bool in_zone = has_zone && lo >= zl - 0.0 && hi <= zr + 0.0 && lo < zr && hi > zl;

    if (kind == Kind::DPsiRing && in_zone) {
      // Regular part: plain Gauss panel.
      for_gl6(lo, hi, [&](double y, double qw) {
        add_point(j, kern_dring_regular(alpha, x, y), y, qw);
      });
      continue;  // singular part handled for the whole zone below
    }

    const bool touches_cusp = x > lo && x < hi;
    const bool cusp_left = x == lo;
    const bool cusp_right = x == hi;
    if (touches_cusp) {
      // |x-y|^a cusp inside the panel: split at x, grade toward it.
      for_gl6_graded(lo, x, frac_toward_right(), [&](double y, double qw) {
        add_point(j, kern_of(kind, alpha, x, y), y, qw);
      });
      for_gl6_graded(x, hi, frac_toward_left(), [&](double y, double qw) {
        add_point(j, kern_of(kind, alpha, x, y), y, qw);
      });
    } else if (cusp_left || cusp_right) {
      for_gl6_graded(lo, hi, cusp_left ? frac_toward_left() : frac_toward_right(),
                     [&](double y, double qw) {
                       add_point(j, kern_of(kind, alpha, x, y), y, qw);
                     });
    } else {
      for_gl6(lo, hi, [&](double y, double qw) {
        add_point(j, kern_of(kind, alpha, x, y), y, qw);
      });
    }
  }

  if (kind == Kind::DPsiRing && has_zone) {
    // Singular term over the zone Z = [zl, zr]:
    //   integral_Z -a |x-y|^(a-1) sgn(x-y) w(y) dy
    //     = integral_Z -a |x-y|^(a-1) sgn(x-y) (w(y) - w(x)) dy
    //       + w(x) [ (x-zl)^a - (zr-x)^a ].
    // The first integrand is Hoelder (~|x-y|^a) so graded panels converge;
    // splitting it as (quadrature on w) - (quadrature weight sum) * w(x)
    // keeps the rule linear in the node values.
    const auto sing = [&](double y) {
      return -alpha * abspow(x - y, alpha - 1.0) * sgn(x - y);
    };
    double qw_sum = 0.0;
    const auto add_sing = [&](double y, double qw) {
      const std::size_t panel = g.locate(std::min(std::max(y, xs.front()),
                                                  xs[n - 1]));
      add_point(panel, sing(y), y, qw);
      qw_sum += qw * sing(y);
    };
    if (x > zl) for_gl6_graded(zl, x, frac_toward_right(), add_sing);
    if (x < zr) for_gl6_graded(x, zr, frac_toward_left(), add_sing);
    // integral_Z K_sing dy = (zr-x)^a - (x-zl)^a, with K_sing as above.
    row.wx_coeff += -qw_sum + abspow(zr - x, alpha) - abspow(x - zl, alpha);
  }
  return row;
}

// Tail corrections: integral_{x_max}^inf K_ring(x, y) A y^(-p) dy via the
// substitution y = x_max / u on u in (0, 1], graded toward u = 0.
const std::vector<double>& tail_u_edges() {
  static const std::vector<double> e = {0.0,  2e-4, 2e-3, 0.02, 0.06,
                                        0.15, 0.3,  0.55, 1.0};
  return e;
}

double tail_correction(Kind kind, double alpha, double x, double x_max,
                       const TailModel& tail) {
  if (tail.A == 0.0) return 0.0;
  double acc = 0.0;
  const auto& e = tail_u_edges();
  for (std::size_t s = 0; s + 1 < e.size(); ++s) {
    for_gl6(e[s], e[s + 1], [&](double u, double qw) {
      const double y = x_max / u;
      const double jac = x_max / (u * u);
      acc += qw * kern_of(kind, alpha, x, y) * tail.A * std::pow(y, -tail.p) * jac;
    });
  }
  return acc;
}

double j_tail_closed(double alpha, double x_max, const TailModel& tail) {
  if (tail.A == 0.0) return 0.0;
  if (!(tail.p > alpha)) {
    throw DomainError("J tail diverges: tail exponent p = " + fmt_g17(tail.p) +
                      " must exceed alpha = " + fmt_g17(alpha));
  }
  return tail.A * std::pow(x_max, alpha - tail.p) / (tail.p - alpha);
}

// J over the resolved range [0, min(x, x_max)] as a row over node values.
Eigen::VectorXd build_j_row(const Grid1D& g, double alpha, double x_stop) {
  const std::vector<double>& xs = g.nodes;
  const std::size_t n = xs.size();
  Eigen::VectorXd wts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  // Lead panel, analytic: integral_0^min(x1,x) y^(a-1) (w1 y / x1) dy.
  const double x1 = xs.front();
  const double up0 = std::min(x1, x_stop);
  wts[0] += std::pow(up0, alpha + 1.0) / (x1 * (alpha + 1.0));
  for (std::size_t j = 0; j + 1 < n && xs[j] < x_stop; ++j) {
    const double lo = xs[j], hi = std::min(xs[j + 1], x_stop);
    if (!(hi > lo)) break;
    for_gl6(lo, hi, [&](double y, double qw) {
      const std::size_t k0 = stencil4_start(j, n);
      const std::array<double, 4> sx = {xs[k0], xs[k0 + 1], xs[k0 + 2], xs[k0 + 3]};
      const std::array<double, 4> b = lagrange4_weights(sx, y);
      const double kv = std::pow(y, alpha - 1.0);
      for (int c = 0; c < 4; ++c) {
        wts[static_cast<Eigen::Index>(k0 + c)] += qw * kv * b[c];
      }
    });
  }
  return wts;
}

void check_grid_arg(const OddGridFunction1D& w, double alpha, double x, bool allow_inf) {
  w.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("1D kernels require alpha in (0, 1), got " + fmt_g17(alpha));
  }
  if (std::isinf(x) && allow_inf) return;
  if (!(x >= 0.0) || !(x <= w.grid.x_max())) {
    throw DomainError("evaluation point x = " + fmt_g17(x) + " outside [0, x_max = " +
                      fmt_g17(w.grid.x_max()) + "]");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// OddGridFunction1D basics.
// ---------------------------------------------------------------------------

void OddGridFunction1D::validate() const {
  validate_nodes(grid.nodes);
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw GridError("OddGridFunction1D: " + std::to_string(values.size()) + " values for " +
                    std::to_string(grid.size()) + " nodes");
  }
}

double OddGridFunction1D::eval(double x) const {
  if (x < 0.0) return -eval(-x);
  const std::vector<double>& xs = grid.nodes;
  if (x < xs.front()) return values[0] * x / xs.front();
  if (x > xs.back()) {
    return tail.A == 0.0 ? 0.0 : tail.A * std::pow(x, -tail.p);
  }
  const std::size_t j = grid.locate(x);
  const std::size_t k0 = stencil4_start(j, xs.size());
  const std::array<double, 4> sx = {xs[k0], xs[k0 + 1], xs[k0 + 2], xs[k0 + 3]};
  const std::array<double, 4> b = lagrange4_weights(sx, x);
  double v = 0.0;
  for (int c = 0; c < 4; ++c) v += b[c] * values[static_cast<Eigen::Index>(k0 + c)];
  return v;
}

TailModel tail_fit(const Grid1D& grid, const Eigen::VectorXd& values, double window_frac) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw GridError("tail_fit: values/grid size mismatch");
  }
  if (!(window_frac > 0.0 && window_frac < 1.0)) {
    throw DomainError("tail_fit: window_frac must lie in (0, 1)");
  }
  const std::vector<double>& xs = grid.nodes;
  const double l0 = std::log(xs.front()), l1 = std::log(xs.back());
  const double cut = l1 - window_frac * (l1 - l0);
  std::vector<double> lx, lw;
  double sign = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double l = std::log(xs[i]);
    if (l < cut) continue;
    const double v = values[static_cast<Eigen::Index>(i)];
    if (v == 0.0 || (sign != 0.0 && sgn(v) != sign)) {
      throw DomainError("tail_fit: window values must be one-signed and nonzero");
    }
    sign = sgn(v);
    lx.push_back(l);
    lw.push_back(std::log(std::fabs(v)));
  }
  if (lx.size() < 4) throw DomainError("tail_fit: fewer than 4 nodes in the fit window");
  // Least squares line lw = c0 + c1 * lx.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += lw[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * lw[i];
  }
  const double c1 = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double c0 = (sy - c1 * sx) / m;
  TailModel t;
  t.p = -c1;
  t.A = sign * std::exp(c0);
  t.fit_residual = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    t.fit_residual = std::max(t.fit_residual, std::fabs(c0 + c1 * lx[i] - lw[i]));
  }
  return t;
}

TailModel tail_fit_fixed_exponent(const Grid1D& grid, const Eigen::VectorXd& values,
                                  double p, double window_frac) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    throw GridError("tail_fit_fixed_exponent: values/grid size mismatch");
  }
  if (!(window_frac > 0.0 && window_frac < 1.0)) {
    throw DomainError("tail_fit_fixed_exponent: window_frac must lie in (0, 1)");
  }
  const std::vector<double>& xs = grid.nodes;
  const double l0 = std::log(xs.front()), l1 = std::log(xs.back());
  const double cut = l1 - window_frac * (l1 - l0);
  double sum = 0.0, count = 0.0, sign = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double l = std::log(xs[i]);
    if (l < cut) continue;
    const double v = values[static_cast<Eigen::Index>(i)];
    if (v == 0.0 || (sign != 0.0 && sgn(v) != sign)) {
      throw DomainError("tail_fit_fixed_exponent: window values must be one-signed");
    }
    sign = sgn(v);
    sum += std::log(std::fabs(v)) + p * l;
    count += 1.0;
  }
  if (count < 4.0) {
    throw DomainError("tail_fit_fixed_exponent: fewer than 4 nodes in the fit window");
  }
  const double c0 = sum / count;
  TailModel t;
  t.p = p;
  t.A = sign * std::exp(c0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double l = std::log(xs[i]);
    if (l < cut) continue;
    const double v = values[static_cast<Eigen::Index>(i)];
    worst = std::max(worst, std::fabs(c0 - p * l - std::log(std::fabs(v))));
  }
  t.fit_residual = worst;
  return t;
}

void OddGridFunction1D::refit_tail(double window_frac) {
  tail = tail_fit(grid, values, window_frac);
}

Density1D density_from_grid_function(const OddGridFunction1D& w) {
  w.validate();
  Density1D d;
  d.f = [w](double y) { return w.eval(y); };
  d.breakpoints.assign(w.grid.nodes.begin(), w.grid.nodes.end() - 1);
  d.y_cut = w.grid.x_max();
  d.tail = w.tail;
  return d;
}

// ---------------------------------------------------------------------------
// Grid-path per-point operations.
// ---------------------------------------------------------------------------

namespace {
double eval_ring_kind(const OddGridFunction1D& w, double alpha, double x, Kind kind) {
  const Row row = build_row(w.grid, alpha, x, kind);
  double v = row.wts.dot(w.values);
  if (row.wx_coeff != 0.0) v += row.wx_coeff * w.eval(x);
  v += tail_correction(kind, alpha, x, w.grid.x_max(), w.tail);
  return v;
}
}  // namespace

double psi_ring(const OddGridFunction1D& w, double alpha, double x) {
  check_grid_arg(w, alpha, x, false);
  return eval_ring_kind(w, alpha, x, Kind::PsiRing);
}

double dpsi_ring(const OddGridFunction1D& w, double alpha, double x) {
  check_grid_arg(w, alpha, x, false);
  return eval_ring_kind(w, alpha, x, Kind::DPsiRing);
}

double j_alpha(const OddGridFunction1D& w, double alpha, double x) {
  check_grid_arg(w, alpha, x, true);
  const double stop = std::isinf(x) ? w.grid.x_max() : x;
  const Eigen::VectorXd jw = build_j_row(w.grid, alpha, stop);
  double v = jw.dot(w.values);
  if (std::isinf(x)) v += j_tail_closed(alpha, w.grid.x_max(), w.tail);
  return v;
}

// Plain variants via the exact identities psi = psi_ring + 2 a x J_inf and
// psi' = psi_ring' + 2 a J_inf (the plain kernel's tail integral only
// converges through the J_inf closed form, so this is also the stable path).
double psi_1d(const OddGridFunction1D& w, double alpha, double x) {
  check_grid_arg(w, alpha, x, false);
  return eval_ring_kind(w, alpha, x, Kind::PsiRing) +
         2.0 * alpha * x * j_alpha(w, alpha, kInf);
}

double dpsi_1d(const OddGridFunction1D& w, double alpha, double x) {
  check_grid_arg(w, alpha, x, false);
  return eval_ring_kind(w, alpha, x, Kind::DPsiRing) +
         2.0 * alpha * j_alpha(w, alpha, kInf);
}

// ---------------------------------------------------------------------------
// Density-path operations (adaptive; oracles and high-accuracy checks).
// ---------------------------------------------------------------------------

namespace {

void check_density_arg(const Density1D& w, double alpha, double x) {
  if (!w.f) throw DomainError("Density1D: empty callable");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("1D kernels require alpha in (0, 1), got " + fmt_g17(alpha));
  }
  if (!(x >= 0.0)) throw DomainError("evaluation point must satisfy x >= 0");
  if (w.tail.A != 0.0 && !(x < w.y_cut)) {
    throw DomainError("density evaluation requires x < y_cut when a tail is active");
  }
}

// Panel edges over [0, stop]: breakpoints, the kernel point x, and at most
// one decade per tanh-sinh panel (a single panel spanning several decades
// starves the rule of resolution in the middle).
std::vector<double> density_edges(const Density1D& w, double x, double stop) {
  std::vector<double> raw;
  raw.push_back(0.0);
  for (double b : w.breakpoints) {
    if (b > 0.0 && b < stop) raw.push_back(b);
  }
  if (x > 0.0 && x < stop) raw.push_back(x);
  raw.push_back(stop);
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

  std::vector<double> edges;
  for (std::size_t s = 0; s + 1 < raw.size(); ++s) {
    const double a = raw[s], b = raw[s + 1];
    edges.push_back(a);
    double base = a == 0.0 ? std::min(1.0, b) : a;
    if (a == 0.0 && base < b) edges.push_back(base);
    for (double e = base * 10.0; e < b && base > 0.0; e *= 10.0) edges.push_back(e);
  }
  edges.push_back(raw.back());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Integrate kern(y) * w(y) over the resolved range [0, y_cut) panel-wise.
template <class Kern>
double density_resolved(const Density1D& w, double x, const Kern& kern, double rel_tol) {
  const double stop = std::isfinite(w.y_cut) ? w.y_cut : std::max(8.0, 8.0 * x);
  const std::vector<double> edges = density_edges(w, x, stop);
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    acc += integrate_ts([&](double y) { return kern(y) * w.f(y); }, edges[s],
                        edges[s + 1], rel_tol);
  }
  if (!std::isfinite(w.y_cut)) {
    // The callable itself covers all of (0, inf): let exp-sinh finish it.
    acc += integrate_expsinh([&](double y) { return kern(y) * w.f(y); }, stop, rel_tol);
  }
  return acc;
}

}  // namespace

// Ring variants integrate their kernels directly: the ring kernels decay like
// y^(a-3) (psi) and y^(a-3) (dpsi) against a power tail, which exp-sinh
// handles, while the plain kernels decay only like y^(a-1-p) there — those go
// through the exact identities psi = psi_ring + 2 a x J_inf (J tail closed
// form) whenever a tail model is active.
double psi_ring(const Density1D& w, double alpha, double x, double rel_tol) {
  check_density_arg(w, alpha, x);
  double acc = density_resolved(
      w, x, [&](double y) { return kern_psi_ring(alpha, x, y); }, rel_tol);
  if (std::isfinite(w.y_cut) && w.tail.A != 0.0) {
    acc += integrate_expsinh(
        [&](double y) {
          return kern_psi_ring(alpha, x, y) * w.tail.A * std::pow(y, -w.tail.p);
        },
        w.y_cut, rel_tol);
  }
  return acc;
}

namespace {

// Resolved-range integral of the (plain or ring) derivative kernel against
// the density. The |x-y|^(a-1) singularity sits at a panel edge; panels that
// touch x are integrated in the distance variable u = |y - x| so the singular
// factor u^(a-1) never suffers the catastrophic rounding of x - y at
// double-exponentially clustered quadrature points.
double density_dpsi_resolved(const Density1D& w, double alpha, double x, bool ring,
                             double rel_tol) {
  const double stop = std::isfinite(w.y_cut) ? w.y_cut : std::max(8.0, 8.0 * x);
  const std::vector<double> edges = density_edges(w, x, stop);
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double lo = edges[s], hi = edges[s + 1];
    if (x > 0.0 && hi == x) {
      // Panel below x. Keep y = x - u away from 0: cap u at x/2 and hand the
      // remainder (if any) to the plain-y rule, which is then nonsingular.
      const double umax = std::min(x - lo, 0.5 * x);
      if (x - umax > lo) {
        acc += integrate_ts(
            [&](double y) {
              return (ring ? kern_dpsi_ring(alpha, x, y) : kern_dpsi(alpha, x, y)) *
                     w.f(y);
            },
            lo, x - umax, rel_tol);
      }
      acc += integrate_ts(
          [&](double u) {
            // u > 0 can still round x - u back to x; force the point strictly
            // below x so a density jump at x is sampled on the correct side.
            double y = x - u;
            if (y >= x) y = std::nextafter(x, 0.0);
            double k = alpha * (std::pow(2.0 * x - u, alpha - 1.0) -
                                std::pow(u, alpha - 1.0));
            if (ring) k -= 2.0 * alpha * std::pow(y, alpha - 1.0);
            return k * w.f(y);
          },
          0.0, umax, rel_tol);
    } else if (lo == x) {
      // Panel above x: y = x + u never cancels, but can round down onto x.
      acc += integrate_ts(
          [&](double u) {
            double y = x + u;
            if (y <= x && u > 0.0) {
              y = std::nextafter(x, std::numeric_limits<double>::infinity());
            }
            double k = alpha * (std::pow(2.0 * x + u, alpha - 1.0) +
                                std::pow(u, alpha - 1.0));
            if (ring) k -= 2.0 * alpha * std::pow(y, alpha - 1.0);
            return k * w.f(y);
          },
          0.0, hi - x, rel_tol);
    } else {
      acc += integrate_ts(
          [&](double y) {
            return (ring ? kern_dpsi_ring(alpha, x, y) : kern_dpsi(alpha, x, y)) *
                   w.f(y);
          },
          lo, hi, rel_tol);
    }
  }
  if (!std::isfinite(w.y_cut)) {
    acc += integrate_expsinh(
        [&](double y) {
          return (ring ? kern_dpsi_ring(alpha, x, y) : kern_dpsi(alpha, x, y)) * w.f(y);
        },
        stop, rel_tol);
  }
  return acc;
}

}  // namespace

double dpsi_ring(const Density1D& w, double alpha, double x, double rel_tol) {
  check_density_arg(w, alpha, x);
  double acc = density_dpsi_resolved(w, alpha, x, true, rel_tol);
  if (std::isfinite(w.y_cut) && w.tail.A != 0.0) {
    acc += integrate_expsinh(
        [&](double y) {
          return kern_dpsi_ring(alpha, x, y) * w.tail.A * std::pow(y, -w.tail.p);
        },
        w.y_cut, rel_tol);
  }
  return acc;
}

double j_alpha(const Density1D& w, double alpha, double x, double rel_tol) {
  if (!w.f) throw DomainError("Density1D: empty callable");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("1D kernels require alpha in (0, 1), got " + fmt_g17(alpha));
  }
  if (!(x >= 0.0)) throw DomainError("evaluation point must satisfy x >= 0");
  const double stop_req = std::min(x, w.y_cut);
  const double stop = std::isfinite(stop_req) ? stop_req : 8.0;
  const std::vector<double> edges = density_edges(w, 0.0, stop);
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    acc += integrate_ts([&](double y) { return std::pow(y, alpha - 1.0) * w.f(y); },
                        edges[s], edges[s + 1], rel_tol);
  }
  if (!std::isfinite(stop_req)) {
    acc += integrate_expsinh(
        [&](double y) { return std::pow(y, alpha - 1.0) * w.f(y); }, stop, rel_tol);
  }
  if (x > w.y_cut && w.tail.A != 0.0) {
    if (std::isinf(x)) {
      acc += j_tail_closed(alpha, w.y_cut, w.tail);
    } else {
      const double q = alpha - w.tail.p;
      acc += q == 0.0 ? w.tail.A * std::log(x / w.y_cut)
                      : w.tail.A * (std::pow(x, q) - std::pow(w.y_cut, q)) / q;
    }
  }
  return acc;
}

double psi_1d(const Density1D& w, double alpha, double x, double rel_tol) {
  check_density_arg(w, alpha, x);
  if (x == 0.0) return 0.0;
  if (std::isfinite(w.y_cut) && w.tail.A != 0.0) {
    return psi_ring(w, alpha, x, rel_tol) +
           2.0 * alpha * x * j_alpha(w, alpha, kInf, rel_tol);
  }
  return density_resolved(
      w, x, [&](double y) { return kern_psi(alpha, x, y); }, rel_tol);
}

double dpsi_1d(const Density1D& w, double alpha, double x, double rel_tol) {
  check_density_arg(w, alpha, x);
  if (std::isfinite(w.y_cut) && w.tail.A != 0.0) {
    return dpsi_ring(w, alpha, x, rel_tol) +
           2.0 * alpha * j_alpha(w, alpha, kInf, rel_tol);
  }
  return density_dpsi_resolved(w, alpha, x, false, rel_tol);
}

// ---------------------------------------------------------------------------
// NodeEvaluator1D.
// ---------------------------------------------------------------------------

NodeEvaluator1D::NodeEvaluator1D(const Grid1D& grid, double alpha)
    : grid_(grid), alpha_(alpha) {
  validate_nodes(grid_.nodes);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("NodeEvaluator1D requires alpha in (0, 1), got " + fmt_g17(alpha));
  }
  const std::size_t n = grid_.size();
  m_ring_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m_dring_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(0, n, [&](std::size_t i) {
    const double x = grid_.nodes[i];
    Row r = build_row(grid_, alpha_, x, Kind::PsiRing);
    r.wts[static_cast<Eigen::Index>(i)] += r.wx_coeff;
    m_ring_.row(static_cast<Eigen::Index>(i)) = r.wts.transpose();
    Row d = build_row(grid_, alpha_, x, Kind::DPsiRing);
    d.wts[static_cast<Eigen::Index>(i)] += d.wx_coeff;
    m_dring_.row(static_cast<Eigen::Index>(i)) = d.wts.transpose();
  });
  j_row_ = build_j_row(grid_, alpha_, grid_.x_max());
}

NodeEvaluator1D::NodeFields NodeEvaluator1D::evaluate(const Eigen::VectorXd& values,
                                                      const TailModel& tail) const {
  if (static_cast<std::size_t>(values.size()) != grid_.size()) {
    throw GridError("NodeEvaluator1D::evaluate: values/grid size mismatch");
  }
  const std::size_t n = grid_.size();
  NodeFields out;
  out.psi_ring = m_ring_ * values;
  out.dpsi_ring = m_dring_ * values;
  out.j_inf = j_row_.dot(values) + j_tail_closed(alpha_, grid_.x_max(), tail);
  if (tail.A != 0.0) {
    Eigen::VectorXd tr(static_cast<Eigen::Index>(n)), td(static_cast<Eigen::Index>(n));
    parallel_for(0, n, [&](std::size_t i) {
      const double x = grid_.nodes[i];
      tr[static_cast<Eigen::Index>(i)] =
          tail_correction(Kind::PsiRing, alpha_, x, grid_.x_max(), tail);
      td[static_cast<Eigen::Index>(i)] =
          tail_correction(Kind::DPsiRing, alpha_, x, grid_.x_max(), tail);
    });
    out.psi_ring += tr;
    out.dpsi_ring += td;
  }
  out.psi = out.psi_ring;
  out.dpsi = out.dpsi_ring;
  for (std::size_t i = 0; i < n; ++i) {
    out.psi[static_cast<Eigen::Index>(i)] += 2.0 * alpha_ * grid_.nodes[i] * out.j_inf;
    out.dpsi[static_cast<Eigen::Index>(i)] += 2.0 * alpha_ * out.j_inf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Difference kernel H.
// ---------------------------------------------------------------------------

double h_kernel_difference(double alpha, double a, double rel_tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("h_kernel_difference requires alpha in (0, 1)");
  }
  const double c2 = a * a;
  // Stable difference: h(a,y) - h(1,y)
  //   = y^(2+alpha) (y^2+1)^(-3/2) expm1(-1.5 log r),  r = (y^2+a^2)/(y^2+1),
  // with log r via log1p((a^2-1)/(y^2+1)) when r is near 1 (large y) and a
  // direct log of the positive ratio otherwise (small y, where the log1p
  // argument would cancel near -1).
  const auto diff = [&](double y) {
    const double y2 = y * y;
    const double z = (c2 - 1.0) / (y2 + 1.0);
    const double log_r =
        std::fabs(z) < 0.5 ? std::log1p(z) : std::log((y2 + c2) / (y2 + 1.0));
    // y^(2+alpha) overflows at exp-sinh's far abscissas; for y > 1 regroup as
    // y^(alpha-1) (1 + y^-2)^(-3/2), which decays instead.
    const double base = y > 1.0
                            ? std::pow(y, alpha - 1.0) * std::pow(1.0 + 1.0 / y2, -1.5)
                            : std::pow(y, 2.0 + alpha) * std::pow(y2 + 1.0, -1.5);
    return base * std::expm1(-1.5 * log_r);
  };
  const double split = 4.0 * std::max(1.0, std::fabs(a));
  const double head = integrate_ts(diff, 0.0, split, rel_tol);
  const double tail = integrate_expsinh(diff, split, rel_tol);
  return head + tail;
}

double h_kernel_closed_form(const ModelParams& params, double a) {
  return (1.0 - abspow(a, params.alpha)) / params.kappa_psi1;
}

}  // namespace blowuplab
