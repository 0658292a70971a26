#include "blowuplab/profile1d.hpp"

#include <cmath>

#include "blowuplab/weights.hpp"

namespace blowuplab {

OddGridFunction1D initial_guess(const Grid1D& grid, const ModelParams& params) {
  const auto n = grid.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  const double q = 0.5 * (1.0 + params.alpha_hat);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.nodes[i];
    w[static_cast<Eigen::Index>(i)] = -x * std::pow(1.0 + x * x, -q);
  }
  OddGridFunction1D out{grid, std::move(w), TailModel{}};
  out.refit_tail();
  return out;
}

ScalingConstants scaling_constants(const ModelParams& params, double j_inf) {
  ScalingConstants sc;
  sc.c_l = 2.0 - 4.0 * params.alpha * j_inf;
  sc.c_w = 2.0 + 2.0 * params.alpha * (1.0 - params.alpha) * j_inf;
  return sc;
}

AsymptoticCheck asymptotic_deviations(const ModelParams& params,
                                      const ScalingConstants& sc) {
  AsymptoticCheck out;
  const double eps = params.epsilon;
  if (eps <= 0.0) throw DomainError("asymptotic_deviations: requires eps > 0");
  out.cl_dev = sc.c_l * (9.0 * eps / 64.0) - 1.0;
  out.cw_dev = sc.c_w * (27.0 * eps / 64.0) + 1.0;
  if (sc.c_l == 0.0) throw DomainError("asymptotic_deviations: c_l = 0");
  out.ratio = -sc.c_w / sc.c_l;
  out.ratio_dev = out.ratio - (1.0 / 3.0 + eps / 8.0);
  return out;
}

namespace {

// Cumulative integral of g = (3 - alpha - (1 - alpha) V_x) / (2 V) from the
// first node. V is reconstructed inside each grid interval by the cubic
// Hermite interpolant of (V, V_x) at the two ends, and the integral is taken
// by composite Simpson in log x with enough sub-cells that each sub-ratio
// stays near 1. Near the origin g ~ 1/x, so log-space sub-cells keep the rule
// 4th-order even across the strongly graded first interval, where a single
// x-space Simpson cell overestimates the integral badly (the discrete profile
// then leaves the anchored near-origin slope at the first node only).
Eigen::VectorXd cumulative_log_derivative(const Grid1D& grid, double alpha,
                                          const Eigen::VectorXd& v,
                                          const Eigen::VectorXd& vx,
                                          std::vector<double>* history) {
  const Eigen::Index n = v.size();
  const double lin = 1.0 - alpha;
  auto g_of = [&](double vv, double vxx) { return (3.0 - alpha - lin * vxx) / (2.0 * vv); };
  // Max log-width of one Simpson sub-cell (ratio e^{1/32} ~ 1.032 per cell).
  constexpr double kMaxLogCell = 1.0 / 32.0;

  Eigen::VectorXd s(n);
  s[0] = 0.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double xj = grid.nodes[static_cast<std::size_t>(j)];
    const double xj1 = grid.nodes[static_cast<std::size_t>(j) + 1];
    const double h = xj1 - xj;
    const double v0 = v[j], v1 = v[j + 1], d0 = vx[j], d1 = vx[j + 1];
    // Hermite reconstruction of V and V_x at t in [0, 1] across this cell.
    auto v_at = [&](double t) {
      const double u = 1.0 - t;
      return (1.0 + 2.0 * t) * u * u * v0 + t * u * u * h * d0 +
             t * t * (3.0 - 2.0 * t) * v1 + t * t * (t - 1.0) * h * d1;
    };
    auto vx_at = [&](double t) {
      return 6.0 * t * (t - 1.0) * (v0 - v1) / h + (1.0 - t) * (1.0 - 3.0 * t) * d0 +
             t * (3.0 * t - 2.0) * d1;
    };
    auto gx_at = [&](double x) {  // g(x) * x, smooth down to the origin
      const double t = (x - xj) / h;
      const double vv = v_at(t);
      if (vv <= 0.0) {
        throw ConvergenceError(
            "profile iteration lost positivity of V between nodes near x = " + fmt_g17(xj),
            history ? *history : std::vector<double>{});
      }
      return g_of(vv, vx_at(t)) * x;
    };
    const double du = std::log(xj1 / xj);
    const auto cells = static_cast<int>(
        std::min(256.0, std::max(1.0, std::ceil(du / kMaxLogCell))));
    const double dv = du / cells;
    const double u0 = std::log(xj);
    double ds = 0.0;
    double g_left = gx_at(xj);
    for (int c = 0; c < cells; ++c) {
      const double g_mid = gx_at(std::exp(u0 + (c + 0.5) * dv));
      const double g_right =
          (c + 1 == cells) ? gx_at(xj1) : gx_at(std::exp(u0 + (c + 1.0) * dv));
      ds += dv / 6.0 * (g_left + 4.0 * g_mid + g_right);
      g_left = g_right;
    }
    s[j + 1] = s[j] + ds;
  }
  return s;
}

}  // namespace

ProfileResult solve_profile(const NodeEvaluator1D& eval, const ModelParams& params,
                            const OddGridFunction1D& start,
                            const ProfileOptions& opts) {
  if (!(opts.relax > 0.0 && opts.relax <= 1.0)) {
    throw DomainError("solve_profile: relax must lie in (0, 1]");
  }
  if (!(opts.tol > 0.0) || opts.max_iters == 0) {
    throw DomainError("solve_profile: need tol > 0 and max_iters >= 1");
  }
  if (!(params.epsilon > 0.0)) {
    throw DomainError("solve_profile: requires alpha < 1/3 (eps > 0)");
  }
  const Grid1D& grid = eval.grid();
  if (start.grid.nodes != grid.nodes) {
    throw GridError("solve_profile: starting iterate lives on a different grid");
  }
  // Transient iterates can decay slower than x^-alpha, which makes the moment
  // J_inf formally divergent. Project such tails onto the admissible class at
  // the midpoint rate between the divergence threshold alpha and the expected
  // profile rate alpha_hat; the projection is inactive at the fixed point.
  const double p_min = params.alpha + 0.5 * (params.alpha_hat - params.alpha);
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  const double x1 = grid.x_first();

  std::vector<double> phi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    phi[i] = weight_one_normalized(params, grid.nodes[i]);
  }

  OddGridFunction1D w = start;
  if (w.tail.p <= p_min) {
    w.tail = tail_fit_fixed_exponent(grid, w.values, p_min, opts.tail_window_frac);
  }
  ProfileResult res;
  res.residual_history.reserve(opts.max_iters);

  bool converged = false;
  NodeEvaluator1D::NodeFields f;
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    f = eval.evaluate(w.values, w.tail);
    Eigen::VectorXd v(n), vx(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = grid.nodes[static_cast<std::size_t>(i)] + f.psi_ring[i];
      vx[i] = 1.0 + f.dpsi_ring[i];
      if (v[i] <= 0.0) {
        throw ConvergenceError(
            "profile iteration lost positivity of V at x = " +
                fmt_g17(grid.nodes[static_cast<std::size_t>(i)]),
            res.residual_history);
      }
    }
    const Eigen::VectorXd s =
        cumulative_log_derivative(grid, params.alpha, v, vx, &res.residual_history);
    Eigen::VectorXd w_new(n);
    for (Eigen::Index i = 0; i < n; ++i) w_new[i] = -x1 * std::exp(s[i]);

    const double dist =
        weighted_rel_sup(phi, w_new.data(), w.values.data(), static_cast<std::size_t>(n));
    res.residual_history.push_back(dist);

    w.values = (1.0 - opts.relax) * w.values + opts.relax * w_new;
    w.refit_tail(opts.tail_window_frac);
    if (w.tail.p <= p_min) {
      w.tail = tail_fit_fixed_exponent(grid, w.values, p_min, opts.tail_window_frac);
    }
    res.iterations = it + 1;
    if (dist < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError(
        "profile iteration did not reach tol = " + fmt_g17(opts.tol) + " in " +
            std::to_string(opts.max_iters) + " iterations (last distance " +
            fmt_g17(res.residual_history.back()) + ")",
        res.residual_history);
  }

  // Report the scaling constants of the returned iterate, not of the last
  // pre-mix field evaluation.
  f = eval.evaluate(w.values, w.tail);
  res.w = std::move(w);
  res.j_inf = f.j_inf;
  res.scaling = scaling_constants(params, f.j_inf);
  return res;
}

ProfileResult solve_profile(const Grid1D& grid, const ModelParams& params,
                            const ProfileOptions& opts) {
  NodeEvaluator1D eval(grid, params.alpha);
  return solve_profile(eval, params, initial_guess(grid, params), opts);
}

}  // namespace blowuplab
