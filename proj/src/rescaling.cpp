#include "blowuplab/rescaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "blowuplab/interp.hpp"
#include "blowuplab/weights.hpp"

namespace blowuplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (exp(y) - 1) / y, continuous through y = 0. Used for the exact integral of
// 1/C_w over a panel with constant rate.
double gexp(double y) { return y == 0.0 ? 1.0 : std::expm1(y) / y; }

// Advance the accumulated scales of `from` over one panel of width dt with
// the rates (c_l, c_w_theta) held constant: the panel ODEs integrate exactly.
RescalingState advance_scales(const RescalingState& from, double dt, double c_l,
                              double c_w, double c_w_theta) {
  RescalingState st = from;
  st.c_l = c_l;
  st.c_w = c_w;
  st.c_w_theta = c_w_theta;
  st.s = from.s + dt;
  st.C_w = from.C_w * std::exp(-dt * c_w_theta);
  st.C_l = from.C_l * std::exp(-dt * c_l);
  st.t = from.t + dt / from.C_w * gexp(c_w_theta * dt);
  st.T_hat = c_w_theta < 0.0 ? st.t + 1.0 / (st.C_w * (-c_w_theta)) : kInf;
  return st;
}

}  // namespace

// ---------------------------------------------------------------------------
// State and configuration.
// ---------------------------------------------------------------------------

void RescalingState::validate() const {
  if (!std::isfinite(s) || !std::isfinite(c_l) || !std::isfinite(c_w) ||
      !std::isfinite(c_w_theta) || !std::isfinite(t)) {
    throw DomainError("RescalingState: non-finite entries");
  }
  if (!(C_w > 0.0) || !std::isfinite(C_w) || !(C_l > 0.0) || !std::isfinite(C_l)) {
    throw DomainError("RescalingState: scale factors must be positive and finite");
  }
}

double amplitude_scale_from_rates(double c_l, double c_w, double alpha) {
  const double g = c_w + alpha * c_l;
  if (!(g < 0.0)) {
    throw DomainError("amplitude_scale_from_rates: c_w + alpha*c_l = " + fmt_g17(g) +
                      " is not negative (no finite-time blowup at frozen rates)");
  }
  return -1.0 / g;
}

RescalingState initial_rescaling_state(double amplitude_scale) {
  if (!(amplitude_scale > 0.0) || !std::isfinite(amplitude_scale)) {
    throw DomainError("initial_rescaling_state: amplitude scale must be positive");
  }
  RescalingState st;
  st.C_w = amplitude_scale;
  return st;
}

void EvolutionConfig::validate(const ModelParams& params, bool rescaled) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("EvolutionConfig: dt must be positive and finite");
  }
  if (steps < 1) throw DomainError("EvolutionConfig: steps must be >= 1");
  if (scheme != "semi-lagrangian") {
    throw DomainError("EvolutionConfig: unknown scheme '" + scheme +
                      "' (only 'semi-lagrangian' is implemented)");
  }
  if (elliptic_every < 1 || output_every < 1) {
    throw DomainError("EvolutionConfig: cadences must be >= 1");
  }
  if (rescaled && dt > 0.1 * params.epsilon) {
    throw DomainError("EvolutionConfig: rescaled runs need dt <= 0.1*epsilon = " +
                      fmt_g17(0.1 * params.epsilon) + ", got " + fmt_g17(dt));
  }
}

double default_rescaled_dt(const ModelParams& params) { return 0.05 * params.epsilon; }

double default_physical_dt(const HalfPlaneGrid& grid, double max_speed) {
  grid.validate();
  if (!(max_speed > 0.0) || !std::isfinite(max_speed)) {
    throw DomainError("default_physical_dt: max_speed must be positive");
  }
  double h = kInf;
  for (std::size_t i = 0; i + 1 < grid.nr(); ++i) h = std::min(h, grid.r[i + 1] - grid.r[i]);
  for (std::size_t j = 0; j + 1 < grid.nz(); ++j) h = std::min(h, grid.z[j + 1] - grid.z[j]);
  return 0.25 * h / max_speed;
}

void TimeSeries::validate() const {
  if (records.empty()) throw DomainError("TimeSeries: no records");
  for (std::size_t k = 0; k < records.size(); ++k) {
    const StepRecord& r = records[k];
    if (!std::isfinite(r.s) || !std::isfinite(r.c_l) || !std::isfinite(r.c_w) ||
        !std::isfinite(r.c_w_theta) || !std::isfinite(r.t)) {
      throw DomainError("TimeSeries: non-finite record at index " + std::to_string(k));
    }
    if (k > 0 && !(r.s > records[k - 1].s)) {
      throw DomainError("TimeSeries: s must increase strictly (index " +
                        std::to_string(k) + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// 1D step.
// ---------------------------------------------------------------------------

Step1DResult step_rescaled_1d(const NodeEvaluator1D& eval, const OddGridFunction1D& w,
                              const RescalingState& state, const EvolutionConfig& cfg,
                              const ModelParams& params) {
  cfg.validate(params, /*rescaled=*/true);
  state.validate();
  w.validate();
  if (eval.grid().nodes != w.grid.nodes) {
    throw GridError("step_rescaled_1d: evaluator grid differs from the field grid");
  }
  if (eval.alpha() != params.alpha) {
    throw DomainError("step_rescaled_1d: evaluator alpha " + fmt_g17(eval.alpha()) +
                      " differs from params.alpha " + fmt_g17(params.alpha));
  }

  const double dt = cfg.dt;
  const double alpha = params.alpha;
  const NodeEvaluator1D::NodeFields nf = eval.evaluate(w.values, w.tail);
  const double psi_x0 = 2.0 * alpha * nf.j_inf;

  double c_l = 0.0, c_w = 0.0;
  if (cfg.normalize) {
    c_l = 2.0 - 2.0 * psi_x0;
    c_w = 2.0 + (1.0 - alpha) * psi_x0;
  }
  const double c_w_theta = c_w + alpha * c_l;

  // Node tables of speed, amplification, and the field, extended by the exact
  // origin values (U(0) = 0, a(0) = c_w - (1-alpha) psi_x(0), w(0) = 0) so the
  // interpolants cover [0, x_max] without one-sided extrapolation.
  const std::size_t n = w.grid.size();
  std::vector<double> xs(n + 1), us(n + 1), as(n + 1), ws(n + 1);
  xs[0] = 0.0;
  us[0] = 0.0;
  as[0] = c_w - (1.0 - alpha) * psi_x0;
  ws[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = w.grid.nodes[i];
    xs[i + 1] = x;
    us[i + 1] = c_l * x + 2.0 * nf.psi[static_cast<Eigen::Index>(i)];
    as[i + 1] = c_w - (1.0 - alpha) * nf.dpsi[static_cast<Eigen::Index>(i)];
    ws[i + 1] = w.values[static_cast<Eigen::Index>(i)];
  }
  const MonotoneCubic speed(xs, us);
  const MonotoneCubic amp(xs, as);
  const MonotoneCubic field(xs, ws);
  const double x_max = w.grid.x_max();

  // Odd / even extensions of the interpolants; the field switches to the tail
  // model beyond the last node.
  const auto speed_at = [&](double x) { return sgn(x) * speed(std::fabs(x)); };
  const auto amp_at = [&](double x) { return amp(std::fabs(x)); };

  Step1DResult out;
  out.psi_x0 = psi_x0;
  out.cfl_warning = std::fabs(c_l) * dt > 0.5;

  Eigen::VectorXd next(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs[i + 1];
    const double x_mid = x - 0.5 * dt * us[i + 1];
    const double foot = x - dt * speed_at(x_mid);
    double wf;
    if (std::fabs(foot) > x_max) {
      out.foot_beyond_grid = true;
      wf = w.tail.A == 0.0 ? 0.0 : sgn(foot) * w.tail.A * std::pow(std::fabs(foot),
                                                                   -w.tail.p);
    } else {
      wf = sgn(foot) * field(std::fabs(foot));
    }
    const double growth = std::exp(dt * 0.5 * (amp_at(foot) + as[i + 1]));
    next[static_cast<Eigen::Index>(i)] = wf * growth;
  }

  out.w.grid = w.grid;
  out.w.values = std::move(next);
  out.w.tail = w.tail;
  if (out.w.values.cwiseAbs().maxCoeff() == 0.0) {
    out.w.tail = TailModel{0.0, w.tail.p, 0.0};
  } else {
    // Refit the far-field power law and, as in the profile solver, project a
    // fitted decay slower than the admissible class back onto its edge so the
    // moment J_inf stays finite along transients. A degenerate window (signs
    // mixed or zeros) keeps the incoming tail model.
    const double p_min = params.alpha + 0.5 * (params.alpha_hat - params.alpha);
    try {
      out.w.refit_tail();
      if (out.w.tail.p <= p_min) {
        out.w.tail = tail_fit_fixed_exponent(out.w.grid, out.w.values, p_min);
      }
    } catch (const DomainError&) {
      out.w.tail = w.tail;
    }
  }
  out.w.validate();

  const std::vector<double> metric = profile_metric_weights(w.grid, params);
  out.rel_update = weighted_rel_sup(metric, out.w.values.data(), w.values.data(), n);
  out.state = advance_scales(state, dt, c_l, c_w, c_w_theta);
  return out;
}

Step1DResult step_rescaled_1d(const OddGridFunction1D& w, const RescalingState& state,
                              const EvolutionConfig& cfg, const ModelParams& params) {
  const NodeEvaluator1D eval(w.grid, params.alpha);
  return step_rescaled_1d(eval, w, state, cfg, params);
}

// ---------------------------------------------------------------------------
// 2D steps.
// ---------------------------------------------------------------------------

namespace {

struct Transport2DResult {
  Eigen::MatrixXd values;
  bool foot_beyond_grid = false;
};

// Semi-Lagrangian transport of omega by Q = (c_l r + u_r, c_l z + u_z) with
// amplification a = c_w - (1 - alpha) psi_z, endpoint-averaged in the growth
// exponent. Works for the physical flow with c_l = c_w = 0.
Transport2DResult transport_2d(const Field2D& omega, const StreamFunctionResult& s,
                               double dt, double c_l, double c_w, double alpha) {
  const HalfPlaneGrid& g = omega.grid;
  const std::size_t nr = g.nr(), nz = g.nz();
  const double one_m_alpha = 1.0 - alpha;

  const auto q_r_at = [&](double r, double z) {
    return c_l * r + sample_bilinear(g, s.u_r, -1, +1, r, z, /*clamp_outside=*/true);
  };
  const auto q_z_at = [&](double r, double z) {
    return c_l * z + sample_bilinear(g, s.u_z, +1, -1, r, z, /*clamp_outside=*/true);
  };
  const auto amp_at = [&](double r, double z) {
    return c_w - one_m_alpha * sample_bilinear(g, s.psi_z, +1, +1, r, z,
                                               /*clamp_outside=*/true);
  };

  Transport2DResult out;
  out.values.resize(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nz) - 1);
  for (std::size_t i = 0; i < nr; ++i) {
    const double r = g.r[i];
    for (std::size_t j = 1; j < nz; ++j) {
      const double z = g.z[j];
      const Eigen::Index ei = static_cast<Eigen::Index>(i);
      const Eigen::Index ej = static_cast<Eigen::Index>(j) - 1;
      // Midpoint back-trace; at the arrival node the velocity and the
      // amplification are the stored (exact) samples.
      const double qr0 = c_l * r + s.u_r(ei, ej);
      const double qz0 = c_l * z + s.u_z(ei, ej);
      const double mr = r - 0.5 * dt * qr0;
      const double mz = z - 0.5 * dt * qz0;
      const double fr = r - dt * q_r_at(mr, mz);
      const double fz = z - dt * q_z_at(mr, mz);
      if (std::fabs(fr) > g.r_max() || std::fabs(fz) > g.z_max()) {
        out.foot_beyond_grid = true;
      }
      const double wf = sample_monotone_cubic(g, omega.values, fr, fz);
      const double a_node = c_w - one_m_alpha * s.psi_z(ei, ej);
      const double growth = std::exp(dt * 0.5 * (amp_at(fr, fz) + a_node));
      out.values(ei, ej) = wf * growth;
    }
  }
  return out;
}

void check_stream_grid(const Field2D& omega, const StreamFunctionResult& s,
                       const char* who) {
  if (s.grid.r != omega.grid.r || s.grid.z != omega.grid.z) {
    throw GridError(std::string(who) + ": stream result grid differs from the field grid");
  }
}

double plain_rel_sup(const Eigen::MatrixXd& next, const Eigen::MatrixXd& prev) {
  const double den = prev.cwiseAbs().maxCoeff();
  const double num = (next - prev).cwiseAbs().maxCoeff();
  if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
  return num / den;
}

}  // namespace

Step2DResult step_rescaled_2d(const Field2D& omega, const RescalingState& state,
                              const EllipticStreamSolver& solver,
                              const EvolutionConfig& cfg, const ModelParams& params,
                              const StreamFunctionResult* frozen_psi) {
  cfg.validate(params, /*rescaled=*/true);
  state.validate();
  omega.validate();

  StreamFunctionResult fresh;
  const StreamFunctionResult* s = frozen_psi;
  if (s == nullptr) {
    fresh = solver.solve(omega, cfg.elliptic);
    s = &fresh;
  }
  check_stream_grid(omega, *s, "step_rescaled_2d");

  const double psi_z0 = s->psi_z_origin;
  double c_l = 0.0, c_w = 0.0;
  if (cfg.normalize) {
    c_l = 2.0 - 2.0 * psi_z0;
    c_w = 2.0 + (1.0 - params.alpha) * psi_z0;
  }
  const double c_w_theta = c_w + params.alpha * c_l;

  Transport2DResult tr = transport_2d(omega, *s, cfg.dt, c_l, c_w, params.alpha);

  Step2DResult out;
  out.psi_z0 = psi_z0;
  out.foot_beyond_grid = tr.foot_beyond_grid;
  out.cfl_warning = std::fabs(c_l) * cfg.dt > 0.5;
  out.rel_update = plain_rel_sup(tr.values, omega.values);
  out.omega.grid = omega.grid;
  out.omega.values = std::move(tr.values);
  out.omega.tail_p_r = omega.tail_p_r;
  out.omega.tail_p_z = omega.tail_p_z;
  out.omega.support_radius = field_support_radius(out.omega);
  out.omega.validate();
  out.state = advance_scales(state, cfg.dt, c_l, c_w, c_w_theta);
  return out;
}

Step2DResult step_physical_2d(const Field2D& omega, const EllipticStreamSolver& solver,
                              double dt, const ModelParams& params,
                              const EllipticOptions& elliptic,
                              const StreamFunctionResult* frozen_psi) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("step_physical_2d: dt must be positive and finite");
  }
  omega.validate();

  StreamFunctionResult fresh;
  const StreamFunctionResult* s = frozen_psi;
  if (s == nullptr) {
    fresh = solver.solve(omega, elliptic);
    s = &fresh;
  }
  check_stream_grid(omega, *s, "step_physical_2d");

  Transport2DResult tr = transport_2d(omega, *s, dt, 0.0, 0.0, params.alpha);

  Step2DResult out;
  out.psi_z0 = s->psi_z_origin;
  out.foot_beyond_grid = tr.foot_beyond_grid;
  out.rel_update = plain_rel_sup(tr.values, omega.values);
  out.omega.grid = omega.grid;
  out.omega.values = std::move(tr.values);
  out.omega.tail_p_r = omega.tail_p_r;
  out.omega.tail_p_z = omega.tail_p_z;
  out.omega.support_radius = field_support_radius(out.omega);
  out.omega.validate();
  out.state.t = dt;  // physical runs track elapsed time only
  return out;
}

// ---------------------------------------------------------------------------
// Evolve drivers.
// ---------------------------------------------------------------------------

namespace {

StepRecord make_record(const RescalingState& pre, const RescalingState& post,
                       double psi_z0, double norm_w, double rel_update, double dt) {
  StepRecord r;
  r.s = pre.s;
  r.c_l = post.c_l;  // rates evaluated at the pre-step field
  r.c_w = post.c_w;
  r.c_w_theta = post.c_w_theta;
  r.psi_z0 = psi_z0;
  r.norm_w = norm_w;
  r.residual = rel_update / dt;
  r.C_w = pre.C_w;
  r.C_l = pre.C_l;
  r.t = pre.t;
  return r;
}

StepRecord final_record(const RescalingState& st, double psi_z0, double norm_w,
                        double last_rel_update, double dt) {
  StepRecord r;
  r.s = st.s;
  r.c_l = st.c_l;
  r.c_w = st.c_w;
  r.c_w_theta = st.c_w_theta;
  r.psi_z0 = psi_z0;
  r.norm_w = norm_w;
  r.residual = last_rel_update / dt;
  r.C_w = st.C_w;
  r.C_l = st.C_l;
  r.t = st.t;
  return r;
}

}  // namespace

Evolve1DResult evolve_rescaled_1d(const OddGridFunction1D& w0, const ModelParams& params,
                                  const EvolutionConfig& cfg) {
  cfg.validate(params, /*rescaled=*/true);
  w0.validate();
  const NodeEvaluator1D eval(w0.grid, params.alpha);
  const std::vector<double> metric = profile_metric_weights(w0.grid, params);
  const auto norm_of = [&](const OddGridFunction1D& w) {
    double m = 0.0;
    for (std::size_t i = 0; i < metric.size(); ++i) {
      m = std::max(m, metric[i] * std::fabs(w.values[static_cast<Eigen::Index>(i)]));
    }
    return m;
  };

  Evolve1DResult out;
  out.w = w0;
  out.state = RescalingState{};
  double last_psi = 0.0, last_rel = 0.0;
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    const RescalingState pre = out.state;
    const double norm_pre = norm_of(out.w);
    Step1DResult st = step_rescaled_1d(eval, out.w, pre, cfg, params);
    if (k % cfg.output_every == 0) {
      out.series.records.push_back(
          make_record(pre, st.state, st.psi_x0, norm_pre, st.rel_update, cfg.dt));
    }
    out.w = std::move(st.w);
    out.state = st.state;
    out.any_foot_beyond_grid = out.any_foot_beyond_grid || st.foot_beyond_grid;
    out.any_cfl_warning = out.any_cfl_warning || st.cfl_warning;
    last_psi = st.psi_x0;
    last_rel = st.rel_update;
  }
  out.series.records.push_back(
      final_record(out.state, last_psi, norm_of(out.w), last_rel, cfg.dt));
  out.series.T_hat = out.state.T_hat;
  out.series.validate();
  return out;
}

Evolve2DResult evolve_rescaled_2d(const Field2D& omega0, const ModelParams& params,
                                  const EvolutionConfig& cfg) {
  cfg.validate(params, /*rescaled=*/true);
  omega0.validate();
  const EllipticStreamSolver solver(omega0.grid, params);

  Evolve2DResult out;
  out.omega = omega0;
  out.state = RescalingState{};
  StreamFunctionResult stream;
  double last_psi = 0.0, last_rel = 0.0;
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    if (k % cfg.elliptic_every == 0) stream = solver.solve(out.omega, cfg.elliptic);
    const RescalingState pre = out.state;
    const double norm_pre = out.omega.values.cwiseAbs().maxCoeff();
    Step2DResult st = step_rescaled_2d(out.omega, pre, solver, cfg, params, &stream);
    if (k % cfg.output_every == 0) {
      out.series.records.push_back(
          make_record(pre, st.state, st.psi_z0, norm_pre, st.rel_update, cfg.dt));
    }
    out.omega = std::move(st.omega);
    out.state = st.state;
    out.any_foot_beyond_grid = out.any_foot_beyond_grid || st.foot_beyond_grid;
    out.any_cfl_warning = out.any_cfl_warning || st.cfl_warning;
    last_psi = st.psi_z0;
    last_rel = st.rel_update;
  }
  out.series.records.push_back(final_record(
      out.state, last_psi, out.omega.values.cwiseAbs().maxCoeff(), last_rel, cfg.dt));
  out.series.T_hat = out.state.T_hat;
  out.series.validate();
  return out;
}

EvolvePhysicalResult evolve_physical_2d(const Field2D& omega0, const ModelParams& params,
                                        double dt, std::size_t steps,
                                        std::size_t output_every,
                                        const EllipticOptions& elliptic,
                                        std::size_t elliptic_every) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("evolve_physical_2d: dt must be positive and finite");
  }
  if (steps < 1) throw DomainError("evolve_physical_2d: steps must be >= 1");
  if (output_every < 1 || elliptic_every < 1) {
    throw DomainError("evolve_physical_2d: cadences must be >= 1");
  }
  omega0.validate();
  const EllipticStreamSolver solver(omega0.grid, params);

  EvolvePhysicalResult out;
  out.omega = omega0;
  out.series.push_back({0.0, transported_sup(out.omega, params)});
  StreamFunctionResult stream;
  double t = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    if (k % elliptic_every == 0) stream = solver.solve(out.omega, elliptic);
    Step2DResult st = step_physical_2d(out.omega, solver, dt, params, elliptic, &stream);
    out.omega = std::move(st.omega);
    out.any_foot_beyond_grid = out.any_foot_beyond_grid || st.foot_beyond_grid;
    t += dt;
    if ((k + 1) % output_every == 0 || k + 1 == steps) {
      out.series.push_back({t, transported_sup(out.omega, params)});
    }
  }
  return out;
}

double transported_sup(const Field2D& omega, const ModelParams& params) {
  omega.validate();
  double m = 0.0;
  for (std::size_t i = 1; i < omega.grid.nr(); ++i) {
    const double w = std::pow(omega.grid.r[i], params.alpha - 1.0);
    for (std::size_t j = 1; j < omega.grid.nz(); ++j) {
      m = std::max(m, std::fabs(omega.at(i, j - 1)) * w);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Scale reconstruction and the blowup exponent.
// ---------------------------------------------------------------------------

TimeSeries reconstruct_scales(const TimeSeries& series, double C_w0, double C_l0) {
  series.validate();
  if (C_w0 == 0.0) C_w0 = series.records.front().C_w;
  if (C_l0 == 0.0) C_l0 = series.records.front().C_l;
  if (!(C_w0 > 0.0) || !std::isfinite(C_w0) || !(C_l0 > 0.0) || !std::isfinite(C_l0)) {
    throw DomainError("reconstruct_scales: initial scales must be positive (pass "
                      "C_w0/C_l0 or set them on the first record)");
  }

  TimeSeries out = series;
  StepRecord& first = out.records.front();
  first.C_w = C_w0;
  first.C_l = C_l0;
  first.t = 0.0;
  for (std::size_t k = 1; k < out.records.size(); ++k) {
    const StepRecord& a = out.records[k - 1];
    StepRecord& b = out.records[k];
    const double ds = b.s - a.s;
    const double cwt = 0.5 * (a.c_w_theta + b.c_w_theta);
    const double cl = 0.5 * (a.c_l + b.c_l);
    b.C_w = a.C_w * std::exp(-ds * cwt);
    b.C_l = a.C_l * std::exp(-ds * cl);
    b.t = a.t + ds / a.C_w * gexp(cwt * ds);
  }
  const StepRecord& last = out.records.back();
  out.T_hat = last.c_w_theta < 0.0
                  ? last.t + 1.0 / (last.C_w * (-last.c_w_theta))
                  : kInf;
  return out;
}

double fit_blowup_exponent(const TimeSeries& series) {
  series.validate();
  if (!std::isfinite(series.T_hat)) {
    throw DomainError("fit_blowup_exponent: series has no finite blowup time estimate");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (const StepRecord& r : series.records) {
    const double gap = series.T_hat - r.t;
    if (!(gap > 0.0) || !(r.C_l > 0.0)) continue;
    const double x = std::log(gap), y = std::log(r.C_l);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 20) {
    throw DomainError("fit_blowup_exponent: need at least 20 usable records, got " +
                      std::to_string(m));
  }
  const double den = static_cast<double>(m) * sxx - sx * sx;
  if (den == 0.0) throw DomainError("fit_blowup_exponent: degenerate time axis");
  return (static_cast<double>(m) * sxy - sx * sy) / den;
}

std::vector<double> profile_metric_weights(const Grid1D& grid, const ModelParams& params) {
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    w[i] = weight_one_normalized(params, grid.nodes[i]);
  }
  return w;
}

}  // namespace blowuplab
