#pragma once
// Dynamic rescaling of the transport equations, in 1D (axis model) and 2D
// (axisymmetric half plane), plus physical-time 2D evolution and the
// reconstruction of physical scales from the recorded rate histories.
//
// Rescaled 1D equation for w(x, s), x > 0, odd:
//     d_s w + (c_l x + 2 psi) d_x w = (c_w - (1 - alpha) d_x psi) w,
// with psi the 1D stream transform of w. The normalization
//     c_l + 2 psi_x(0) = 2,   c_w - (1 - alpha) psi_x(0) = 2
// fixes both rates algebraically from psi_x(0) = 2 alpha J_inf; near the
// origin the advection speed is then 2x and the amplification 2, so the
// leading linear behaviour w ~ -x is frozen by construction.
//
// Rescaled 2D equation for W(r, z, s), odd in z:
//     d_s W + Q . grad W = (c_w - (1 - alpha) d_z Psi) W,
//     Q = (c_l r - r d_z Psi, c_l z + 2 Psi + r d_r Psi),
// with Psi from the finite-volume stream solver and psi_z(0) = 2 alpha J3D.
// The physical-time variant is the same transport with c_l = c_w = 0 and the
// plain velocities (u_r, u_z).
//
// Scheme: semi-Lagrangian. Feet by a second-order midpoint back-trace,
// interpolation by monotone (Fritsch-Carlson limited) cubics so transported
// values never overshoot the data, growth factor exp(dt * mean of the
// amplification at the foot and at the arrival node) — the endpoint average
// keeps the exponent error O(dt^3) per step, which single-step steady-state
// tests resolve.

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "blowuplab/biot_savart.hpp"
#include "blowuplab/field2d.hpp"
#include "blowuplab/model_params.hpp"
#include "blowuplab/nonlocal1d.hpp"

namespace blowuplab {

// ---------------------------------------------------------------------------
// State and configuration.
// ---------------------------------------------------------------------------

// Accumulated scale state of a rescaled run. C_w and C_l are the amplitude
// and length scale factors, t the physical time; with rates frozen at their
// current values the blowup time estimate is T_hat = t + 1/(C_w |c_w_theta|).
struct RescalingState {
  double s = 0.0;          // rescaled time
  double c_l = 0.0;        // instantaneous length rate
  double c_w = 0.0;        // instantaneous amplitude rate
  double c_w_theta = 0.0;  // combined rate c_w + alpha * c_l
  double C_w = 1.0;        // accumulated amplitude scale, dC_w/ds = -c_w_theta C_w
  double C_l = 1.0;        // accumulated length scale,    dC_l/ds = -c_l C_l
  double t = 0.0;          // physical time integral of 1/C_w
  double T_hat = std::numeric_limits<double>::infinity();  // running estimate

  void validate() const;  // positivity of the scales, throws DomainError
};

// Natural initial amplitude scale for a run started at rates (c_l, c_w):
// -1/(c_w + alpha c_l). With the rates frozen there, the reconstructed
// blowup time is exactly the inverse of this value. Throws DomainError when
// c_w + alpha c_l >= 0 (no finite-time blowup along frozen rates).
double amplitude_scale_from_rates(double c_l, double c_w, double alpha);

// Fresh state at s = 0 with C_w(0) = amplitude_scale, C_l(0) = 1, t = 0.
RescalingState initial_rescaling_state(double amplitude_scale);

struct EvolutionConfig {
  double dt = 0.0;             // required; see the dt helpers below
  std::size_t steps = 1;
  std::string scheme = "semi-lagrangian";  // the only implemented scheme
  bool normalize = true;       // rescaled runs: rates from psi_z(0); off = 0
  std::size_t elliptic_every = 1;  // 2D: refresh Psi every k-th step
  std::size_t output_every = 1;    // record cadence in the evolve drivers
  EllipticOptions elliptic;        // 2D stream solves

  // dt > 0, steps >= 1, cadences >= 1; rescaled runs additionally require
  // dt <= 0.1 * params.epsilon (the rates scale like 1/epsilon).
  void validate(const ModelParams& params, bool rescaled) const;
};

// Default step sizes: rescaled runs resolve the 1/epsilon-sized rates,
// physical runs resolve the grid CFL scale.
double default_rescaled_dt(const ModelParams& params);
double default_physical_dt(const HalfPlaneGrid& grid, double max_speed);

// One record per output step of a rescaled run.
struct StepRecord {
  double s = 0.0;
  double c_l = 0.0, c_w = 0.0, c_w_theta = 0.0;
  double psi_z0 = 0.0;    // psi_x(0) resp. psi_z(0,0) driving the rates
  double norm_w = 0.0;    // weighted sup norm of the field
  double residual = 0.0;  // weighted relative update per unit s (d_s estimate)
  double C_w = 0.0, C_l = 0.0, t = 0.0;
};

struct TimeSeries {
  std::vector<StepRecord> records;
  double T_hat = std::numeric_limits<double>::infinity();

  void validate() const;  // non-empty, strictly increasing s; throws DomainError
};

// ---------------------------------------------------------------------------
// Single steps.
// ---------------------------------------------------------------------------

struct Step1DResult {
  OddGridFunction1D w;
  RescalingState state;
  double psi_x0 = 0.0;         // axis slope used for the rates
  double rel_update = 0.0;     // weighted relative change of the node values
  bool foot_beyond_grid = false;  // some foot needed the tail model
  bool cfl_warning = false;       // |c_l| dt > 0.5: feet cross many cells
};

// One rescaled semi-Lagrangian step of the 1D model. The evaluator must be
// built on w.grid with params.alpha; the overload without it assembles one
// internally (expensive — drivers should share). Tails flatter than the
// admissible decay class are projected exactly as in the profile solver so
// the moment J_inf stays finite along transients.
Step1DResult step_rescaled_1d(const NodeEvaluator1D& eval, const OddGridFunction1D& w,
                              const RescalingState& state, const EvolutionConfig& cfg,
                              const ModelParams& params);
Step1DResult step_rescaled_1d(const OddGridFunction1D& w, const RescalingState& state,
                              const EvolutionConfig& cfg, const ModelParams& params);

struct Step2DResult {
  Field2D omega;
  RescalingState state;
  double psi_z0 = 0.0;
  double rel_update = 0.0;        // max-norm relative change of the node values
  bool foot_beyond_grid = false;  // some foot left the box (value taken as 0)
  bool cfl_warning = false;
};

// One rescaled step of the 2D equation. Psi comes from solver.solve(omega,
// cfg.elliptic) unless a caller-supplied frozen stream result is passed (the
// cheap every-k-steps mode; it must live on the same grid).
Step2DResult step_rescaled_2d(const Field2D& omega, const RescalingState& state,
                              const EllipticStreamSolver& solver,
                              const EvolutionConfig& cfg, const ModelParams& params,
                              const StreamFunctionResult* frozen_psi = nullptr);

// One physical-time step: same transport with c_l = c_w = 0 and velocities
// (u_r, u_z); no normalization, no scale accumulation.
Step2DResult step_physical_2d(const Field2D& omega, const EllipticStreamSolver& solver,
                              double dt, const ModelParams& params,
                              const EllipticOptions& elliptic = {},
                              const StreamFunctionResult* frozen_psi = nullptr);

// ---------------------------------------------------------------------------
// Evolve drivers (step loops with recording).
// ---------------------------------------------------------------------------

struct Evolve1DResult {
  OddGridFunction1D w;
  RescalingState state;
  TimeSeries series;  // one record per output_every steps plus the final state
  bool any_foot_beyond_grid = false;
  bool any_cfl_warning = false;
};

Evolve1DResult evolve_rescaled_1d(const OddGridFunction1D& w0, const ModelParams& params,
                                  const EvolutionConfig& cfg);

struct Evolve2DResult {
  Field2D omega;
  RescalingState state;
  TimeSeries series;
  bool any_foot_beyond_grid = false;
  bool any_cfl_warning = false;
};

Evolve2DResult evolve_rescaled_2d(const Field2D& omega0, const ModelParams& params,
                                  const EvolutionConfig& cfg);

// Physical-time loop; records (t, sup-node |Omega r^(alpha-1)|) per cadence.
struct PhysicalSeriesPoint {
  double t = 0.0;
  double sup_transported = 0.0;
};

struct EvolvePhysicalResult {
  Field2D omega;
  std::vector<PhysicalSeriesPoint> series;
  bool any_foot_beyond_grid = false;
};

EvolvePhysicalResult evolve_physical_2d(const Field2D& omega0, const ModelParams& params,
                                        double dt, std::size_t steps,
                                        std::size_t output_every = 1,
                                        const EllipticOptions& elliptic = {},
                                        std::size_t elliptic_every = 1);

// Sup over off-axis nodes of |Omega| r^(alpha-1) — the transported quantity
// of the physical flow; a monotone scheme cannot increase it.
double transported_sup(const Field2D& omega, const ModelParams& params);

// ---------------------------------------------------------------------------
// Scale reconstruction and the blowup exponent.
// ---------------------------------------------------------------------------

// Rebuild C_w, C_l, t from the recorded rates alone: per panel the rates are
// taken constant at their trapezoid average, for which the scale factors and
// the integral of 1/C_w have exact exponential expressions (constant-rate
// input therefore reproduces the closed forms to rounding). C_w0/C_l0 default
// to the first record's values. T_hat extrapolates the physical time with
// c_w_theta frozen at its last value (infinite when that value is >= 0).
TimeSeries reconstruct_scales(const TimeSeries& series, double C_w0 = 0.0,
                              double C_l0 = 0.0);

// Least-squares slope of log C_l against log(T_hat - t) over the records:
// the spatial blowup exponent c_x in C_l ~ (T_hat - t)^(c_x). Requires a
// finite T_hat and at least 20 usable records (DomainError otherwise).
double fit_blowup_exponent(const TimeSeries& series);

// phi_one-normalized node weights (the metric the profile solver and the
// drift diagnostics share).
std::vector<double> profile_metric_weights(const Grid1D& grid, const ModelParams& params);

}  // namespace blowuplab
