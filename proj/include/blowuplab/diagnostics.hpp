#pragma once
// Weighted norms, outgoing-flow certification, characteristic-trajectory
// checks, and the asymptotics comparison report.
//
// Weight selectors (all positive away from the origin):
//   Gamma          (|x|^(1-kappa_O) + 1) <x>^(-eps2) <J>^(-kappa)
//   GammaAxisGuard (<z>/(r + <z>))^kappa_ag
//   Phi            |x|^(-kappa_O) + |x|^alpha_phi
//   X3             max(mu_ctr * phi_c, phi_ne), the profile-contraction metric
//   PhiOne         exp((9/kappa1)(<x>^(-kappa1 eps) - 1))
// PhiOne (and the phi_one factor inside phi_c) is normalized by its value at
// the origin, exp(9/kappa1), which overflows double; the un-normalized value
// is available in log form as log_weight_one. Norms built from these weights
// only change by that fixed constant.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blowuplab/biot_savart.hpp"
#include "blowuplab/field2d.hpp"
#include "blowuplab/model_params.hpp"
#include "blowuplab/nonlocal1d.hpp"
#include "blowuplab/profile1d.hpp"
#include "blowuplab/rescaling.hpp"
#include "blowuplab/weights.hpp"

namespace blowuplab {

enum class WeightSelector { Gamma, GammaAxisGuard, Phi, X3, PhiOne };

struct DiagnosticWeight {
  ModelParams params;
  WeightSelector selector = WeightSelector::Gamma;
  WeightSpec envelope;  // mu_ne / b_ne / mu_ctr of the X3 norm
  // |profile| sample for the X3 centre piece
  //   phi_c = |W|^(-1) <x>^(-eps2) <J>^(-kappa) phi_one;
  // required by selector X3 only.
  std::function<double(double)> profile_abs;
};

// <J>(x) = sqrt(1 + J(x)^2) with J the closed-form leading surrogate
// 6(1 - <x>^(-e))/e, e = hat_eps_beta. Throws DomainError for x < 0.
double j_hat_surrogate(const ModelParams& params, double x);

// Selected weight at the half-plane point (r, z); 1D callers pass (0, x).
// Throws DomainError at the origin for the singular selectors (Gamma, Phi,
// X3) and when X3 lacks a profile sample.
double weight_eval(const DiagnosticWeight& spec, double r, double z);

// Max over grid nodes of weight * |field|; the 1D overload evaluates the
// weight on the axis, at (0, x_i).
double weighted_sup_norm(const OddGridFunction1D& w, const DiagnosticWeight& spec);
double weighted_sup_norm(const Field2D& f, const DiagnosticWeight& spec);

// ---------------------------------------------------------------------------
// Outgoing flow and trajectories.
// ---------------------------------------------------------------------------

// Velocity samples on the stored z > 0 nodes; q_r extends odd in r / even in
// z, q_z even in r / odd in z (the parities of (u_r, u_z) and of the rescaled
// drift (c_l r, c_l z)).
struct VelocityField2D {
  HalfPlaneGrid grid;
  Eigen::MatrixXd q_r, q_z;  // nr x (nz-1), same layout as Field2D::values

  double eval_r(double r, double z) const;  // bilinear, clamped at the box
  double eval_z(double r, double z) const;
  void validate() const;
};

// Q = (c_l r + u_r, c_l z + u_z) from a stream solve; c_l = 0 gives the
// physical velocities.
VelocityField2D velocity_from_stream(const StreamFunctionResult& stream, double c_l);

// min over stored nodes with |x| >= exclusion_radius of (Q.x)/|x|^2; a
// positive value certifies the outgoing property empirically (degree-1
// homogeneous in Q). exclusion_radius = 0 selects the default, one smallest
// cell diameter; negative values throw DomainError.
double outgoing_check(const VelocityField2D& q, double exclusion_radius = 0.0);

struct TrajectoryPoint {
  double s = 0.0, r = 0.0, z = 0.0;
};

struct TrajectoryReport {
  std::vector<TrajectoryPoint> path;  // ascending s, includes s = 0
  double lambda_grid = 0.0;  // outgoing_check over the nodes (default radius)
  double lambda_path = 0.0;  // min over path samples of (Q.x)/|x|^2
  // |X(s)| <= |x0| exp(lambda_grid s) on the backward branch (only checked
  // when lambda_grid > 0 -- the bound is vacuous otherwise).
  bool backward_bound_violated = false;
  bool forward_monotone = true;  // |X| non-decreasing on the forward branch
  bool exited_grid = false;      // forward branch truncated at the box
};

// Classical 4th-order integration of dX/ds = Q(X) from X(0) = (r0, z0),
// backward to s_min <= 0 and forward to s_max >= 0 in steps of dt > 0.
TrajectoryReport trajectory_integrate(const VelocityField2D& q, double r0, double z0,
                                      double s_min, double s_max, double dt);

// ---------------------------------------------------------------------------
// Asymptotics report.
// ---------------------------------------------------------------------------

struct AsymptoticsRow {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double rel_dev = 0.0;  // (value - target) / |target|
};

// Comparison of computed scaling quantities against their small-epsilon
// leading forms: c_l vs 64/(9 eps), c_w vs -64/(27 eps), alpha* = -c_w/c_l vs
// 1/3 + eps/8, tail exponent vs alpha_hat, tail amplitude vs -6, T_alpha =
// -1/(c_w + alpha c_l) vs 1/8, and (when a time series is supplied) the
// fitted blowup exponent vs 8/(9 eps) and vs the identity 1/(alpha* - alpha).
// Pure function of its inputs; thresholds live in the test suite.
struct AsymptoticsReport {
  double epsilon = 0.0;
  bool converged_input = true;  // final profile residual <= 1e-6
  std::vector<AsymptoticsRow> rows;

  const AsymptoticsRow& row(const std::string& name) const;  // DomainError if absent
};

AsymptoticsReport asymptotics_report(const ProfileResult& sol, const ModelParams& params,
                                     const TimeSeries* series = nullptr);

}  // namespace blowuplab
