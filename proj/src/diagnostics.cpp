#include "blowuplab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blowuplab {

double j_hat_surrogate(const ModelParams& params, double x) {
  if (x < 0.0) throw DomainError("j_hat_surrogate: x must be >= 0");
  return j_surrogate_bracket(params, x);
}

double weight_eval(const DiagnosticWeight& spec, double r, double z) {
  const ModelParams& p = spec.params;
  const double ax = std::hypot(r, z);
  switch (spec.selector) {
    case WeightSelector::GammaAxisGuard:
      return weight_axis_guard(p, r, z);
    case WeightSelector::PhiOne:
      return weight_one_normalized(p, ax);
    case WeightSelector::Gamma:
      if (ax == 0.0) throw DomainError("weight_eval: Gamma is singular at the origin");
      return weight_gamma(p, ax);
    case WeightSelector::Phi:
      if (ax == 0.0) throw DomainError("weight_eval: Phi is singular at the origin");
      return weight_m(p, ax);
    case WeightSelector::X3: {
      if (ax == 0.0) throw DomainError("weight_eval: X3 is singular at the origin");
      if (!spec.profile_abs) {
        throw DomainError("weight_eval: X3 needs a |profile| sample (profile_abs)");
      }
      WeightSpec env = spec.envelope;
      env.mu_ctr = 1.0;  // envelope alone; the centre scale enters below
      const double phi_ne = weight_envelope(env, ax);
      const double phi_c = std::pow(bracket(ax), -p.eps2) *
                           std::pow(j_surrogate_bracket(p, ax), -p.kappa) *
                           weight_one_normalized(p, ax) / spec.profile_abs(ax);
      return std::max(spec.envelope.mu_ctr * phi_c, phi_ne);
    }
  }
  throw DomainError("weight_eval: unknown selector");
}

double weighted_sup_norm(const OddGridFunction1D& w, const DiagnosticWeight& spec) {
  w.validate();
  double m = 0.0;
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    m = std::max(m, weight_eval(spec, 0.0, w.grid.nodes[i]) *
                        std::fabs(w.values[static_cast<Eigen::Index>(i)]));
  }
  return m;
}

double weighted_sup_norm(const Field2D& f, const DiagnosticWeight& spec) {
  f.validate();
  double m = 0.0;
  for (std::size_t i = 0; i < f.grid.nr(); ++i) {
    for (std::size_t j = 1; j < f.grid.nz(); ++j) {
      m = std::max(m, weight_eval(spec, f.grid.r[i], f.grid.z[j]) *
                          std::fabs(f.at(i, j - 1)));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Outgoing flow and trajectories.
// ---------------------------------------------------------------------------

void VelocityField2D::validate() const {
  grid.validate();
  const Eigen::Index nr = static_cast<Eigen::Index>(grid.nr());
  const Eigen::Index nc = static_cast<Eigen::Index>(grid.nz()) - 1;
  if (q_r.rows() != nr || q_r.cols() != nc || q_z.rows() != nr || q_z.cols() != nc) {
    throw GridError("VelocityField2D: components must be nr x (nz-1)");
  }
  if (!q_r.allFinite() || !q_z.allFinite()) {
    throw GridError("VelocityField2D: non-finite samples");
  }
}

double VelocityField2D::eval_r(double r, double z) const {
  return sample_bilinear(grid, q_r, -1, +1, r, z, /*clamp_outside=*/true);
}

double VelocityField2D::eval_z(double r, double z) const {
  return sample_bilinear(grid, q_z, +1, -1, r, z, /*clamp_outside=*/true);
}

VelocityField2D velocity_from_stream(const StreamFunctionResult& stream, double c_l) {
  VelocityField2D q;
  q.grid = stream.grid;
  q.q_r = stream.u_r;
  q.q_z = stream.u_z;
  for (std::size_t i = 0; i < q.grid.nr(); ++i) {
    for (std::size_t j = 1; j < q.grid.nz(); ++j) {
      const Eigen::Index ei = static_cast<Eigen::Index>(i);
      const Eigen::Index ej = static_cast<Eigen::Index>(j) - 1;
      q.q_r(ei, ej) += c_l * q.grid.r[i];
      q.q_z(ei, ej) += c_l * q.grid.z[j];
    }
  }
  q.validate();
  return q;
}

double outgoing_check(const VelocityField2D& q, double exclusion_radius) {
  q.validate();
  if (exclusion_radius < 0.0) {
    throw DomainError("outgoing_check: exclusion radius must be >= 0");
  }
  const double excl =
      exclusion_radius == 0.0 ? q.grid.min_cell_diameter() : exclusion_radius;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.grid.nr(); ++i) {
    const double r = q.grid.r[i];
    for (std::size_t j = 1; j < q.grid.nz(); ++j) {
      const double z = q.grid.z[j];
      const double xx = r * r + z * z;
      if (xx < excl * excl) continue;
      const Eigen::Index ei = static_cast<Eigen::Index>(i);
      const Eigen::Index ej = static_cast<Eigen::Index>(j) - 1;
      m = std::min(m, (q.q_r(ei, ej) * r + q.q_z(ei, ej) * z) / xx);
    }
  }
  if (!std::isfinite(m)) {
    throw DomainError("outgoing_check: no node outside the exclusion radius");
  }
  return m;
}

namespace {

struct Vec2 {
  double r, z;
};

Vec2 rk4_step(const VelocityField2D& q, Vec2 x, double h) {
  const auto f = [&](Vec2 p) { return Vec2{q.eval_r(p.r, p.z), q.eval_z(p.r, p.z)}; };
  const Vec2 k1 = f(x);
  const Vec2 k2 = f({x.r + 0.5 * h * k1.r, x.z + 0.5 * h * k1.z});
  const Vec2 k3 = f({x.r + 0.5 * h * k2.r, x.z + 0.5 * h * k2.z});
  const Vec2 k4 = f({x.r + h * k3.r, x.z + h * k3.z});
  return {x.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r),
          x.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z)};
}

}  // namespace

TrajectoryReport trajectory_integrate(const VelocityField2D& q, double r0, double z0,
                                      double s_min, double s_max, double dt) {
  q.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("trajectory_integrate: dt must be positive");
  }
  if (!(s_min <= 0.0) || !(s_max >= 0.0)) {
    throw DomainError("trajectory_integrate: need s_min <= 0 <= s_max");
  }
  if (std::fabs(r0) > q.grid.r_max() || std::fabs(z0) > q.grid.z_max()) {
    throw DomainError("trajectory_integrate: start point outside the grid box");
  }
  const double x0n = std::hypot(r0, z0);
  if (x0n == 0.0) {
    throw DomainError("trajectory_integrate: start point must not be the origin");
  }

  TrajectoryReport rep;
  rep.lambda_grid = outgoing_check(q);

  // Backward branch (collected deepest-first, then reversed into the path).
  std::vector<TrajectoryPoint> back;
  {
    Vec2 x{r0, z0};
    double s = 0.0;
    const std::size_t n = static_cast<std::size_t>(std::ceil(-s_min / dt - 1e-12));
    for (std::size_t k = 0; k < n; ++k) {
      const double h = std::max(s_min - s, -dt);  // final partial step
      x = rk4_step(q, x, h);
      s += h;
      back.push_back({s, x.r, x.z});
    }
  }
  std::reverse(back.begin(), back.end());
  rep.path = std::move(back);
  rep.path.push_back({0.0, r0, z0});

  // Forward branch, truncated (and flagged) if it leaves the grid box.
  {
    Vec2 x{r0, z0};
    double s = 0.0;
    const std::size_t n = static_cast<std::size_t>(std::ceil(s_max / dt - 1e-12));
    for (std::size_t k = 0; k < n; ++k) {
      const double h = std::min(s_max - s, dt);
      const Vec2 nx = rk4_step(q, x, h);
      if (std::fabs(nx.r) > q.grid.r_max() || std::fabs(nx.z) > q.grid.z_max()) {
        rep.exited_grid = true;
        break;
      }
      x = nx;
      s += h;
      rep.path.push_back({s, x.r, x.z});
    }
  }

  rep.lambda_path = std::numeric_limits<double>::infinity();
  double prev_norm = 0.0;
  for (const TrajectoryPoint& pt : rep.path) {
    if (!std::isfinite(pt.r) || !std::isfinite(pt.z)) {
      throw ConvergenceError("trajectory_integrate: non-finite path sample",
                             {pt.s});
    }
    const double xx = pt.r * pt.r + pt.z * pt.z;
    if (xx > 0.0) {
      const double qr = q.eval_r(pt.r, pt.z), qz = q.eval_z(pt.r, pt.z);
      rep.lambda_path = std::min(rep.lambda_path, (qr * pt.r + qz * pt.z) / xx);
    }
    const double nrm = std::sqrt(xx);
    if (pt.s <= 0.0 && rep.lambda_grid > 0.0) {
      // |X(s)| <= |x0| exp(lambda s) for s <= 0; small relative slack for
      // integrator and interpolation error.
      if (nrm > x0n * std::exp(rep.lambda_grid * pt.s) * (1.0 + 1e-6)) {
        rep.backward_bound_violated = true;
      }
    }
    if (pt.s > 0.0 && nrm < prev_norm * (1.0 - 1e-12)) rep.forward_monotone = false;
    prev_norm = nrm;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Asymptotics report.
// ---------------------------------------------------------------------------

const AsymptoticsRow& AsymptoticsReport::row(const std::string& name) const {
  for (const AsymptoticsRow& r : rows) {
    if (r.name == name) return r;
  }
  throw DomainError("AsymptoticsReport: no row named '" + name + "'");
}

AsymptoticsReport asymptotics_report(const ProfileResult& sol, const ModelParams& params,
                                     const TimeSeries* series) {
  AsymptoticsReport rep;
  rep.epsilon = params.epsilon;
  rep.converged_input =
      !sol.residual_history.empty() && sol.residual_history.back() <= 1e-6;

  const auto add = [&rep](const std::string& name, double value, double target) {
    AsymptoticsRow r;
    r.name = name;
    r.value = value;
    r.target = target;
    r.rel_dev = target == 0.0 ? (value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                              : (value - target) / std::fabs(target);
    rep.rows.push_back(r);
  };

  const double eps = params.epsilon;
  const double c_l = sol.scaling.c_l, c_w = sol.scaling.c_w;
  add("c_l", c_l, 64.0 / (9.0 * eps));
  add("c_w", c_w, -64.0 / (27.0 * eps));
  const double alpha_star = c_l == 0.0 ? 0.0 : -c_w / c_l;
  add("alpha_star", alpha_star, 1.0 / 3.0 + eps / 8.0);
  add("tail_p", sol.w.tail.p, params.alpha_hat);
  add("tail_A", sol.w.tail.A, -6.0);
  const double g = c_w + params.alpha * c_l;
  add("T_alpha", g < 0.0 ? -1.0 / g : std::numeric_limits<double>::infinity(), 0.125);
  if (series != nullptr) {
    const double c_x = fit_blowup_exponent(*series);
    add("c_x_leading", c_x, 8.0 / (9.0 * eps));
    const double gap = alpha_star - params.alpha;
    add("c_x_identity", c_x, gap == 0.0 ? std::numeric_limits<double>::infinity()
                                        : 1.0 / gap);
  }
  return rep;
}

}  // namespace blowuplab
