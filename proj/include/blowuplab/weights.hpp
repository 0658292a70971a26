#pragma once
// Weight functions for the weighted sup norms used by the solver metrics and
// diagnostics. Conventions:
//  * <x> = sqrt(1 + |x|^2).
//  * The slow weight phi_one formally equals exp((9/kappa1) <x>^(-kappa1 eps))
//    with kappa1 ~ 3.7e-5, so phi_one(0) = exp(9/kappa1) ~ e^245191 — far
//    beyond double range. It is therefore exposed (a) in log form and (b)
//    origin-normalized, phi_one(x)/phi_one(0) in (0, 1]; every use here is a
//    relative weighted norm, which the normalization leaves unchanged.

#include <vector>

#include "blowuplab/common.hpp"
#include "blowuplab/model_params.hpp"

namespace blowuplab {

struct WeightSpec {
  // Piecewise-power envelope family: max_i mu_i^-1 |x|^(b_i).
  std::vector<double> mu = {1.0, 4.0, 30.0};
  std::vector<double> b = {-1.2, -0.5, 0.0};
  double mu_ctr = 1.0;  // scale of the centre piece (default 1)
};

// Envelope weight phi_ne(x) = mu_ctr^-1 max_i mu_i^-1 |x|^(b_i).
double weight_envelope(const WeightSpec& spec, double x);

// log phi_one(x) = (9/kappa1) <x>^(-kappa1 eps).
double log_weight_one(const ModelParams& p, double x);

// phi_one(x)/phi_one(0) = exp((9/kappa1)(<x>^(-kappa1 eps) - 1)).
double weight_one_normalized(const ModelParams& p, double x);

// Smoothed fractional-moment surrogate: J_s(x) = 6 (1 - <x>^(-e)) / e with
// e = hat_eps_beta, and <J_s> = sqrt(1 + J_s^2).
double j_surrogate(const ModelParams& p, double x);
double j_surrogate_bracket(const ModelParams& p, double x);

// Singular-origin weight Gamma(x) = (|x|^(1-kappa_O) + 1) <x>^(-eps2) <J_s>^(-kappa).
double weight_gamma(const ModelParams& p, double x);

// Axis guard in the half plane: (<z> / (r + <z>))^kappa_ag.
double weight_axis_guard(const ModelParams& p, double r, double z);

// Two-piece power weight phi_M(x) = |x|^(-kappa_O) + |x|^(alpha_phi).
double weight_m(const ModelParams& p, double x);

// Weighted relative sup distance max_i |a_i - b_i| w_i / max_i |b_i| w_i.
double weighted_rel_sup(const std::vector<double>& weights, const double* a,
                        const double* b, std::size_t n);

}  // namespace blowuplab
