#pragma once
// Model constants for the axisymmetric blowup laboratory.
//
// Everything downstream (1D kernels, the 5D Biot-Savart constant, weight
// exponents, rescaling bands) is a function of the single parameter
// alpha in (0, 1/3]; derive_params computes the full derived set once and the
// rest of the library passes the struct around.

#include <string>

#include <json.hpp>

#include "blowuplab/common.hpp"

namespace blowuplab {

struct ModelParams {
  // Primary knob and its distance to the critical value 1/3.
  double alpha = 0.0;
  double epsilon = 0.0;  // 1/3 - alpha

  // Universal constants of the far-field/weight construction.
  double c_far = 0.0;     // 2^(4/3) - 2/3
  double kappa = 0.0;     // (c_far + 2) / 4
  double kappa1 = 0.0;    // (1 - kappa) / 1000
  double kappa_ag = 0.0;  // 1/1000, exponent of the axis-guard weight
  double kappa_O = 0.0;   // 1.2, origin exponent of the 2D weights
  double eps2 = 0.0;      // kappa1 * epsilon (c_Wbar = 0 convention)

  // Stream-function constants of the 5D Biot-Savart law.
  double kappa_psi2 = 0.0;  // integral_0^inf s^(2+alpha) (s^2+1)^(-5/2) ds
  double kappa_psi1 = 0.0;  // alpha / (3 kappa_psi2)
  double kappa_psi = 0.0;   // 8 kappa_psi1

  // Asymptotic exponents used by the initial guess and the tail checks.
  double alpha_hat = 0.0;     // 1/3 + epsilon/8, leading tail exponent
  double hat_eps_beta = 0.0;  // (9/8) epsilon, gap between tail exponents
  double alpha_phi = 0.0;     // (1/3 + alpha_hat)/2, far-field weight power
};

// Numerical evaluation of kappa_psi2(alpha) (adaptive quadrature; the Beta
// closed form 0.5*B((3+alpha)/2, (2-alpha)/2) serves as oracle in tests).
double kappa_psi2_integral(double alpha);

// Full derived parameter set. Throws DomainError unless 0 < alpha <= 1/3.
ModelParams derive_params(double alpha);

// JSON (de)serialization; round-trips every field to the exact double.
void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

std::string params_to_json_string(const ModelParams& p);
ModelParams params_from_json_string(const std::string& s);

}  // namespace blowuplab
