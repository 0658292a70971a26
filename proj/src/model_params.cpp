#include "blowuplab/model_params.hpp"

#include <cmath>

#include "blowuplab/quadrature.hpp"

namespace blowuplab {

double kappa_psi2_integral(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw DomainError("kappa_psi2_integral: integral converges only for alpha in (0, 2), got " +
                      fmt_g17(alpha));
  }
  // Integrand ~ s^(2+alpha) near 0 (fractional-power endpoint behaviour, so
  // tanh-sinh) and ~ s^(alpha-3) at infinity (algebraic decay, so exp-sinh).
  const auto f = [alpha](double s) {
    return std::pow(s, 2.0 + alpha) * std::pow(s * s + 1.0, -2.5);
  };
  const double head = integrate_ts(f, 0.0, 4.0, 1e-13);
  const double tail = integrate_expsinh(f, 4.0, 1e-13);
  return head + tail;
}

ModelParams derive_params(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0 / 3.0)) {
    throw DomainError("derive_params: alpha must lie in (0, 1/3], got " + fmt_g17(alpha));
  }
  ModelParams p;
  p.alpha = alpha;
  p.epsilon = 1.0 / 3.0 - alpha;

  p.c_far = std::pow(2.0, 4.0 / 3.0) - 2.0 / 3.0;
  p.kappa = (p.c_far + 2.0) / 4.0;
  p.kappa1 = (1.0 - p.kappa) / 1000.0;
  p.kappa_ag = 1.0 / 1000.0;
  p.kappa_O = 1.2;
  p.eps2 = p.kappa1 * p.epsilon;

  p.kappa_psi2 = kappa_psi2_integral(alpha);
  p.kappa_psi1 = alpha / (3.0 * p.kappa_psi2);
  p.kappa_psi = 8.0 * p.kappa_psi1;

  p.alpha_hat = 1.0 / 3.0 + p.epsilon / 8.0;
  p.hat_eps_beta = 9.0 / 8.0 * p.epsilon;
  p.alpha_phi = 0.5 * (1.0 / 3.0 + p.alpha_hat);
  return p;
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"alpha", p.alpha},
                     {"epsilon", p.epsilon},
                     {"c_far", p.c_far},
                     {"kappa", p.kappa},
                     {"kappa1", p.kappa1},
                     {"kappa_ag", p.kappa_ag},
                     {"kappa_O", p.kappa_O},
                     {"eps2", p.eps2},
                     {"kappa_psi2", p.kappa_psi2},
                     {"kappa_psi1", p.kappa_psi1},
                     {"kappa_psi", p.kappa_psi},
                     {"alpha_hat", p.alpha_hat},
                     {"hat_eps_beta", p.hat_eps_beta},
                     {"alpha_phi", p.alpha_phi}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  j.at("alpha").get_to(p.alpha);
  j.at("epsilon").get_to(p.epsilon);
  j.at("c_far").get_to(p.c_far);
  j.at("kappa").get_to(p.kappa);
  j.at("kappa1").get_to(p.kappa1);
  j.at("kappa_ag").get_to(p.kappa_ag);
  j.at("kappa_O").get_to(p.kappa_O);
  j.at("eps2").get_to(p.eps2);
  j.at("kappa_psi2").get_to(p.kappa_psi2);
  j.at("kappa_psi1").get_to(p.kappa_psi1);
  j.at("kappa_psi").get_to(p.kappa_psi);
  j.at("alpha_hat").get_to(p.alpha_hat);
  j.at("hat_eps_beta").get_to(p.hat_eps_beta);
  j.at("alpha_phi").get_to(p.alpha_phi);
}

std::string params_to_json_string(const ModelParams& p) {
  nlohmann::json j = p;
  return j.dump(2);
}

ModelParams params_from_json_string(const std::string& s) {
  try {
    return nlohmann::json::parse(s).get<ModelParams>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("params_from_json_string: ") + e.what());
  }
}

}  // namespace blowuplab
