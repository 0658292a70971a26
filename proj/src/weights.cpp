#include "blowuplab/weights.hpp"

#include <algorithm>
#include <cmath>

namespace blowuplab {

double weight_envelope(const WeightSpec& spec, double x) {
  if (spec.mu.size() != spec.b.size() || spec.mu.empty()) {
    throw DomainError("weight_envelope: mu and b must be non-empty and equal length");
  }
  if (spec.mu_ctr <= 0.0) throw DomainError("weight_envelope: mu_ctr must be positive");
  const double ax = std::abs(x);
  double best = 0.0;
  for (std::size_t i = 0; i < spec.mu.size(); ++i) {
    if (spec.mu[i] <= 0.0) throw DomainError("weight_envelope: mu entries must be positive");
    double piece;
    if (spec.b[i] == 0.0) {
      piece = 1.0 / spec.mu[i];
    } else {
      if (ax == 0.0) {
        // Negative powers blow up at the origin; the max is +inf there.
        return spec.b[i] < 0.0 ? std::numeric_limits<double>::infinity() : best;
      }
      piece = std::pow(ax, spec.b[i]) / spec.mu[i];
    }
    best = std::max(best, piece);
  }
  return best / spec.mu_ctr;
}

double log_weight_one(const ModelParams& p, double x) {
  return (9.0 / p.kappa1) * std::pow(bracket(x), -p.kappa1 * p.epsilon);
}

double weight_one_normalized(const ModelParams& p, double x) {
  // exp((9/kappa1)(<x>^(-kappa1 eps) - 1)) with expm1 for the tiny exponent:
  // kappa1*eps ~ 1e-6, so <x>^(-kappa1 eps) - 1 = expm1(-kappa1 eps log<x>).
  const double t = std::expm1(-p.kappa1 * p.epsilon * std::log(bracket(x)));
  return std::exp((9.0 / p.kappa1) * t);
}

double j_surrogate(const ModelParams& p, double x) {
  const double e = p.hat_eps_beta;
  return 6.0 * (-std::expm1(-e * std::log(bracket(x)))) / e;
}

double j_surrogate_bracket(const ModelParams& p, double x) {
  const double j = j_surrogate(p, x);
  return std::sqrt(1.0 + j * j);
}

double weight_gamma(const ModelParams& p, double x) {
  const double ax = std::abs(x);
  const double head = std::pow(ax, 1.0 - p.kappa_O) + 1.0;  // +inf at x = 0 is intended
  const double mid = std::pow(bracket(x), -p.eps2);
  const double tail = std::pow(j_surrogate_bracket(p, x), -p.kappa);
  return head * mid * tail;
}

double weight_axis_guard(const ModelParams& p, double r, double z) {
  if (r < 0.0) throw DomainError("weight_axis_guard: r must be >= 0");
  const double bz = bracket(z);
  return std::pow(bz / (r + bz), p.kappa_ag);
}

double weight_m(const ModelParams& p, double x) {
  const double ax = std::abs(x);
  return std::pow(ax, -p.kappa_O) + std::pow(ax, p.alpha_phi);
}

double weighted_rel_sup(const std::vector<double>& weights, const double* a,
                        const double* b, std::size_t n) {
  if (weights.size() != n) throw DomainError("weighted_rel_sup: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num = std::max(num, std::abs(a[i] - b[i]) * weights[i]);
    den = std::max(den, std::abs(b[i]) * weights[i]);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace blowuplab
