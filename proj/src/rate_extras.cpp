#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wpi/numeric.hpp"
#include "wpi/rate_core.hpp"

namespace wpi {

double StretchedExpEnvelope::envelope(double n) const { return Cprime * std::exp(-std::pow(A * n, gamma)); }

double StretchedExpEnvelope::burnin_envelope(double n) const {
  if (n < M) throw std::domain_error("burnin_envelope: n must be at least M");
  return std::exp(-std::pow(A * (n - M), gamma));
}

StretchedExpEnvelope stretched_exp_envelope(const RateBound& rb, std::optional<double> eta) {
  const auto* se = std::get_if<StretchedExp>(&rb.beta().variant());
  if (!se) throw std::invalid_argument("stretched_exp_envelope: beta is not StretchedExp");
  StretchedExpEnvelope env;
  env.eta = eta.value_or(0.5 * se->eta1);
  if (!(env.eta > 0.0 && env.eta < se->eta1)) throw std::domain_error("stretched_exp_envelope: eta must lie in (0, eta1)");
  const double e2 = se->eta2;
  // With u_v = ((1/η)log(1/v))^(-1/η2):
  //   K*(v) ≥ η^(1/η2) v L^(-1/η2) - η0 v^(η1/η),   L = log(1/v).
  // Keep v small enough that the second term is at most half the first.
  auto excess = [&](double lv) {
    double L = -lv;
    return std::log(se->eta0) - std::log(env.eta) / e2 + std::log(L) / e2 + (se->eta1 / env.eta - 1.0) * lv;
  };
  double lv_hi = std::min({std::log(rb.a()), -1.0 / e2, -1e-9});
  double target = std::log(0.5);
  double lv0;
  if (excess(lv_hi) <= target) {
    lv0 = lv_hi;
  } else {
    lv0 = num::bisect_last_true([&](double lv) { return excess(lv) <= target; }, -700.0, lv_hi, 1e-12);
  }
  env.v0 = std::exp(lv0);
  env.C = 0.5 * std::pow(env.eta, 1.0 / e2);
  env.M = rb.uses_F_infinity() ? rb.F(env.v0) - rb.tail_integral() : rb.F(env.v0);
  env.A = env.C * (1.0 + e2) / e2;
  env.gamma = e2 / (1.0 + e2);
  // Subadditivity of x^γ: (A n)^γ ≤ (A(n-M))^γ + (A M)^γ.
  env.Cprime = std::max(1.0, rb.a()) * std::exp(std::pow(env.A * env.M, env.gamma));
  return env;
}

StretchedExpRate stretched_exp_rate(const RateBound& rb, double n, const StretchedExpEnvelope& env) {
  if (!std::holds_alternative<StretchedExp>(rb.beta().variant()))
    throw std::invalid_argument("stretched_exp_rate: beta is not StretchedExp");
  return {rb.decay_bound(n), env.envelope(n)};
}

double rockner_wang_rate(const AlphaFn& alpha, int n) {
  if (n < 1) throw std::domain_error("rockner_wang_rate: n must be at least 1");
  auto pred = [&](double lr) {
    double al = std::max(1.0, alpha(std::exp(lr)));
    double q = 1.0 - 1.0 / al;
    return n * std::log(q) <= lr;
  };
  const double lo = -690.0, hi = std::log(alpha.a());
  if (pred(lo)) return 0.0;
  return std::exp(num::bisect_first_true(pred, lo, hi, 1e-13));
}

double l2_to_tv(const RateBound& rb, double phi_of_density, double n) {
  if (phi_of_density < 0.0) throw std::domain_error("l2_to_tv: phi must be nonnegative");
  if (phi_of_density == 0.0) return 0.0;
  return std::sqrt(phi_of_density * rb.decay_bound(n));
}

}  // namespace wpi
