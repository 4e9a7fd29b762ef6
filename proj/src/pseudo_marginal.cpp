#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wpi/comparison.hpp"
#include "wpi/kernels.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

using num::kInf;

double pm_beta_prime(const PMSpec& spec, double s) {
  if (!(s > 0.0)) throw std::domain_error("pm_beta_prime: s must be positive");
  return weight_tail(spec.weights, s, spec.tail);
}

bool pm_bounded_shortcut(const PMSpec& spec) {
  return std::holds_alternative<BoundedWeights>(spec.weights) && std::holds_alternative<double>(spec.marginal);
}

BetaFn pm_beta(const PMSpec& spec) {
  if (pm_bounded_shortcut(spec)) {
    double cp = std::get<double>(spec.marginal);
    double wb = std::get<BoundedWeights>(spec.weights).w_bar;
    if (!(cp > 0.0 && cp <= 1.0)) throw std::domain_error("pm_rate: C_P must lie in (0,1]");
    if (!(wb >= 1.0)) throw std::domain_error("pm_rate: w_bar must be at least 1");
    return BetaFn::strong_pi(1.0, cp / wb);
  }
  BetaFn bp = weight_tail_beta(spec.weights, spec.tail);
  if (const auto* cp = std::get_if<double>(&spec.marginal)) return chain_strong(*cp, bp);
  return chain_weak(std::get<BetaFn>(spec.marginal), bp);
}

RateBound pm_rate(const PMSpec& spec, RateOptions opt) { return RateBound(pm_beta(spec), opt); }

MHModel finite_mh_model(std::vector<double> pi) {
  if (pi.size() < 2) throw std::invalid_argument("finite_mh_model: need at least two states");
  for (double p : pi)
    if (!(p > 0.0)) throw std::invalid_argument("finite_mh_model: pi must be positive");
  const int d = static_cast<int>(pi.size());
  MHModel m;
  m.log_target = [pi](double x) {
    int i = static_cast<int>(x);
    if (i < 0 || i >= static_cast<int>(pi.size()) || x != i) return -kInf;
    return std::log(pi[i]);
  };
  m.propose = [d](double x, Rng& rng) {
    int j = std::uniform_int_distribution<int>(0, d - 2)(rng);
    if (j >= static_cast<int>(x)) ++j;
    return static_cast<double>(j);
  };
  m.log_q_ratio = [](double, double) { return 0.0; };
  return m;
}

WeightSampler weight_sampler(const WeightModel& model) {
  if (const auto* l = std::get_if<LognormalWeights>(&model)) {
    double sigma = l->effective_sigma();
    return [sigma](double, Rng& rng) { return sample_lognormal_weight(sigma, rng); };
  }
  throw std::invalid_argument("weight_sampler: only lognormal weights are sampleable from their parameters");
}

namespace {

Trajectory run_mh(const MHModel& model, const WeightSampler* weights, double x0, double w0, long n_steps,
                  std::uint64_t seed) {
  if (!model.log_target || !model.propose) throw std::invalid_argument("mh_sample: incomplete model");
  if (n_steps < 0) throw std::invalid_argument("mh_sample: n_steps must be nonnegative");
  Rng moves = num::make_stream(seed, 0);
  Rng wrng = num::make_stream(seed, 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Trajectory tr;
  tr.x.reserve(n_steps + 1);
  tr.x.push_back(x0);
  if (weights) tr.w.push_back(w0);
  double x = x0, w = w0, lx = model.log_target(x0);
  for (long i = 0; i < n_steps; ++i) {
    double y = model.propose(x, moves);
    double u = unif(moves);
    double ly = model.log_target(y);
    double lq = model.log_q_ratio ? model.log_q_ratio(x, y) : 0.0;
    double wy = weights ? (*weights)(y, wrng) : 1.0;
    if (!(wy >= 0.0) || !std::isfinite(wy)) throw std::domain_error("pm_sample: weight must be finite and nonnegative");
    bool bad = std::isnan(ly) || ly == kInf || std::isnan(lq);
    if (bad) {
      ++tr.nonfinite;
    } else if (ly > -kInf && wy > 0.0) {
      double lr = ly - lx + lq;
      if (weights) lr += std::log(wy) - (w > 0.0 ? std::log(w) : -kInf);
      if (lx == -kInf || std::log(u) < lr) {
        x = y;
        lx = ly;
        w = wy;
        ++tr.accepted;
      }
    }
    tr.x.push_back(x);
    if (weights) tr.w.push_back(w);
  }
  return tr;
}

}  // namespace

Trajectory mh_sample(const MHModel& model, double x0, long n_steps, std::uint64_t seed) {
  return run_mh(model, nullptr, x0, 1.0, n_steps, seed);
}

Trajectory pm_sample(const MHModel& model, const WeightSampler& weights, double x0, double w0, long n_steps,
                     std::uint64_t seed) {
  if (!(w0 >= 0.0)) throw std::domain_error("pm_sample: w0 must be nonnegative");
  return run_mh(model, &weights, x0, w0, n_steps, seed);
}

}  // namespace wpi
