#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "wpi/oracle.hpp"
#include "wpi/rate_core.hpp"
#include "wpi/weights.hpp"

namespace wpi {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Independent Metropolis-Hastings

// π = Exp(a1), q = Exp(a2) on (0,∞)
struct ExpExp {
  double a1 = 1.0;
  double a2 = 2.0;
};
// π(x) = b1 x^-(1+b1), q(x) = b2 x^-(1+b2) on [1,∞)
struct PolyPoly {
  double b1 = 1.0;
  double b2 = 2.0;
};
struct CustomIMH {
  std::function<double(double)> log_target;  // up to a constant
  std::function<double(double)> log_proposal;
  std::function<double(Rng&)> sample_proposal;
  std::optional<double> tail_exponent;  // for extrapolating the tabulated β
  long mc_draws = 1000000;
  std::uint64_t seed = 1;
};
using IMHSpec = std::variant<ExpExp, PolyPoly, CustomIMH>;

void validate(const IMHSpec& spec);
// e with β(s) ≤ s^-e; absent for Custom
std::optional<double> imh_exponent(const IMHSpec& spec);

// ½[1 - (1 - s^-e)²] for the closed families, s ≥ 1
double imh_beta(const IMHSpec& spec, double s);
// The same set computed with the normalised weight w = π/q. For ExpExp this
// is ½[1 - (1 - (a2 s/a1)^-e)²], never above imh_beta.
double imh_beta_exact(const IMHSpec& spec, double s);

struct McValue {
  double value = 0.0;
  double se = 0.0;
};
// ½π⊗π(A(s)ᶜ) = ½[1 - π(w ≤ s)²], π(w ≤ s) by self-normalised importance
// sampling from q. One draw set is shared across the grid.
std::vector<McValue> imh_beta_mc(const CustomIMH& spec, const std::vector<double>& s_grid);

BetaFn imh_beta_fn(const IMHSpec& spec);
RateBound imh_rate(const IMHSpec& spec);

double imh_log_weight(const IMHSpec& spec, double x);
double imh_sample_proposal(const IMHSpec& spec, Rng& rng);
// exact draw from π; unavailable for Custom
double imh_sample_target(const IMHSpec& spec, Rng& rng);

struct Trajectory {
  std::vector<double> x;
  std::vector<double> w;  // pseudo-marginal weights, empty otherwise
  long accepted = 0;
  long nonfinite = 0;  // proposals rejected for a nonfinite log-density
};

Trajectory imh_sample(const IMHSpec& spec, double x0, long n_steps, std::uint64_t seed);
// one IMH transition
double imh_step(const IMHSpec& spec, double x, Rng& rng, bool* accepted = nullptr, bool* nonfinite = nullptr);

// ---------------------------------------------------------------------------
// pseudo-marginal

struct PMSpec {
  std::variant<double, BetaFn> marginal = 1.0;  // C_P, or β of the marginal chain
  WeightModel weights = LognormalWeights{};
  PhiFunctional phi = OscSquared{};
  TailOptions tail;
};

double pm_beta_prime(const PMSpec& spec, double s);
BetaFn pm_beta(const PMSpec& spec);
// true when the weights are bounded and the marginal has a strong PI
bool pm_bounded_shortcut(const PMSpec& spec);
RateBound pm_rate(const PMSpec& spec, RateOptions opt = {});

// Metropolis-Hastings on a state carried as a double.
struct MHModel {
  std::function<double(double)> log_target;
  std::function<double(double, Rng&)> propose;
  // log q(y,x) - log q(x,y); zero for symmetric proposals
  std::function<double(double, double)> log_q_ratio;
};

// finite-state target pi with the uniform "jump elsewhere" proposal
MHModel finite_mh_model(std::vector<double> pi);

using WeightSampler = std::function<double(double, Rng&)>;
WeightSampler weight_sampler(const WeightModel& model);

// Proposals and acceptance use stream 0 of seed, weights stream 1, so W ≡ 1
// reproduces mh_sample exactly.
Trajectory mh_sample(const MHModel& model, double x0, long n_steps, std::uint64_t seed);
Trajectory pm_sample(const MHModel& model, const WeightSampler& weights, double x0, double w0, long n_steps,
                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// decay estimation

struct DecayEstimate {
  std::vector<double> n;
  std::vector<double> estimate;
  std::vector<double> se;
  std::vector<double> bound;  // filled by attach_bound
  long replicas = 0;
  long inner = 0;
};

struct DecayOptions {
  std::vector<int> n_grid;
  long replicas = 500;  // outer draws from π
  long inner = 20;      // forward paths per outer draw
  std::uint64_t seed = 1;
  int threads = 1;
};

// ‖Pⁿf‖² with f centred: unbiased pair estimator of (Pⁿf(x))² averaged over
// x ~ π. f must already be centred.
DecayEstimate estimate_decay(const std::function<double(double, Rng&)>& step,
                             const std::function<double(Rng&)>& sample_pi, const std::function<double(double)>& f,
                             const DecayOptions& opt);
// exact, by matrix powering
DecayEstimate estimate_decay_exact(const FiniteChain& chain, const Eigen::VectorXd& f, const std::vector<int>& n_grid);

void attach_bound(DecayEstimate& est, const RateBound& rb, double phi_f);
void write_csv(std::ostream& os, const DecayEstimate& est);

}  // namespace wpi
