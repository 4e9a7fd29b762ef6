#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "wpi/rate_core.hpp"

namespace wpi {

// ---------------------------------------------------------------------------
// weight models

// Average of N i.i.d. mean-one weights. central_abs_moments[k-2] = E|W1 - 1|^k, k = 2..p.
struct AveragedWeights {
  std::vector<double> central_abs_moments;
  int N = 1;
  int p = 2;
  std::vector<double> mz_constants;  // optional B_k table indexed like the moments
};
// Bernoulli ABC weights on a finite set of states: ell[i] = ℓ_ABC(x_i), pi[i] = π(x_i).
struct AbcWeights {
  std::vector<double> ell, pi;
  int N = 1;
  int p = 1;
};
// Product of T averages; mp_integral = ∫π(dx) exp(M_p(x)/α).
struct ProductWeights {
  int T = 1;
  double alpha = 1.0;
  int p = 2;
  double mp_integral = 1.0;
};
// log W ~ N(-σ²/2, σ²); σ² = σ0²/N when sigma0_sq and N are given.
struct LognormalWeights {
  double sigma = 1.0;
  std::optional<double> sigma0_sq;
  std::optional<double> N;
  double effective_sigma() const;
};
struct BoundedWeights {
  double w_bar = 1.0;
};
// E_{π̃_x}|W|^k ≤ m uniformly in x.
struct MomentWeights {
  int k = 1;
  double m = 1.0;
};
// s ↦ ∫π̃_x(w ≥ s)π(dx) supplied directly.
struct GenericWeights {
  std::function<double(double)> tail;
  std::string label = "generic";
};

using WeightModel =
    std::variant<AveragedWeights, AbcWeights, ProductWeights, LognormalWeights, BoundedWeights, MomentWeights, GenericWeights>;

struct TailOptions {
  // The comparison proof bounds the mass of the pair set by twice the
  // one-sided tail; the ½ in the Dirichlet form absorbs it. Set to 2 to keep it.
  double pair_factor = 1.0;
};

// β′(s) = ∫π̃_x(w ≥ s)π(dx) (or its bound) as a BetaFn.
BetaFn weight_tail_beta(const WeightModel& model, const TailOptions& opt = {});
// The same, evaluated at one s.
double weight_tail(const WeightModel& model, double s, const TailOptions& opt = {});

// ---------------------------------------------------------------------------
// averaging

// Default B_k: 1 for k = 2, (k-1)^(k/2) above.
double mz_constant(int k);
double averaged_moment_bound(const std::vector<double>& central_abs_moments, int N, int p,
                             const std::vector<double>& mz_constants = {});

// ---------------------------------------------------------------------------
// ABC

std::uint64_t stirling2(int m, int k);
double falling_power(double N, int k);
// E[Bin(N,q)^m] = Σ_k S(m,k) N^(k) q^k
double binomial_raw_moment(int N, double q, int m);

struct AbcConstant {
  double value = 0.0;
  bool finite = true;
};
// C_{N,p} = Σ_k S(p+1,k) N^(k) N^-(p+1) M_{k-(p+1)},  M_j = ∫π ℓ^j.
AbcConstant abc_tail_constant(const std::function<double(int)>& ell_moment, int N, int p);
AbcConstant abc_tail_constant(const std::vector<double>& ell, const std::vector<double>& pi, int N, int p);

// ---------------------------------------------------------------------------
// products of averages

int product_required_N(int T, double alpha);
double product_tail_bound(double mp_integral, int p, double s);
// M_p(x) = b x^k, π ∝ exp(-c x^l) on (0,∞)
bool product_integral_finite(double b, double k, double c, double l, double alpha);
// ∫π(dx) exp(M_p(x)/α) by quadrature; +inf when the classifier says it diverges.
double product_mp_integral(double b, double k, double c, double l, double alpha);

// ---------------------------------------------------------------------------
// lognormal weights

double lognormal_beta(double sigma, double s);
// π̃_x(W ≥ s) = Φ̄((log s - σ²/2)/σ)
double lognormal_exact_tail(double sigma, double s);
// draw W ~ Q (mean one)
double sample_lognormal_weight(double sigma, std::mt19937_64& rng);

double lambert_w(double x);

struct LognormalFinv {
  double value = 0.0;  // min(raw, cap)
  double raw = 0.0;
  bool capped = false;
};
LognormalFinv lognormal_Finv(double sigma, double cp, double n, double cap = 1.0);
// (1/C_P)·F⁻¹(C_P n) with F built numerically from the lognormal β.
double lognormal_Finv_numeric(double sigma, double cp, double n);

double lognormal_H(double epsilon, double cp);
double lognormal_mixing_n(double epsilon, double sigma, double cp);

struct BudgetReport {
  double epsilon = 0.0;
  double H = 0.0;
  double cp = 1.0;
  double sigma0_sq = 1.0;
  // exact optimum
  double sigma_star = 0.0;
  double n_star = 0.0;
  double N_star = 0.0;
  double B_star = 0.0;
  double sigma_grid = 0.0;  // independent grid + golden minimiser of C(σ)
  // simplified choice σ = 3/√H, present when H ≥ 1
  bool has_simplified = false;
  double sigma_bar = 0.0;
  double N_bar = 0.0;
  double n_bar = 0.0;
  double n_bar_bound = 0.0;
  double B_bar = 0.0;
  double B_bar_bound = 0.0;
};
// log C(σ) with C(σ) = √H exp(σ²/2 + σ√H)/σ³
double budget_log_cost(double H, double sigma);
BudgetReport budget_from_H(double H, double cp, double sigma0_sq);
BudgetReport budget_split(double epsilon, double cp, double sigma0_sq);

struct AvarResult {
  double v_tilde = 0.0;
  double normalized = 0.0;   // ṽ/σ²
  double direct_sum = 0.0;   // Σ_{n≥1} raw lognormal_Finv(n), tail included
  double integral_path = 0.0;  // (2/C_P)ṽ
};
double lognormal_vtilde(double sigma, double cp);
AvarResult lognormal_avar_bound(double sigma, double cp);
double lognormal_sigma_star(double cp, double lo = 0.1, double hi = 3.0);

// ---------------------------------------------------------------------------
// asymptotic variance from a rate

struct AsymptoticVariance {
  bool finite = false;
  double value = 0.0;
  double rate_sum = 0.0;  // Σ_{n≥0} min(a, F⁻¹(n)), upper bound
};
AsymptoticVariance asymptotic_variance_bound(const RateBound& rb, double phi_f, double l2_f_sq);

}  // namespace wpi
