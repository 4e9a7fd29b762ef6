#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wpi/rate_core.hpp"

namespace wpi {

enum class TSelector { P, PstarP, P2 };

class FiniteChain {
 public:
  // pi is computed from P when omitted.
  explicit FiniteChain(Eigen::MatrixXd P, std::optional<Eigen::VectorXd> pi = {});

  const Eigen::MatrixXd& P() const { return P_; }
  const Eigen::VectorXd& pi() const { return pi_; }
  int size() const { return static_cast<int>(pi_.size()); }
  bool reversible() const { return reversible_; }

  // P* = D⁻¹PᵀD
  Eigen::MatrixXd adjoint() const;
  Eigen::MatrixXd T(TSelector sel) const;

  // eigenvalues of the π-symmetrised P, ascending (reversible chains only)
  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  // columns: eigenvectors orthonormal in L²(π)
  const Eigen::MatrixXd& eigenvectors() const { return evecs_; }
  double lambda_min() const { return evals_(0); }
  double c_gap() const { return 1.0 + evals_(0); }
  bool positive(double tol = 1e-12) const { return evals_(0) >= -tol; }
  // smallest nonzero eigenvalue of Id - T (π-symmetrised)
  double spectral_gap(TSelector sel) const;

  Eigen::VectorXd center(const Eigen::VectorXd& f) const;
  double norm_sq(const Eigen::VectorXd& f) const;  // ‖f - π(f)‖²

 private:
  Eigen::MatrixXd P_;
  Eigen::VectorXd pi_;
  bool reversible_ = false;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
};

// symmetric random weights, P_ij ∝ w_ij; kind "lazy" mixes with the identity,
// "square" returns Q², "plain" leaves Q as is.
FiniteChain random_reversible_chain(int d, std::uint64_t seed, const std::string& kind = "plain");

double dirichlet_form(const FiniteChain& chain, TSelector sel, const Eigen::VectorXd& f);
// ‖Pⁿ(f - π(f))‖², spectral for reversible chains; n may be fractional there.
double exact_decay(const FiniteChain& chain, const Eigen::VectorXd& f, double n);
// repeated multiplication; integer n
double exact_decay_power(const FiniteChain& chain, const Eigen::VectorXd& f, int n);

// sup over f with Φ(f) > 0 of (‖f‖² - s·E(T,f))/Φ(f), clamped at 0.
struct SharpestResult {
  double value = 0.0;
  Eigen::VectorXd maximiser;
};
SharpestResult sharpest_beta_full(const FiniteChain& chain, TSelector sel, const PhiFunctional& phi, double s,
                                  std::uint64_t seed = 1);
double sharpest_beta(const FiniteChain& chain, TSelector sel, const PhiFunctional& phi, double s);

// sup ‖f‖²/Φ(f) over centred f
double phi_a_constant(const FiniteChain& chain, const PhiFunctional& phi);

struct TabulatedBeta {
  BetaFn beta;
  double a = 1.0;
  std::vector<double> s, values;
};
// β on an s-grid (a node near 0, then log-spaced up to where β vanishes);
// linear interpolation, valid since β is convex.
TabulatedBeta sharpest_beta_table(const FiniteChain& chain, TSelector sel, const PhiFunctional& phi,
                                  int points = 60);

// ---------------------------------------------------------------------------
// necessity

struct NecessityOptions {
  double t_decades = 6.0;
  int t_per_decade = 40;
  int n_dense = 2000;      // all integers 2..n_dense, then geometric
  double n_ratio = 1.005;  // geometric step beyond n_dense
  double n_cap_factor = 1000.0;
};

class NecessityBeta {
 public:
  explicit NecessityBeta(std::function<double(double)> gamma, NecessityOptions opt = {});
  // β1(s) = sup_{t≥s} inf_{n≥2} tⁿ/(t-1)^(n-1) (n-1)^(n-1)/nⁿ γ(n)
  double beta1(double s) const;
  // β2(s) = ½ sup_{t≥s} inf_{n≥2} γ(n) (t-1)/n exp(n/(t-1))
  double beta2(double s) const;

 private:
  double log_gamma(double n) const;
  std::vector<double> candidates(double t) const;
  double log_inner(double t, bool first) const;
  double sup_over_t(double s, bool first) const;
  NecessityOptions opt_;
  std::function<double(double)> gamma_;
  mutable std::unordered_map<double, double> cache_;
};

double necessity_beta(const std::function<double(double)>& gamma, double s, const NecessityOptions& opt = {});

// γ = F_∞⁻¹ of Polynomial(1, c1) → β1 on a log grid of [2, 1e5] → Tabulated β
// → F_a⁻¹, whose log-log slope over n ∈ [1e3, 1e5] should return -c1.
struct NecessityRoundTrip {
  std::vector<double> s, beta1, beta2, e_gamma_floor;
  double exponent = 0.0;    // fitted, compare with c1
  bool bounds_hold = true;  // β1 ≤ β2 everywhere, β1(s) ≤ e·γ(⌊s⌋) for s ≥ 5
};
NecessityRoundTrip necessity_round_trip(double c1, int s_points = 36, const NecessityOptions& opt = {});

// ---------------------------------------------------------------------------
// checking the decay bound on finite chains

enum class VerifyRoute { Auto, Direct, PositiveDirect, SpectralGap, WeaklyLazy };
std::string route_name(VerifyRoute r);

struct VerifyOptions {
  VerifyRoute route = VerifyRoute::Auto;
  int n_max = 200;
  int random_f = 20;
  std::uint64_t seed = 1;
  double beta_scale = 1.0;  // < 1 corrupts β on purpose
  int beta_points = 60;
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
};

struct Counterexample {
  Eigen::VectorXd f;
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct VerifyReport {
  VerifyRoute route = VerifyRoute::Auto;
  double a = 1.0;
  long checks = 0;
  long violations = 0;
  double worst_ratio = 0.0;  // max of lhs / (rhs(1+rel) + abs); above 1 is a violation
  std::optional<Counterexample> counterexample;
};

VerifyReport verify_decay_bound(const FiniteChain& chain, const PhiFunctional& phi, const VerifyOptions& opt = {});
// one report per chain; chain i uses the seed stream i. threads <= 0: all cores.
std::vector<VerifyReport> verify_battery(const std::vector<FiniteChain>& chains, const PhiFunctional& phi,
                                         const VerifyOptions& opt = {}, int threads = 0);

}  // namespace wpi
