#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wpi {

// ---------------------------------------------------------------------------
// beta functions

// β(s) = a·1{s ≤ 1/cp}
struct StrongPI {
  double a = 1.0;
  double cp = 1.0;
};
// β(s) = c0·s^(-c1)
struct Polynomial {
  double c0 = 1.0;
  double c1 = 1.0;
};
// β(s) = eta0·exp(-eta1·s^eta2)
struct StretchedExp {
  double eta0 = 1.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
};
// β(s) = exp(-((log s - σ²/2)_+)² / (2σ²))
struct LognormalTail {
  double sigma = 1.0;
};

enum class Interpolation { LogLog, Linear };

// Grid values. Below the first node the first value is held; above the last
// node the declared tail exponent k gives β(s_N)(s/s_N)^(-k). A zero last
// value needs no exponent.
struct Tabulated {
  std::vector<double> s;
  std::vector<double> beta;
  std::optional<double> tail_exponent;
  Interpolation interp = Interpolation::LogLog;
};

// Opaque β given through log β(s) (may return -inf).
struct Callable {
  std::function<double(double)> log_fn;
  std::string label;
};

class BetaFn {
 public:
  using Variant = std::variant<StrongPI, Polynomial, StretchedExp, LognormalTail, Tabulated, Callable>;
  // log K*(v) as a function of log v, for compositions with a known conjugate.
  using LogConjugate = std::function<double(double)>;

  BetaFn();
  BetaFn(Variant v);  // NOLINT: implicit on purpose

  static BetaFn strong_pi(double a, double cp);
  static BetaFn polynomial(double c0, double c1);
  static BetaFn stretched_exp(double eta0, double eta1, double eta2);
  static BetaFn lognormal_tail(double sigma);
  static BetaFn tabulated(std::vector<double> s, std::vector<double> beta,
                          std::optional<double> tail_exponent,
                          Interpolation interp = Interpolation::LogLog);
  static BetaFn callable(std::function<double(double)> fn, std::string label = "callable");
  static BetaFn callable_log(std::function<double(double)> log_fn, std::string label = "callable");

  double operator()(double s) const;
  double log_value(double s) const;
  // β(0+), +inf when unbounded.
  double sup_value() const;

  const Variant& variant() const { return *v_; }
  std::string kind() const;
  bool has_closed_conjugate() const;

  const LogConjugate* conjugate_hint() const { return hint_.get(); }
  BetaFn with_conjugate_hint(LogConjugate hint) const;

  // factor·β
  BetaFn scaled(double factor) const;

 private:
  std::shared_ptr<const Variant> v_;
  std::shared_ptr<const LogConjugate> hint_;
};

// ---------------------------------------------------------------------------
// alpha functions

class AlphaFn {
 public:
  AlphaFn(std::function<double(double)> fn, double a);
  double operator()(double r) const;
  double a() const { return a_; }

 private:
  std::function<double(double)> fn_;
  double a_;
};

AlphaFn beta_to_alpha(const BetaFn& beta, double a = 1.0);
BetaFn alpha_to_beta(const AlphaFn& alpha);

// ---------------------------------------------------------------------------
// Φ functionals (finite vectors with weights pi)

struct OscSquared {};
struct TwoPNormSquared {
  double p = 2.0;
};
struct L2Squared {};
using PhiFunctional = std::variant<OscSquared, TwoPNormSquared, L2Squared>;

double phi_value(const PhiFunctional& phi, std::span<const double> f, std::span<const double> pi);
std::string phi_name(const PhiFunctional& phi);

// ---------------------------------------------------------------------------
// convex conjugate of K(u) = u·β(1/u)

struct ConjugateOptions {
  int grid_points = 2000;
  double golden_tol = 1e-10;
  double decades = 24.0;
};

double k_function(const BetaFn& beta, double u);
// log K*(e^lv) by grid search + golden refinement; +inf where K* is infinite.
double log_conjugate_numeric(const BetaFn& beta, double lv, const ConjugateOptions& opt = {});
// Closed form when known, else the composition hint, else numeric.
double log_conjugate(const BetaFn& beta, double lv, bool use_closed = true, bool use_hint = true);
double numeric_conjugate(const BetaFn& beta, double v);
double conjugate(const BetaFn& beta, double v);

// ---------------------------------------------------------------------------
// rate bound

enum class RateMode { Auto, Fa, Finf };

struct RateOptions {
  double a = 1.0;
  RateMode mode = RateMode::Auto;
  bool force_numeric = false;  // ignore closed forms
  bool use_hint = true;        // use a composition conjugate when attached
  double f_stop = 1e18;        // table ends once F exceeds this
  double t_cap = 1e5;          // or once log(a/x) exceeds this
};

class RateBound {
 public:
  explicit RateBound(BetaFn beta, RateOptions opt = {});

  const BetaFn& beta() const { return beta_; }
  const RateOptions& options() const { return opt_; }
  double a() const { return opt_.a; }
  bool uses_F_infinity() const { return finf_; }
  bool closed_form() const { return closed_; }
  // ∫_a^∞ dv/K*(v); +inf when divergent.
  double tail_integral() const { return tail_; }
  // sup{v : K*(v) < ∞}
  double v_max() const { return vmax_; }

  double kstar(double v) const;
  double F(double x) const;
  double F_inverse(double n) const;
  double log_F_inverse(double n) const;
  // min(a, F⁻¹(n)): what multiplies Φ(f) in the decay bound.
  double decay_bound(double n) const;
  // Same quantity as F, by adaptive Simpson on the conjugate directly.
  double F_quadrature(double x) const;

  std::size_t table_size() const { return t_.size(); }

 private:
  double h(double t) const;  // v/K*(v) at v = a·e^{-t}
  double log_h_direct(double t) const;
  void build_table();
  double interp_log_h(std::size_t i, double t) const;
  double cell_integral(std::size_t i, double t_end) const;
  double G_at(double t) const;  // ∫_{t_0}^{t} h using the table, any t
  double direct_integral(double t0, double t1) const;
  double F_of_t(double t) const;
  double t_of_F(double n) const;

  BetaFn beta_;
  RateOptions opt_;
  bool closed_ = false;
  bool finf_ = false;
  double tail_ = 0.0;
  double vmax_ = 0.0;
  double t_start_ = 0.0;  // log(a / min(a, vmax))
  // table over t = log(a/v)
  std::vector<double> t_, logh_, G_;
  std::vector<char> direct_cell_;  // interpolation failed the midpoint check
  std::size_t zero_idx_ = 0;  // node with t = t_start_
  double left_residual_ = 0.0;
};

// β̃(s) = c1·β(c2·s)
BetaFn rescale_beta(const BetaFn& beta, double c1, double c2);
RateBound rescale(const RateBound& rb, double c1, double c2);

// ---------------------------------------------------------------------------
// explicit families and alternatives

struct StretchedExpEnvelope {
  double eta = 0.0;     // constant used in u_v
  double C = 0.0;       // K*(v) ≥ C·v·log(1/v)^(-1/eta2) on (0, v0]
  double v0 = 0.0;
  double M = 0.0;       // F_a(v0)
  double A = 0.0;       // C(1+eta2)/eta2
  double gamma = 0.0;   // eta2/(1+eta2)
  double Cprime = 0.0;  // F⁻¹(n) ≤ C'·exp(-(A n)^gamma) for all n ≥ 0
  double envelope(double n) const;
  // exp(-(A(n-M))^gamma), valid for n ≥ M
  double burnin_envelope(double n) const;
};

StretchedExpEnvelope stretched_exp_envelope(const RateBound& rb, std::optional<double> eta = {});

struct StretchedExpRate {
  double numeric = 0.0;
  double envelope = 0.0;
};
StretchedExpRate stretched_exp_rate(const RateBound& rb, double n, const StretchedExpEnvelope& env);

// γ̃(n) = inf{r > 0 : (1 - 1/(α(r) ∨ 1))^n ≤ r}
double rockner_wang_rate(const AlphaFn& alpha, int n);

double l2_to_tv(const RateBound& rb, double phi_of_density, double n);

}  // namespace wpi
