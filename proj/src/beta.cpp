#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wpi/numeric.hpp"
#include "wpi/rate_core.hpp"

namespace wpi {

using num::kInf;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void validate(const BetaFn::Variant& v) {
  std::visit(Overloaded{
                 [](const StrongPI& b) {
                   require(b.a > 0.0, "StrongPI: a must be positive");
                   require(b.cp > 0.0 && b.cp <= 1.0, "StrongPI: C_P must lie in (0,1]");
                 },
                 [](const Polynomial& b) {
                   require(b.c0 > 0.0 && b.c1 > 0.0, "Polynomial: c0, c1 must be positive");
                 },
                 [](const StretchedExp& b) {
                   require(b.eta0 > 0.0 && b.eta1 > 0.0 && b.eta2 > 0.0,
                           "StretchedExp: eta0, eta1, eta2 must be positive");
                 },
                 [](const LognormalTail& b) { require(b.sigma > 0.0, "LognormalTail: sigma must be positive"); },
                 [](const Tabulated& b) {
                   require(b.s.size() >= 2 && b.s.size() == b.beta.size(),
                           "Tabulated: need at least two (s, beta) pairs");
                   for (std::size_t i = 0; i < b.s.size(); ++i) {
                     require(std::isfinite(b.s[i]) && b.s[i] > 0.0, "Tabulated: s must be positive");
                     require(std::isfinite(b.beta[i]) && b.beta[i] >= 0.0,
                             "Tabulated: beta must be finite and nonnegative");
                     if (i > 0) {
                       require(b.s[i] > b.s[i - 1], "Tabulated: s grid must be strictly increasing");
                       require(b.beta[i] <= b.beta[i - 1], "Tabulated: beta grid must be decreasing");
                     }
                   }
                   if (b.tail_exponent) require(*b.tail_exponent > 0.0, "Tabulated: tail exponent must be positive");
                 },
                 [](const Callable& b) { require(static_cast<bool>(b.log_fn), "Callable: empty function"); },
             },
             v);
}

double tab_log_value(const Tabulated& t, double s) {
  const std::size_t n = t.s.size();
  if (s <= t.s[0]) return std::log(t.beta[0]);
  if (s >= t.s[n - 1]) {
    if (s == t.s[n - 1] || t.beta[n - 1] == 0.0) return std::log(t.beta[n - 1]);
    if (!t.tail_exponent)
      throw std::domain_error("Tabulated beta evaluated beyond its grid without a declared tail exponent");
    return std::log(t.beta[n - 1]) - *t.tail_exponent * std::log(s / t.s[n - 1]);
  }
  auto it = std::upper_bound(t.s.begin(), t.s.end(), s);
  std::size_t i = static_cast<std::size_t>(it - t.s.begin()) - 1;
  double s0 = t.s[i], s1 = t.s[i + 1], b0 = t.beta[i], b1 = t.beta[i + 1];
  if (t.interp == Interpolation::LogLog && b0 > 0.0 && b1 > 0.0) {
    double w = std::log(s / s0) / std::log(s1 / s0);
    return std::log(b0) + w * (std::log(b1) - std::log(b0));
  }
  double w = (s - s0) / (s1 - s0);
  return std::log(b0 + w * (b1 - b0));
}

}  // namespace

BetaFn::BetaFn() : BetaFn(Polynomial{}) {}

BetaFn::BetaFn(Variant v) {
  validate(v);
  v_ = std::make_shared<const Variant>(std::move(v));
}

BetaFn BetaFn::strong_pi(double a, double cp) { return BetaFn(StrongPI{a, cp}); }
BetaFn BetaFn::polynomial(double c0, double c1) { return BetaFn(Polynomial{c0, c1}); }
BetaFn BetaFn::stretched_exp(double eta0, double eta1, double eta2) {
  return BetaFn(StretchedExp{eta0, eta1, eta2});
}
BetaFn BetaFn::lognormal_tail(double sigma) { return BetaFn(LognormalTail{sigma}); }
BetaFn BetaFn::tabulated(std::vector<double> s, std::vector<double> beta, std::optional<double> tail_exponent,
                         Interpolation interp) {
  return BetaFn(Tabulated{std::move(s), std::move(beta), tail_exponent, interp});
}
BetaFn BetaFn::callable(std::function<double(double)> fn, std::string label) {
  auto f = std::move(fn);
  return BetaFn(Callable{[f](double s) { return std::log(f(s)); }, std::move(label)});
}
BetaFn BetaFn::callable_log(std::function<double(double)> log_fn, std::string label) {
  return BetaFn(Callable{std::move(log_fn), std::move(label)});
}

double BetaFn::log_value(double s) const {
  if (!(s > 0.0)) throw std::domain_error("beta evaluated at s <= 0");
  return std::visit(Overloaded{
                        [s](const StrongPI& b) { return s <= 1.0 / b.cp ? std::log(b.a) : -kInf; },
                        [s](const Polynomial& b) { return std::log(b.c0) - b.c1 * std::log(s); },
                        [s](const StretchedExp& b) { return std::log(b.eta0) - b.eta1 * std::pow(s, b.eta2); },
                        [s](const LognormalTail& b) {
                          double z = std::max(0.0, std::log(s) - 0.5 * b.sigma * b.sigma);
                          return -z * z / (2.0 * b.sigma * b.sigma);
                        },
                        [s](const Tabulated& b) { return tab_log_value(b, s); },
                        [s](const Callable& b) { return b.log_fn(s); },
                    },
                    *v_);
}

double BetaFn::operator()(double s) const { return std::exp(log_value(s)); }

double BetaFn::sup_value() const {
  return std::visit(Overloaded{
                        [](const StrongPI& b) { return b.a; },
                        [](const Polynomial&) { return kInf; },
                        [](const StretchedExp& b) { return b.eta0; },
                        [](const LognormalTail&) { return 1.0; },
                        [](const Tabulated& b) { return b.beta.front(); },
                        [](const Callable& b) { return std::exp(b.log_fn(1e-300)); },
                    },
                    *v_);
}

std::string BetaFn::kind() const {
  return std::visit(Overloaded{
                        [](const StrongPI&) { return std::string("strongpi"); },
                        [](const Polynomial&) { return std::string("polynomial"); },
                        [](const StretchedExp&) { return std::string("stretchedexp"); },
                        [](const LognormalTail&) { return std::string("lognormal"); },
                        [](const Tabulated&) { return std::string("tabulated"); },
                        [](const Callable& b) { return b.label; },
                    },
                    *v_);
}

bool BetaFn::has_closed_conjugate() const {
  return std::holds_alternative<StrongPI>(*v_) || std::holds_alternative<Polynomial>(*v_);
}

BetaFn BetaFn::with_conjugate_hint(LogConjugate hint) const {
  BetaFn out = *this;
  out.hint_ = std::make_shared<const LogConjugate>(std::move(hint));
  return out;
}

BetaFn BetaFn::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::domain_error("scaled: factor must be positive");
  BetaFn base = *this;
  double lf = std::log(factor);
  BetaFn out = callable_log([base, lf](double s) { return lf + base.log_value(s); }, "scaled(" + kind() + ")");
  // K_f = f·K, so K_f*(v) = f·K*(v/f)
  return out.with_conjugate_hint([base, lf](double lv) { return lf + log_conjugate(base, lv - lf); });
}

// ---------------------------------------------------------------------------

AlphaFn::AlphaFn(std::function<double(double)> fn, double a) : fn_(std::move(fn)), a_(a) {
  if (!(a > 0.0)) throw std::invalid_argument("AlphaFn: a must be positive");
}

double AlphaFn::operator()(double r) const {
  if (!(r > 0.0)) throw std::domain_error("alpha evaluated at r <= 0");
  if (r >= a_) return 0.0;
  return fn_(r);
}

AlphaFn beta_to_alpha(const BetaFn& beta, double a) {
  if (const auto* sp = std::get_if<StrongPI>(&beta.variant())) {
    StrongPI b = *sp;
    return AlphaFn([b](double r) { return r < b.a ? 1.0 / b.cp : 0.0; }, a);
  }
  if (const auto* pp = std::get_if<Polynomial>(&beta.variant())) {
    Polynomial b = *pp;
    return AlphaFn([b](double r) { return std::pow(b.c0 / r, 1.0 / b.c1); }, a);
  }
  return AlphaFn(
      [beta](double r) {
        double lr = std::log(r);
        auto pred = [&](double y) { return beta.log_value(std::exp(y)) <= lr; };
        if (pred(-700.0)) return 0.0;
        if (!pred(700.0)) return kInf;
        return std::exp(num::bisect_first_true(pred, -700.0, 700.0, 1e-14));
      },
      a);
}

BetaFn alpha_to_beta(const AlphaFn& alpha) {
  return BetaFn::callable_log(
      [alpha](double s) {
        auto pred = [&](double z) { return alpha(std::exp(z)) <= s; };
        const double lo = -745.0, hi = std::log(alpha.a());
        if (pred(lo)) return -kInf;
        return num::bisect_first_true(pred, lo, hi, 1e-14);
      },
      "alpha_to_beta");
}

// ---------------------------------------------------------------------------

double phi_value(const PhiFunctional& phi, std::span<const double> f, std::span<const double> pi) {
  if (f.size() != pi.size()) throw std::invalid_argument("phi_value: dimension mismatch");
  return std::visit(Overloaded{
                        [&](const OscSquared&) {
                          auto [lo, hi] = std::minmax_element(f.begin(), f.end());
                          double o = *hi - *lo;
                          return o * o;
                        },
                        [&](const TwoPNormSquared& t) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < f.size(); ++i) acc += pi[i] * std::pow(std::fabs(f[i]), 2.0 * t.p);
                          return 4.0 * std::pow(acc, 1.0 / t.p);
                        },
                        [&](const L2Squared&) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < f.size(); ++i) acc += pi[i] * f[i] * f[i];
                          return acc;
                        },
                    },
                    phi);
}

std::string phi_name(const PhiFunctional& phi) {
  return std::visit(Overloaded{
                        [](const OscSquared&) { return std::string("osc2"); },
                        [](const TwoPNormSquared&) { return std::string("2p-norm2"); },
                        [](const L2Squared&) { return std::string("l2"); },
                    },
                    phi);
}

}  // namespace wpi
