#include "wpi/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wpi/comparison.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

using num::kInf;

double LognormalWeights::effective_sigma() const {
  if (sigma0_sq && N) {
    if (!(*sigma0_sq > 0.0) || !(*N > 0.0)) throw std::domain_error("lognormal: sigma0_sq and N must be positive");
    return std::sqrt(*sigma0_sq / *N);
  }
  return sigma;
}

// ---------------------------------------------------------------------------

double mz_constant(int k) {
  if (k < 2) throw std::domain_error("mz_constant: k must be at least 2");
  if (k == 2) return 1.0;
  return std::pow(k - 1.0, 0.5 * k);
}

double averaged_moment_bound(const std::vector<double>& m, int N, int p, const std::vector<double>& bk) {
  if (p < 2) throw std::domain_error("averaged_moment_bound: p must be at least 2");
  if (N < 1) throw std::domain_error("averaged_moment_bound: N must be at least 1");
  if (m.size() < static_cast<std::size_t>(p - 1))
    throw std::invalid_argument("averaged_moment_bound: need E|W-1|^k for every k = 2..p");
  double acc = 1.0;
  double binom = p;  // C(p, k), built up from C(p, 1)
  for (int k = 2; k <= p; ++k) {
    binom = binom * (p - k + 1) / k;
    double B = k == 2 ? 1.0 : (bk.size() > static_cast<std::size_t>(k - 2) ? bk[k - 2] : mz_constant(k));
    double mk = m[k - 2];
    if (!std::isfinite(mk) || mk < 0.0) throw std::invalid_argument("averaged_moment_bound: moments must be finite");
    acc += std::pow(static_cast<double>(N), -0.5 * k) * binom * B * mk;
  }
  return acc;
}

// ---------------------------------------------------------------------------

std::uint64_t stirling2(int m, int k) {
  if (m < 0 || k < 0 || m > 25) throw std::domain_error("stirling2: need 0 <= m <= 25");
  if (k > m) return 0;
  // S(n,j) = j S(n-1,j) + S(n-1,j-1)
  std::vector<std::uint64_t> row(m + 1, 0);
  row[0] = 1;
  for (int n = 1; n <= m; ++n) {
    for (int j = std::min(n, m); j >= 1; --j) row[j] = static_cast<std::uint64_t>(j) * row[j] + row[j - 1];
    row[0] = 0;
  }
  return row[k];
}

double falling_power(double N, int k) {
  double acc = 1.0;
  for (int i = 0; i < k; ++i) acc *= N - i;
  return acc;
}

double binomial_raw_moment(int N, double q, int m) {
  if (m == 0) return 1.0;
  double acc = 0.0;
  for (int k = 1; k <= m; ++k) acc += static_cast<double>(stirling2(m, k)) * falling_power(N, k) * std::pow(q, k);
  return acc;
}

AbcConstant abc_tail_constant(const std::function<double(int)>& ell_moment, int N, int p) {
  if (N < 1 || p < 1) throw std::domain_error("abc_tail_constant: N and p must be at least 1");
  AbcConstant out;
  const int m = p + 1;
  for (int k = 1; k <= m; ++k) {
    double Mj = ell_moment(k - m);
    double coef = static_cast<double>(stirling2(m, k)) * falling_power(N, k) * std::pow(static_cast<double>(N), -m);
    if (coef == 0.0) continue;
    if (!std::isfinite(Mj)) {
      out.finite = false;
      out.value = kInf;
      return out;
    }
    out.value += coef * Mj;
  }
  return out;
}

AbcConstant abc_tail_constant(const std::vector<double>& ell, const std::vector<double>& pi, int N, int p) {
  if (ell.size() != pi.size() || ell.empty()) throw std::invalid_argument("abc_tail_constant: size mismatch");
  return abc_tail_constant(
      [&](int j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ell.size(); ++i) {
          if (pi[i] == 0.0) continue;
          if (ell[i] <= 0.0) return j < 0 ? kInf : (j == 0 ? acc + pi[i] : acc);
          acc += pi[i] * std::pow(ell[i], j);
        }
        return acc;
      },
      N, p);
}

// ---------------------------------------------------------------------------

int product_required_N(int T, double alpha) {
  if (T < 1 || !(alpha > 0.0)) throw std::domain_error("product_required_N: need T >= 1 and alpha > 0");
  double aT = alpha * T;
  double x = aT + 0.5 + std::sqrt(aT);
  double r = std::round(x);
  if (std::fabs(x - r) <= 1e-12 * x) return static_cast<int>(r);
  return static_cast<int>(std::ceil(x));
}

double product_tail_bound(double mp_integral, int p, double s) {
  if (!(s > 0.0)) throw std::domain_error("product_tail_bound: s must be positive");
  if (p < 1) throw std::domain_error("product_tail_bound: p must be at least 1");
  if (!std::isfinite(mp_integral)) return kInf;
  return std::pow(s, 1.0 - p) * mp_integral;
}

bool product_integral_finite(double b, double k, double c, double l, double alpha) {
  if (!(c > 0.0) || !(alpha > 0.0) || b < 0.0) throw std::domain_error("product_integral_finite: bad parameters");
  if (b == 0.0 || l > k) return true;
  if (l < k) return false;
  return alpha > b / c;
}

double product_mp_integral(double b, double k, double c, double l, double alpha) {
  if (!product_integral_finite(b, k, c, l, alpha)) return kInf;
  auto log_num = [&](double x) { return b * std::pow(x, k) / alpha - c * std::pow(x, l); };
  auto log_den = [&](double x) { return -c * std::pow(x, l); };
  // integrate up to where both integrands are below e^-60 relative to their peak
  auto upper = [&](auto&& lf) {
    double peak = lf(0.0), x = 1.0;
    for (int i = 1; i <= 2000; ++i) peak = std::max(peak, lf(0.01 * i));
    while (lf(x) > peak - 60.0 || x < 1.0) x *= 1.5;
    for (int i = 0; i < 200 && lf(x) > peak - 60.0; ++i) x *= 1.5;
    return x;
  };
  double un = upper(log_num), ud = upper(log_den);
  double num = num::adaptive_simpson([&](double x) { return std::exp(log_num(x)); }, 0.0, un, 1e-14, 1e-12);
  double den = num::adaptive_simpson([&](double x) { return std::exp(log_den(x)); }, 0.0, ud, 1e-14, 1e-12);
  return num / den;
}

// ---------------------------------------------------------------------------

double lognormal_beta(double sigma, double s) { return BetaFn::lognormal_tail(sigma)(s); }

double lognormal_exact_tail(double sigma, double s) {
  if (!(sigma > 0.0) || !(s > 0.0)) throw std::domain_error("lognormal_exact_tail: sigma, s must be positive");
  double z = (std::log(s) - 0.5 * sigma * sigma) / sigma;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double sample_lognormal_weight(double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> g(-0.5 * sigma * sigma, sigma);
  return std::exp(g(rng));
}

double lambert_w(double x) {
  if (std::isnan(x) || x < 0.0) throw std::domain_error("lambert_w: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return kInf;
  double w;
  if (x > M_E) {
    double l = std::log(x);
    w = l - std::log(l);
  } else if (x < 0.25) {
    w = x - x * x + 1.5 * x * x * x;
  } else {
    double l = std::log1p(x);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  for (int it = 0; it < 100; ++it) {
    double dw;
    if (x > 1e100) {
      // Newton on w + log w - log x, no overflow
      double f = w + std::log(w) - std::log(x);
      dw = f / (1.0 + 1.0 / w);
    } else {
      double ew = std::exp(w);
      double f = w * ew - x;
      double wp1 = w + 1.0;
      dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    }
    w -= dw;
    if (std::fabs(dw) <= 1e-12 * std::fabs(w)) break;
  }
  return w;
}

LognormalFinv lognormal_Finv(double sigma, double cp, double n, double cap) {
  if (!(sigma > 0.0)) throw std::domain_error("lognormal_Finv: sigma must be positive");
  if (!(cp > 0.0 && cp <= 1.0)) throw std::domain_error("lognormal_Finv: C_P must lie in (0,1]");
  if (n < 0.0) throw std::domain_error("lognormal_Finv: n must be nonnegative");
  double s2 = sigma * sigma;
  double W = lambert_w(cp * n * s2 / (2.0 * std::exp(0.5 * s2)));
  LognormalFinv out;
  out.raw = 2.0 / cp * std::exp(-W * W / (2.0 * s2));
  out.capped = out.raw > cap;
  out.value = std::min(out.raw, cap);
  return out;
}

double lognormal_Finv_numeric(double sigma, double cp, double n) {
  if (!(cp > 0.0 && cp <= 1.0)) throw std::domain_error("lognormal_Finv_numeric: C_P must lie in (0,1]");
  RateBound rb(BetaFn::lognormal_tail(sigma), RateOptions{});
  return rb.F_inverse(cp * n) / cp;
}

double lognormal_H(double epsilon, double cp) {
  if (!(epsilon > 0.0) || !(cp > 0.0)) throw std::domain_error("lognormal_H: epsilon and C_P must be positive");
  return 2.0 * std::log(2.0 / (epsilon * epsilon * cp));
}

double lognormal_mixing_n(double epsilon, double sigma, double cp) {
  double H = lognormal_H(epsilon, cp);
  if (!(H > 0.0)) throw std::domain_error("lognormal_mixing_n: need epsilon^2 C_P < 2");
  double rH = std::sqrt(H);
  return 2.0 * rH / (cp * sigma) * std::exp(0.5 * sigma * sigma + rH * sigma);
}

double budget_log_cost(double H, double sigma) {
  double rH = std::sqrt(H);
  return std::log(rH) + 0.5 * sigma * sigma + sigma * rH - 3.0 * std::log(sigma);
}

BudgetReport budget_from_H(double H, double cp, double sigma0_sq) {
  if (!(H > 0.0)) throw std::domain_error("budget: H must be positive");
  if (!(cp > 0.0) || !(sigma0_sq > 0.0)) throw std::domain_error("budget: C_P and sigma0^2 must be positive");
  BudgetReport r;
  r.H = H;
  r.cp = cp;
  r.sigma0_sq = sigma0_sq;
  r.epsilon = std::sqrt(2.0 / cp * std::exp(-0.5 * H));
  r.sigma_star = 0.5 * (std::sqrt(H + 12.0) - std::sqrt(H));
  // B = n σ0²/σ², C = B C_P / (2σ0²) = n C_P / (2σ²)
  double C = std::exp(budget_log_cost(H, r.sigma_star));
  r.n_star = 2.0 * r.sigma_star * r.sigma_star * C / cp;
  r.N_star = sigma0_sq / (r.sigma_star * r.sigma_star);
  r.B_star = 2.0 * sigma0_sq * C / cp;
  {
    auto grid = num::log_space(1e-4, 10.0, 4001);
    std::size_t ib = 0;
    double best = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double v = budget_log_cost(H, grid[i]);
      if (v < best) {
        best = v;
        ib = i;
      }
    }
    double lo = grid[ib == 0 ? 0 : ib - 1], hi = grid[std::min(ib + 1, grid.size() - 1)];
    r.sigma_grid = num::golden_min([&](double s) { return budget_log_cost(H, s); }, lo, hi, 1e-12);
  }
  if (H >= 1.0) {
    r.has_simplified = true;
    r.sigma_bar = 3.0 / std::sqrt(H);
    r.N_bar = sigma0_sq * H / 9.0;
    r.n_bar = 2.0 * H / (3.0 * cp) * std::exp(4.5 / H + 3.0);
    r.n_bar_bound = 2.0 * H / (3.0 * cp) * std::exp(7.5);
    r.B_bar = 2.0 * sigma0_sq * H * H / (27.0 * cp) * std::exp(4.5 / H + 3.0);
    r.B_bar_bound = 2.0 * sigma0_sq * H * H / (27.0 * cp) * std::exp(7.5);
  }
  return r;
}

BudgetReport budget_split(double epsilon, double cp, double sigma0_sq) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::domain_error("budget_split: epsilon must lie in (0,1]");
  double H = lognormal_H(epsilon, cp);
  BudgetReport r = budget_from_H(H, cp, sigma0_sq);
  r.epsilon = epsilon;
  return r;
}

namespace {

// (1/b) ∫_{u0}^∞ (1+u) exp(u - a u²) du in closed form
double lambert_tail_integral(double a, double b, double u0) {
  double c = 1.0 / (2.0 * a);
  double ra = std::sqrt(a);
  double L = ra * (u0 - c);
  double gauss = 0.5 * std::sqrt(M_PI) * std::erfc(L);
  double pre = std::exp(1.0 / (4.0 * a));
  return pre / b * ((1.0 + c) / ra * gauss + 0.5 / a * std::exp(-L * L));
}

}  // namespace

double lognormal_vtilde(double sigma, double cp) {
  if (!(sigma > 0.0)) throw std::domain_error("lognormal_vtilde: sigma must be positive");
  if (!(cp > 0.0 && cp <= 1.0)) throw std::domain_error("lognormal_vtilde: C_P must lie in (0,1]");
  double a = 1.0 / (2.0 * sigma * sigma);
  double b = cp * sigma * sigma / (2.0 * std::exp(0.5 * sigma * sigma));
  double ra = std::sqrt(a);
  double gauss = 0.5 * std::sqrt(M_PI) * std::erfc(-0.5 / ra);
  return (std::exp(1.0 / (4.0 * a)) * (1.0 + 1.0 / (2.0 * a)) / ra * gauss + 1.0 / (2.0 * a)) / b;
}

AvarResult lognormal_avar_bound(double sigma, double cp) {
  AvarResult r;
  r.v_tilde = lognormal_vtilde(sigma, cp);
  r.normalized = r.v_tilde / (sigma * sigma);
  r.integral_path = 2.0 / cp * r.v_tilde;
  constexpr int kTerms = 100000;
  double acc = 0.0;
  for (int n = 1; n <= kTerms; ++n) acc += lognormal_Finv(sigma, cp, n, kInf).raw;
  // remaining terms are below the integral from kTerms on
  double a = 1.0 / (2.0 * sigma * sigma);
  double b = cp * sigma * sigma / (2.0 * std::exp(0.5 * sigma * sigma));
  acc += 2.0 / cp * lambert_tail_integral(a, b, lambert_w(b * kTerms));
  r.direct_sum = acc;
  return r;
}

double lognormal_sigma_star(double cp, double lo, double hi) {
  auto f = [cp](double s) { return std::log(lognormal_vtilde(s, cp) / (s * s)); };
  auto grid = num::lin_space(lo, hi, 291);
  std::size_t ib = 0;
  double best = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = f(grid[i]);
    if (v < best) {
      best = v;
      ib = i;
    }
  }
  double a = grid[ib == 0 ? 0 : ib - 1], b = grid[std::min(ib + 1, grid.size() - 1)];
  return num::golden_min(f, a, b, 1e-10);
}

// ---------------------------------------------------------------------------

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

BetaFn weight_tail_beta(const WeightModel& model, const TailOptions& opt) {
  BetaFn b = std::visit(
      Overloaded{
          [](const AveragedWeights& w) {
            // π̃(𝒲 ≥ s) ≤ E_Q[𝒲^p] s^-(p-1)
            double B = averaged_moment_bound(w.central_abs_moments, w.N, w.p, w.mz_constants);
            return BetaFn::polynomial(B, w.p - 1.0);
          },
          [](const AbcWeights& w) {
            AbcConstant c = abc_tail_constant(w.ell, w.pi, w.N, w.p);
            if (!c.finite) throw std::domain_error("ABC weights: negative moment diverges at this p; use p = 1");
            return BetaFn::polynomial(c.value, static_cast<double>(w.p));
          },
          [](const ProductWeights& w) {
            if (w.p < 2) throw std::domain_error("product weights: p must be at least 2");
            if (!std::isfinite(w.mp_integral)) throw std::domain_error("product weights: integral diverges");
            return BetaFn::polynomial(w.mp_integral, w.p - 1.0);
          },
          [](const LognormalWeights& w) { return BetaFn::lognormal_tail(w.effective_sigma()); },
          [](const BoundedWeights& w) {
            if (!(w.w_bar >= 1.0)) throw std::domain_error("bounded weights: w_bar must be at least 1");
            return BetaFn::strong_pi(1.0, 1.0 / w.w_bar);
          },
          [](const MomentWeights& w) {
            if (w.k < 1 || !(w.m > 0.0)) throw std::domain_error("moment weights: need k >= 1 and m > 0");
            return BetaFn::polynomial(w.m, static_cast<double>(w.k));
          },
          [](const GenericWeights& w) {
            auto tail = w.tail;
            return BetaFn::callable([tail](double s) { return std::min(1.0, tail(s)); }, w.label);
          },
      },
      model);
  if (opt.pair_factor != 1.0) b = b.scaled(opt.pair_factor);
  return b;
}

double weight_tail(const WeightModel& model, double s, const TailOptions& opt) {
  if (!(s > 0.0)) throw std::domain_error("weight_tail: s must be positive");
  return weight_tail_beta(model, opt)(s);
}

// ---------------------------------------------------------------------------

AsymptoticVariance asymptotic_variance_bound(const RateBound& rb, double phi_f, double l2_f_sq) {
  if (phi_f < 0.0 || l2_f_sq < 0.0) throw std::domain_error("asymptotic_variance_bound: inputs must be nonnegative");
  AsymptoticVariance out;
  if (const auto* sp = std::get_if<StrongPI>(&rb.beta().variant()); sp && rb.closed_form()) {
    // geometric: sum until the remaining tail is negligible, then bound it
    double q = std::exp(-sp->cp), acc = 0.0, term = 0.0;
    for (int n = 0;; ++n) {
      term = rb.decay_bound(n);
      acc += term;
      if (n > 0 && term * q / (1.0 - q) <= 1e-17 * acc) break;
    }
    out.rate_sum = acc + term * q / (1.0 - q);
  } else {
    constexpr int kTerms = 1000;
    double acc = 0.0;
    for (int n = 0; n <= kTerms; ++n) acc += rb.decay_bound(n);
    // Σ_{n>N} F⁻¹(n) ≤ ∫_N^∞ F⁻¹ = ∫_0^{x_N} x/K*(x) dx, x = x_N e^{-τ}
    double lx0 = rb.log_F_inverse(kTerms);
    const auto& o = rb.options();
    auto integrand = [&](double tau) {
      double lx = lx0 - tau;
      double lk = log_conjugate(rb.beta(), lx, !o.force_numeric, o.use_hint);
      return std::exp(2.0 * lx - lk);
    };
    double tail = 0.0, L = 0.0, len = 8.0;
    bool converged = false;
    while (L < 1e4) {
      // a summable rate needs the integrand to decay
      if (L > 0.0 && !(integrand(L + len) < integrand(L))) break;
      double inc = num::adaptive_simpson(integrand, L, L + len, 1e-300, 1e-10);
      tail += inc;
      L += len;
      len *= 2.0;
      if (!std::isfinite(tail)) break;
      if (inc <= 1e-12 * tail) {
        converged = true;
        break;
      }
    }
    if (!converged) return out;
    out.rate_sum = acc + tail;
  }
  out.finite = true;
  out.value = -l2_f_sq + 4.0 * phi_f * out.rate_sum;
  return out;
}

}  // namespace wpi
