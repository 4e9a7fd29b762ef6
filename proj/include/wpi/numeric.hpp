#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace wpi::num {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log(exp(a) + exp(b)) without overflow; -inf inputs allowed.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Golden-section search for the maximum of f on [lo, hi]. Stops when the
// bracket is shorter than tol (absolute, in the units of the argument).
template <class F>
double golden_max(F&& f, double lo, double hi, double tol, double* fbest = nullptr) {
  constexpr double kR = 0.61803398874989484820;
  double x1 = hi - kR * (hi - lo);
  double x2 = lo + kR * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kR * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kR * (hi - lo);
      f1 = f(x1);
    }
  }
  double x = f1 > f2 ? x1 : x2;
  if (fbest) *fbest = std::max(f1, f2);
  return x;
}

template <class F>
double golden_min(F&& f, double lo, double hi, double tol, double* fbest = nullptr) {
  double fb = 0.0;
  double x = golden_max([&](double t) { return -f(t); }, lo, hi, tol, &fb);
  if (fbest) *fbest = -fb;
  return x;
}

// Largest x in [lo, hi] with pred(x) true, assuming pred is true then false.
// Caller checks pred(lo) beforehand.
template <class P>
double bisect_last_true(P&& pred, double lo, double hi, double tol) {
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// Smallest x in [lo, hi] with pred(x) true, assuming pred is false then true.
template <class P>
double bisect_first_true(P&& pred, double lo, double hi, double tol) {
  for (int it = 0; it < 300 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// Adaptive Simpson with combined absolute/relative tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-9, double rel_tol = 1e-9, int max_depth = 40);

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

template <class F>
double gauss_integrate(F&& f, double a, double b, const GaussRule& rule) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(c + h * rule.x[i]);
  return s * h;
}

std::vector<double> log_space(double lo, double hi, std::size_t n);
std::vector<double> lin_space(double lo, double hi, std::size_t n);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Seed of an independent stream for replica `index`: two splitmix64 rounds
// over seed xor (golden-ratio increment * (index + 1)).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& v);

}  // namespace wpi::num
