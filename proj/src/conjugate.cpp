#include <cmath>
#include <stdexcept>
#include <vector>

#include "wpi/numeric.hpp"
#include "wpi/rate_core.hpp"

namespace wpi {

using num::kInf;

double k_function(const BetaFn& beta, double u) {
  if (u < 0.0) throw std::domain_error("K(u) needs u >= 0");
  if (u == 0.0) return 0.0;
  return u * beta(1.0 / u);
}

double log_conjugate_numeric(const BetaFn& beta, double lv, const ConjugateOptions& opt) {
  if (lv == -kInf) return -kInf;
  // Work with y = log u and the ratio K*(v)/v = sup_u u(1 - β(1/u)/v).
  auto ratio = [&](double y) {
    double lb = beta.log_value(std::exp(-y));
    return std::exp(y) * (1.0 - std::exp(lb - lv));
  };
  // K⁻(v): the objective is negative once β(1/u) > v.
  auto below = [&](double y) { return beta.log_value(std::exp(-y)) <= lv; };
  constexpr double kEdge = 700.0;
  double y_lo, y_hi;
  if (!below(-kEdge)) return -kInf;  // v below every representable β value
  if (below(kEdge)) {
    // v ≥ sup β: unbounded unless v equals the supremum
    if (beta.log_value(std::exp(-kEdge)) < lv + std::log1p(-1e-12)) return kInf;
    y_hi = std::log(1e12);
    y_lo = -y_hi;
  } else {
    y_hi = num::bisect_last_true(below, -kEdge, kEdge, 1e-13);
    y_lo = y_hi - opt.decades * std::log(10.0);
  }
  const int n = opt.grid_points;
  double best = -kInf;
  int ibest = 0;
  double step = (y_hi - y_lo) / (n - 1);
  for (int i = 0; i < n; ++i) {
    double y = i + 1 == n ? y_hi : y_lo + step * i;
    double r = ratio(y);
    if (r > best) {
      best = r;
      ibest = i;
    }
  }
  double a = y_lo + step * std::max(ibest - 1, 0);
  double b = ibest + 1 >= n ? y_hi : y_lo + step * (ibest + 1);
  double refined = -kInf;
  num::golden_max(ratio, a, b, opt.golden_tol, &refined);
  best = std::max(best, refined);
  if (!(best > 0.0)) return -kInf;
  return lv + std::log(best);
}

double log_conjugate(const BetaFn& beta, double lv, bool use_closed, bool use_hint) {
  if (lv == -kInf) return -kInf;
  if (use_closed) {
    if (const auto* sp = std::get_if<StrongPI>(&beta.variant())) {
      // K*(v) = C_P v up to v = a, infinite beyond
      if (lv > std::log(sp->a)) return kInf;
      return std::log(sp->cp) + lv;
    }
    if (const auto* pp = std::get_if<Polynomial>(&beta.variant())) {
      double c0 = pp->c0, c1 = pp->c1;
      double logC = std::log(c0 * c1) - (1.0 + 1.0 / c1) * std::log(c0 * (1.0 + c1));
      return logC + (1.0 + 1.0 / c1) * lv;
    }
  }
  if (use_hint && beta.conjugate_hint()) return (*beta.conjugate_hint())(lv);
  return log_conjugate_numeric(beta, lv);
}

double numeric_conjugate(const BetaFn& beta, double v) {
  if (v < 0.0) throw std::domain_error("K*(v) needs v >= 0");
  return std::exp(log_conjugate_numeric(beta, std::log(v)));
}

double conjugate(const BetaFn& beta, double v) {
  if (v < 0.0) throw std::domain_error("K*(v) needs v >= 0");
  return std::exp(log_conjugate(beta, std::log(v)));
}

}  // namespace wpi
