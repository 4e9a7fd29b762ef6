#include "wpi/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wpi/numeric.hpp"

namespace wpi {

using num::kInf;

BetaFn chain_strong(double cp, const BetaFn& beta_prime) {
  if (!(cp > 0.0 && cp <= 1.0)) throw std::domain_error("chain_strong: C_P must lie in (0,1]");
  return rescale_beta(beta_prime, 1.0 / cp, cp);
}

double chain_weak_log_value(const BetaFn& beta1, const BetaFn& beta2, double s, const ChainWeakOptions& opt) {
  if (!(s > 0.0)) throw std::domain_error("chain_weak: s must be positive");
  const double ls = std::log(s);
  // y = log s1
  auto obj = [&](double y) {
    return num::log_add_exp(y + beta2.log_value(std::exp(ls - y)), beta1.log_value(std::exp(y)));
  };
  const int n = opt.grid_points;
  const double step = (opt.log_s1_hi - opt.log_s1_lo) / (n - 1);
  double best = kInf;
  int ib = 0;
  for (int i = 0; i < n; ++i) {
    double v = obj(opt.log_s1_lo + step * i);
    if (v < best) {
      best = v;
      ib = i;
    }
  }
  if (best == -kInf) return best;
  double lo = opt.log_s1_lo + step * std::max(ib - 1, 0);
  double hi = opt.log_s1_lo + step * std::min(ib + 1, n - 1);
  double refined = kInf;
  num::golden_min(obj, lo, hi, opt.golden_tol, &refined);
  return std::min(best, refined);
}

BetaFn chain_weak(const BetaFn& beta1, const BetaFn& beta2, const ChainWeakOptions& opt) {
  BetaFn out = BetaFn::callable_log(
      [beta1, beta2, opt](double s) { return chain_weak_log_value(beta1, beta2, s, opt); },
      "chain_weak(" + beta1.kind() + "," + beta2.kind() + ")");
  return out.with_conjugate_hint(
      [beta1, beta2](double lv) { return log_conjugate(beta2, log_conjugate(beta1, lv)); });
}

BetaFn spectral_gap_correct(const BetaFn& beta, double c_gap) {
  if (!(c_gap > 0.0 && c_gap <= 1.0)) throw std::domain_error("spectral_gap_correct: c_gap must lie in (0,1]");
  return rescale_beta(beta, 1.0, c_gap);
}

BetaFn dirichlet_domination_beta(TailFn eps_tail, double p) {
  if (!(p > 1.0)) throw std::domain_error("dirichlet_domination_beta: p must exceed 1");
  double inv_q = std::isinf(p) ? 1.0 : (p - 1.0) / p;
  return BetaFn::callable_log(
      [tail = std::move(eps_tail), inv_q](double s) {
        double v = tail(s);
        if (v < 0.0 || v > 1.0 + 1e-12) throw std::domain_error("dirichlet_domination_beta: tail outside [0,1]");
        return inv_q * std::log(v);
      },
      "dirichlet_domination");
}

TailFn weakly_lazy_tail(std::vector<double> eps, std::vector<double> mass) {
  if (eps.size() != mass.size()) throw std::invalid_argument("weakly_lazy_tail: size mismatch");
  for (double e : eps)
    if (e < 0.0 || e > 1.0) throw std::domain_error("weakly_lazy_tail: eps must lie in [0,1]");
  return [eps = std::move(eps), mass = std::move(mass)](double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (eps[i] == 0.0 || 1.0 / eps[i] >= s) acc += mass[i];
    return std::min(acc, 1.0);
  };
}

BetaFn apply_links(const BetaFn& base, const std::vector<ChainLink>& links) {
  BetaFn cur = base;
  for (const auto& link : links) {
    if (const auto* l = std::get_if<StrongLink>(&link)) {
      cur = chain_strong(l->cp, cur);
    } else if (const auto* l = std::get_if<WeakLink>(&link)) {
      cur = chain_weak(cur, l->beta2);
    } else if (const auto* l = std::get_if<GapLink>(&link)) {
      cur = spectral_gap_correct(cur, l->c_gap);
    } else {
      const auto& lz = std::get<LazyLink>(link);
      cur = chain_weak(cur, dirichlet_domination_beta(weakly_lazy_tail(lz.eps, lz.mass), lz.p));
    }
  }
  return cur;
}

SequenceReport beta_sequence_limit(const std::function<BetaFn(double)>& family, const BetaFn& beta1,
                                   const std::vector<double>& iotas, const SequenceOptions& opt) {
  SequenceReport rep;
  rep.iotas = iotas;
  auto s_grid = num::log_space(opt.s_lo, opt.s_hi, opt.s_points);
  std::vector<double> n_grid{0.0};
  for (double n : num::log_space(1e-2, opt.n_hi, opt.n_points)) n_grid.push_back(n);
  RateOptions ro;
  ro.a = opt.a;
  ro.mode = RateMode::Fa;
  RateBound rb1(beta1, ro);
  std::vector<double> base;
  for (double n : n_grid) base.push_back(rb1.F_inverse(n));
  for (double iota : iotas) {
    BetaFn b2 = family(iota);
    for (double s : s_grid) {
      double v2 = b2(s), v1 = beta1(s);
      if (v2 < v1 * (1.0 - 1e-12) - 1e-15) {
        std::ostringstream msg;
        msg << "beta_sequence_limit: beta_2 < beta_1 at iota=" << iota << ", s=" << s;
        throw std::invalid_argument(msg.str());
      }
    }
    RateBound rb2(b2, ro);
    double gap = 0.0;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      double d = rb2.F_inverse(n_grid[i]) - base[i];
      if (d < -1e-9 * std::max(base[i], 1e-300)) rep.ordered = false;
      gap = std::max(gap, d);
    }
    if (!rep.gaps.empty() && gap > rep.gaps.back() * (1.0 + 1e-9) + 1e-15) rep.decreasing = false;
    rep.gaps.push_back(gap);
  }
  return rep;
}

}  // namespace wpi
