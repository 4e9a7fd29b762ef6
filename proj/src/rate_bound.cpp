#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wpi/numeric.hpp"
#include "wpi/rate_core.hpp"

namespace wpi {

using num::kInf;

namespace {

constexpr int kGaussPoints = 8;

double poly_ctilde(const Polynomial& p) {
  return std::pow(1.0 + p.c1, 1.0 + 1.0 / p.c1) * std::pow(p.c0, 1.0 / p.c1);
}

// Rough integral of h over a cell assuming log h is linear in t.
double rough_cell(double t0, double l0, double t1, double l1) {
  double w = std::fabs(t1 - t0);
  if (l0 == -kInf && l1 == -kInf) return 0.0;
  if (l0 == -kInf || l1 == -kInf) return 0.5 * w * (std::exp(l0) + std::exp(l1));
  double d = l1 - l0;
  if (std::fabs(d) < 1e-8) return w * std::exp(0.5 * (l0 + l1));
  return w * (std::exp(l1) - std::exp(l0)) / d;
}

double node_width(double t, double slope) {
  double w = std::max(std::fabs(t), 2.0) / 64.0;
  if (std::isfinite(slope) && slope != 0.0) w = std::min(w, 0.25 / std::fabs(slope));
  return std::max(w, 1.0 / 32.0);
}

}  // namespace

RateBound::RateBound(BetaFn beta, RateOptions opt) : beta_(std::move(beta)), opt_(opt) {
  if (!(opt_.a > 0.0)) throw std::invalid_argument("RateBound: a must be positive");
  const double a = opt_.a;
  closed_ = !opt_.force_numeric && beta_.has_closed_conjugate();
  vmax_ = beta_.sup_value();
  t_start_ = vmax_ < a ? std::log(a / vmax_) : 0.0;
  if (closed_) {
    if (const auto* sp = std::get_if<StrongPI>(&beta_.variant())) {
      tail_ = std::max(0.0, std::log(sp->a / a)) / sp->cp;
    } else {
      const auto& p = std::get<Polynomial>(beta_.variant());
      tail_ = poly_ctilde(p) * std::pow(a, -1.0 / p.c1);
    }
    finf_ = opt_.mode == RateMode::Finf || (opt_.mode == RateMode::Auto && std::isfinite(tail_));
    return;
  }
  build_table();
  if (opt_.mode == RateMode::Finf && !std::isfinite(tail_))
    throw std::domain_error("F_inf mode requested but the tail integral diverges");
  finf_ = opt_.mode == RateMode::Finf || (opt_.mode == RateMode::Auto && std::isfinite(tail_));
}

double RateBound::log_h_direct(double t) const {
  double lv = std::log(opt_.a) - t;
  double lk = log_conjugate(beta_, lv, !opt_.force_numeric, opt_.use_hint);
  if (std::isnan(lk)) throw std::runtime_error("RateBound: conjugate evaluated to NaN");
  return lv - lk;
}

double RateBound::h(double t) const { return std::exp(log_h_direct(t)); }

void RateBound::build_table() {
  const double a = opt_.a;
  auto slope_of = [](const std::vector<double>& ts, const std::vector<double>& ls) {
    std::size_t n = ts.size();
    if (n < 2 || !std::isfinite(ls[n - 1]) || !std::isfinite(ls[n - 2])) return 0.0;
    return (ls[n - 1] - ls[n - 2]) / (ts[n - 1] - ts[n - 2]);
  };

  // Increasing t (decreasing v) from where K* first becomes finite.
  std::vector<double> pt{t_start_}, pl{log_h_direct(t_start_)};
  double rough = 0.0;
  while (true) {
    double t = pt.back();
    if (rough >= opt_.f_stop || t >= opt_.t_cap || pl.back() == kInf) break;
    double tn = t + node_width(t, slope_of(pt, pl));
    double ln = log_h_direct(tn);
    rough += rough_cell(t, pl.back(), tn, ln);
    pt.push_back(tn);
    pl.push_back(ln);
  }

  // Decreasing t (v above a) for the F_inf tail.
  std::vector<double> nt, nl;
  bool need_tail = opt_.mode != RateMode::Fa && vmax_ > a;
  bool diverged = false;
  left_residual_ = 0.0;
  if (need_tail) {
    double t_end = std::isfinite(vmax_) ? std::log(a / vmax_) : -kInf;
    std::vector<double> ts{0.0}, ls{pl.front()};
    double integral = 0.0, prev_check = -1.0, next_check = 4.0;
    while (true) {
      double t = ts.back();
      double tn = t - node_width(t, slope_of(ts, ls));
      bool last = tn <= t_end;
      if (last) tn = t_end;
      double ln = log_h_direct(tn);
      integral += rough_cell(tn, ln, t, ls.back());
      ts.push_back(tn);
      ls.push_back(ln);
      nt.push_back(tn);
      nl.push_back(ln);
      if (last || ln == -kInf) break;
      if (-tn >= next_check) {
        if (prev_check >= 0.0 && integral - prev_check <= 1e-12 * integral) {
          double s = slope_of(ts, ls);  // d log h / dt along decreasing t
          left_residual_ = s < 0.0 ? std::exp(ln) / (-s) : 0.0;
          break;
        }
        prev_check = integral;
        next_check *= 2.0;
        if (next_check > 4096.0) {
          diverged = true;
          break;
        }
      }
      if (integral > opt_.f_stop) {
        diverged = true;
        break;
      }
    }
  }

  t_.assign(nt.rbegin(), nt.rend());
  logh_.assign(nl.rbegin(), nl.rend());
  zero_idx_ = t_.size();
  t_.insert(t_.end(), pt.begin(), pt.end());
  logh_.insert(logh_.end(), pl.begin(), pl.end());
  G_.assign(t_.size(), 0.0);
  direct_cell_.assign(t_.size(), 0);
  for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
    if (std::isfinite(logh_[i]) && std::isfinite(logh_[i + 1])) {
      // endpoint singularities (v near sup β) defeat the interpolant
      double mid = 0.5 * (t_[i] + t_[i + 1]);
      direct_cell_[i] = std::fabs(interp_log_h(i, mid) - log_h_direct(mid)) > 1e-7;
    }
    G_[i + 1] = G_[i] + cell_integral(i, t_[i + 1]);
  }
  if (diverged) {
    tail_ = kInf;
    left_residual_ = 0.0;
  } else {
    tail_ = left_residual_ + G_[zero_idx_];
  }
}

double RateBound::interp_log_h(std::size_t i, double t) const {
  std::size_t idx[4];
  int m = 0;
  if (i >= 1 && std::isfinite(logh_[i - 1])) idx[m++] = i - 1;
  idx[m++] = i;
  idx[m++] = i + 1;
  if (i + 2 < t_.size() && std::isfinite(logh_[i + 2])) idx[m++] = i + 2;
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    double basis = 1.0;
    for (int k = 0; k < m; ++k)
      if (k != j) basis *= (t - t_[idx[k]]) / (t_[idx[j]] - t_[idx[k]]);
    acc += basis * logh_[idx[j]];
  }
  return acc;
}

double RateBound::cell_integral(std::size_t i, double tau) const {
  double t0 = t_[i], t1 = t_[i + 1];
  if (tau <= t0) return 0.0;
  tau = std::min(tau, t1);
  double l0 = logh_[i], l1 = logh_[i + 1];
  if (l0 == -kInf || l1 == -kInf) {
    double h0 = std::exp(l0), h1 = std::exp(l1), w = t1 - t0, s = (tau - t0) / w;
    return w * (h0 * s + 0.5 * (h1 - h0) * s * s);
  }
  if (i < direct_cell_.size() && direct_cell_[i]) return direct_integral(t0, tau);
  return num::gauss_integrate([&](double t) { return std::exp(interp_log_h(i, t)); }, t0, tau,
                              num::gauss_legendre(kGaussPoints));
}

double RateBound::direct_integral(double t0, double t1) const {
  if (t1 <= t0) return 0.0;
  return num::adaptive_simpson([this](double t) { return h(t); }, t0, t1, 1e-12, 1e-10);
}

double RateBound::G_at(double t) const {
  if (t <= t_.front()) return t == t_.front() ? 0.0 : -direct_integral(t, t_.front());
  if (t >= t_.back()) return G_.back() + direct_integral(t_.back(), t);
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  return G_[i] + cell_integral(i, t);
}

// F as a function of t = log(a/x); table path only.
double RateBound::F_of_t(double t) const {
  if (!finf_) {
    if (t <= t_start_) return 0.0;
    return G_at(t) - G_[zero_idx_];
  }
  if (t < t_.front()) {
    if (left_residual_ <= 0.0) return 0.0;
    // exponential extrapolation of the residual mass
    double s = (logh_[1] - logh_[0]) / (t_[1] - t_[0]);
    return left_residual_ * std::exp(s * (t - t_.front()));
  }
  return left_residual_ + G_at(t);
}

double RateBound::t_of_F(double n) const {
  double target;
  if (!finf_) {
    target = n + G_[zero_idx_];
  } else {
    target = n - left_residual_;
    if (target < 0.0) {
      double s = (logh_[1] - logh_[0]) / (t_[1] - t_[0]);
      return t_.front() + std::log(n / left_residual_) / s;
    }
  }
  if (target <= G_.back()) {
    auto it = std::upper_bound(G_.begin(), G_.end(), target);
    std::size_t i = static_cast<std::size_t>(it - G_.begin());
    if (i == 0) return t_.front();
    --i;
    if (i + 1 >= t_.size()) return t_.back();
    double want = target - G_[i];
    double lo = t_[i], hi = t_[i + 1];
    for (int it2 = 0; it2 < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++it2) {
      double mid = 0.5 * (lo + hi);
      if (cell_integral(i, mid) < want)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
  // beyond the table
  double lo = t_.back(), glo = G_.back(), step = std::max(1.0, std::fabs(lo));
  double hi = lo + step, ghi = glo + direct_integral(lo, hi);
  while (ghi < target) {
    lo = hi;
    glo = ghi;
    step *= 2.0;
    hi = lo + step;
    ghi = glo + direct_integral(lo, hi);
    if (!std::isfinite(hi)) return kInf;
  }
  for (int it2 = 0; it2 < 200 && hi - lo > 1e-14 * std::max(1.0, std::fabs(hi)); ++it2) {
    double mid = 0.5 * (lo + hi);
    double gm = glo + direct_integral(lo, mid);
    if (gm < target) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double RateBound::kstar(double v) const {
  if (v < 0.0 || (!finf_ && v > opt_.a)) throw std::domain_error("kstar: v outside the admissible range");
  return std::exp(log_conjugate(beta_, std::log(v), closed_, opt_.use_hint));
}

double RateBound::F(double x) const {
  const double a = opt_.a;
  if (!(x > 0.0) || (!finf_ && x > a)) throw std::domain_error("F: x outside (0, a]");
  if (closed_) {
    if (const auto* sp = std::get_if<StrongPI>(&beta_.variant())) {
      double upper = finf_ ? sp->a : std::min(a, sp->a);
      return std::max(0.0, std::log(upper / x)) / sp->cp;
    }
    const auto& p = std::get<Polynomial>(beta_.variant());
    double ct = poly_ctilde(p);
    if (finf_) return ct * std::pow(x, -1.0 / p.c1);
    return ct * (std::pow(x, -1.0 / p.c1) - std::pow(a, -1.0 / p.c1));
  }
  return F_of_t(std::log(a / x));
}

double RateBound::log_F_inverse(double n) const {
  if (n < 0.0 || std::isnan(n)) throw std::domain_error("F_inverse: n must be nonnegative");
  const double a = opt_.a, la = std::log(a);
  if (closed_) {
    if (const auto* sp = std::get_if<StrongPI>(&beta_.variant())) {
      if (finf_) return std::log(sp->a) - sp->cp * n;
      if (n == 0.0) return la;
      return std::log(std::min(a, sp->a)) - sp->cp * n;
    }
    const auto& p = std::get<Polynomial>(beta_.variant());
    double ct = poly_ctilde(p);
    if (finf_) return n == 0.0 ? kInf : p.c1 * (std::log(ct) - std::log(n));
    return -p.c1 * std::log(n / ct + std::pow(a, -1.0 / p.c1));
  }
  if (n == 0.0) return finf_ ? std::log(vmax_) : la;
  return la - t_of_F(n);
}

double RateBound::F_inverse(double n) const { return std::exp(log_F_inverse(n)); }

double RateBound::decay_bound(double n) const { return std::min(opt_.a, F_inverse(n)); }

double RateBound::F_quadrature(double x) const {
  const double a = opt_.a;
  if (!(x > 0.0) || (!finf_ && x > a)) throw std::domain_error("F: x outside (0, a]");
  double t = std::log(a / x);
  double lo = t_start_;
  double base = 0.0;
  if (finf_) base = tail_;
  if (t <= lo) return t < 0.0 && finf_ ? tail_ - num::adaptive_simpson([this](double s) { return h(s); }, t, 0.0, 1e-12, 1e-10) : base;
  return base + num::adaptive_simpson([this](double s) { return h(s); }, lo, t, 1e-12, 1e-10);
}

// ---------------------------------------------------------------------------

BetaFn rescale_beta(const BetaFn& beta, double c1, double c2) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::domain_error("rescale: c1, c2 must be positive");
  if (c1 == 1.0 && c2 == 1.0) return beta;
  if (const auto* pp = std::get_if<Polynomial>(&beta.variant()))
    return BetaFn::polynomial(c1 * pp->c0 * std::pow(c2, -pp->c1), pp->c1);
  if (const auto* sp = std::get_if<StrongPI>(&beta.variant()); sp && c2 * sp->cp <= 1.0)
    return BetaFn::strong_pi(c1 * sp->a, c2 * sp->cp);
  double l1 = std::log(c1), l12 = std::log(c1 * c2);
  BetaFn out = BetaFn::callable_log([beta, l1, c2](double s) { return l1 + beta.log_value(c2 * s); },
                                    "rescaled(" + beta.kind() + ")");
  // K̃*(v) = c1 c2 K*(v / c1)
  return out.with_conjugate_hint([beta, l1, l12](double lv) { return l12 + log_conjugate(beta, lv - l1); });
}

RateBound rescale(const RateBound& rb, double c1, double c2) {
  return RateBound(rescale_beta(rb.beta(), c1, c2), rb.options());
}

}  // namespace wpi
