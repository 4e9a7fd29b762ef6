#include "wpi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "wpi/comparison.hpp"
#include "wpi/numeric.hpp"

namespace wpi {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using num::kInf;

namespace {

VectorXd stationary(const MatrixXd& P) {
  const int d = static_cast<int>(P.rows());
  MatrixXd A = P.transpose() - MatrixXd::Identity(d, d);
  A.row(d - 1).setOnes();
  VectorXd b = VectorXd::Zero(d);
  b(d - 1) = 1.0;
  VectorXd pi = A.fullPivLu().solve(b);
  for (int i = 0; i < d; ++i) pi(i) = std::max(pi(i), 0.0);
  return pi / pi.sum();
}

// π-symmetric part of D(I - T)
MatrixXd dirichlet_matrix(const FiniteChain& c, TSelector sel) {
  const int d = c.size();
  MatrixXd M = c.pi().asDiagonal() * (MatrixXd::Identity(d, d) - c.T(sel));
  return 0.5 * (M + M.transpose());
}

MatrixXd covariance_matrix(const FiniteChain& c) {
  const VectorXd& pi = c.pi();
  MatrixXd C = pi.asDiagonal();
  C -= pi * pi.transpose();
  return C;
}

// max of fᵀAf over [0,1]^d via the KKT faces: a free set F with -A_FF
// positive definite, the rest pinned at 0 or 1. A has zero row sums.
SharpestResult box_quadratic_max(const MatrixXd& A) {
  const int d = static_cast<int>(A.rows());
  SharpestResult best;
  best.value = -kInf;
  best.maximiser = VectorXd::Zero(d);
  const unsigned full = 1u << d;
  std::vector<int> F, C;
  for (unsigned mask = 0; mask < full; ++mask) {
    F.clear();
    C.clear();
    for (int i = 0; i < d; ++i) ((mask >> i) & 1u ? F : C).push_back(i);
    if (C.empty()) continue;  // shift-invariant: some coordinate sits on the boundary
    Eigen::LLT<MatrixXd> llt;
    const int nf = static_cast<int>(F.size());
    if (nf > 0) {
      bool diag_ok = true;
      for (int i : F)
        if (!(A(i, i) < 0.0)) diag_ok = false;
      if (!diag_ok) continue;
      MatrixXd negA(nf, nf);
      for (int r = 0; r < nf; ++r)
        for (int q = 0; q < nf; ++q) negA(r, q) = -A(F[r], F[q]);
      llt.compute(negA);
      if (llt.info() != Eigen::Success) continue;
    }
    const int nc = static_cast<int>(C.size());
    const unsigned combos = 1u << nc;
    for (unsigned bits = 0; bits < combos; ++bits) {
      VectorXd g = VectorXd::Zero(d);
      for (int k = 0; k < nc; ++k)
        if ((bits >> k) & 1u) g(C[k]) = 1.0;
      VectorXd Ag = A * g;
      double val = g.dot(Ag);
      if (nf > 0) {
        VectorXd b(nf);
        for (int r = 0; r < nf; ++r) b(r) = Ag(F[r]);
        VectorXd x = llt.solve(b);
        bool inside = true;
        for (int r = 0; r < nf; ++r)
          if (x(r) < 0.0 || x(r) > 1.0) inside = false;
        if (!inside) continue;
        val += x.dot(b);
        for (int r = 0; r < nf; ++r) g(F[r]) = x(r);
      }
      if (val > best.value) {
        best.value = val;
        best.maximiser = g;
      }
    }
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

double two_p_phi(const VectorXd& f, const VectorXd& pi, double p) {
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) acc += pi(i) * std::pow(std::fabs(f(i)), 2.0 * p);
  return 4.0 * std::pow(acc, 1.0 / p);
}

// multi-start projected gradient ascent on the ratio over centred f
SharpestResult two_p_ascent(const FiniteChain& c, const MatrixXd& Q, double p, std::uint64_t seed) {
  const int d = c.size();
  const VectorXd& pi = c.pi();
  auto ratio = [&](const VectorXd& f) { return f.dot(Q * f) / two_p_phi(f, pi, p); };
  auto grad = [&](const VectorXd& f) {
    double num = f.dot(Q * f);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += pi(i) * std::pow(std::fabs(f(i)), 2.0 * p);
    double phi = 4.0 * std::pow(acc, 1.0 / p);
    VectorXd dphi(d);
    for (int i = 0; i < d; ++i) {
      double fi = f(i);
      double sgn = fi > 0.0 ? 1.0 : (fi < 0.0 ? -1.0 : 0.0);
      dphi(i) = 4.0 * std::pow(acc, 1.0 / p - 1.0) * 2.0 * pi(i) * std::pow(std::fabs(fi), 2.0 * p - 1.0) * sgn;
    }
    VectorXd g = (2.0 * (Q * f) * phi - num * dphi) / (phi * phi);
    return VectorXd(g - VectorXd::Constant(d, g.dot(pi)));
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SharpestResult best;
  best.value = -kInf;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  std::vector<VectorXd> starts;
  for (int i = 0; i < d; ++i) starts.push_back(c.center(es.eigenvectors().col(i)));
  for (int k = 0; k < 20; ++k) {
    VectorXd f(d);
    for (int i = 0; i < d; ++i) f(i) = nd(rng);
    starts.push_back(c.center(f));
  }
  for (VectorXd f : starts) {
    if (f.norm() < 1e-12) continue;
    f /= f.norm();
    double cur = ratio(f), step = 0.1;
    for (int it = 0; it < 2000 && step > 1e-12; ++it) {
      VectorXd g = grad(f);
      VectorXd trial = c.center(f + step * g);
      trial /= trial.norm();
      double v = ratio(trial);
      if (v > cur) {
        f = trial;
        cur = v;
        step *= 1.2;
      } else {
        step *= 0.5;
      }
    }
    if (cur > best.value) {
      best.value = cur;
      best.maximiser = f;
    }
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

}  // namespace

FiniteChain::FiniteChain(MatrixXd P, std::optional<VectorXd> pi) : P_(std::move(P)) {
  const int d = static_cast<int>(P_.rows());
  if (d == 0 || P_.cols() != d) throw std::invalid_argument("FiniteChain: P must be square and nonempty");
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      if (!(P_(i, j) >= 0.0)) throw std::invalid_argument("FiniteChain: negative or NaN entry in P");
    if (std::fabs(P_.row(i).sum() - 1.0) > 1e-12) throw std::invalid_argument("FiniteChain: rows must sum to 1");
  }
  if (pi) {
    if (pi->size() != d) throw std::invalid_argument("FiniteChain: pi has the wrong dimension");
    pi_ = *pi;
  } else {
    pi_ = stationary(P_);
  }
  if ((pi_.transpose() * P_ - pi_.transpose()).cwiseAbs().maxCoeff() > 1e-10 || std::fabs(pi_.sum() - 1.0) > 1e-10)
    throw std::invalid_argument("FiniteChain: pi is not stationary for P");
  for (int i = 0; i < d; ++i)
    if (!(pi_(i) > 0.0)) throw std::invalid_argument("FiniteChain: pi must be positive");
  reversible_ = true;
  for (int i = 0; i < d && reversible_; ++i)
    for (int j = 0; j < d; ++j)
      if (std::fabs(pi_(i) * P_(i, j) - pi_(j) * P_(j, i)) > 1e-10) {
        reversible_ = false;
        break;
      }
  if (reversible_) {
    VectorXd sq = pi_.cwiseSqrt();
    MatrixXd S = sq.asDiagonal() * P_ * sq.cwiseInverse().asDiagonal();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
    evals_ = es.eigenvalues();
    evecs_ = sq.cwiseInverse().asDiagonal() * es.eigenvectors();
  }
}

MatrixXd FiniteChain::adjoint() const {
  return pi_.cwiseInverse().asDiagonal() * P_.transpose() * pi_.asDiagonal();
}

MatrixXd FiniteChain::T(TSelector sel) const {
  switch (sel) {
    case TSelector::P:
      return P_;
    case TSelector::PstarP:
      return adjoint() * P_;
    case TSelector::P2:
      return P_ * P_;
  }
  return P_;
}

double FiniteChain::spectral_gap(TSelector sel) const {
  VectorXd sq = pi_.cwiseSqrt();
  MatrixXd S = dirichlet_matrix(*this, sel);
  MatrixXd M = sq.cwiseInverse().asDiagonal() * S * sq.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  if (size() < 2) return kInf;
  return es.eigenvalues()(1);
}

VectorXd FiniteChain::center(const VectorXd& f) const {
  if (f.size() != size()) throw std::invalid_argument("dimension mismatch");
  return f - VectorXd::Constant(size(), pi_.dot(f));
}

double FiniteChain::norm_sq(const VectorXd& f) const {
  VectorXd g = center(f);
  return pi_.dot(g.cwiseProduct(g));
}

FiniteChain random_reversible_chain(int d, std::uint64_t seed, const std::string& kind) {
  if (d < 2) throw std::invalid_argument("random_reversible_chain: d must be at least 2");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  MatrixXd W(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) W(i, j) = W(j, i) = ex(rng);
  VectorXd rs = W.rowwise().sum();
  MatrixXd Q = rs.cwiseInverse().asDiagonal() * W;
  VectorXd pi = rs / rs.sum();
  MatrixXd P;
  if (kind == "plain")
    P = Q;
  else if (kind == "lazy")
    P = 0.5 * (MatrixXd::Identity(d, d) + Q);
  else if (kind == "square")
    P = Q * Q;
  else
    throw std::invalid_argument("random_reversible_chain: unknown kind " + kind);
  for (int i = 0; i < d; ++i) P.row(i) /= P.row(i).sum();
  return FiniteChain(P, pi);
}

double dirichlet_form(const FiniteChain& chain, TSelector sel, const VectorXd& f) {
  VectorXd g = chain.center(f);
  return g.dot(dirichlet_matrix(chain, sel) * g);
}

double exact_decay(const FiniteChain& chain, const VectorXd& f, double n) {
  if (n < 0.0) throw std::domain_error("exact_decay: n must be nonnegative");
  VectorXd g = chain.center(f);
  if (!chain.reversible()) {
    if (n != std::floor(n)) throw std::domain_error("exact_decay: fractional n needs a reversible chain");
    return exact_decay_power(chain, f, static_cast<int>(n));
  }
  VectorXd coef = chain.eigenvectors().transpose() * chain.pi().asDiagonal() * g;
  double acc = 0.0;
  const VectorXd& lam = chain.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    double l2 = lam(i) * lam(i);
    double w = n == 0.0 ? 1.0 : std::pow(l2, n);
    acc += w * coef(i) * coef(i);
  }
  return acc;
}

double exact_decay_power(const FiniteChain& chain, const VectorXd& f, int n) {
  VectorXd g = chain.center(f);
  for (int k = 0; k < n; ++k) g = chain.P() * g;
  g = chain.center(g);
  return chain.pi().dot(g.cwiseProduct(g));
}

SharpestResult sharpest_beta_full(const FiniteChain& chain, TSelector sel, const PhiFunctional& phi, double s,
                                  std::uint64_t seed) {
  if (!(s >= 0.0)) throw std::domain_error("sharpest_beta: s must be nonnegative");
  MatrixXd Q = covariance_matrix(chain) - s * dirichlet_matrix(chain, sel);
  if (std::holds_alternative<OscSquared>(phi)) return box_quadratic_max(Q);
  if (std::holds_alternative<L2Squared>(phi)) {
    SharpestResult r;
    r.value = std::max(0.0, 1.0 - s * chain.spectral_gap(sel));
    VectorXd sq = chain.pi().cwiseSqrt();
    MatrixXd S = dirichlet_matrix(chain, sel);
    MatrixXd M = sq.cwiseInverse().asDiagonal() * S * sq.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()));
    r.maximiser = sq.cwiseInverse().asDiagonal() * es.eigenvectors().col(1);
    return r;
  }
  return two_p_ascent(chain, Q, std::get<TwoPNormSquared>(phi).p, seed);
}

double sharpest_beta(const FiniteChain& chain, TSelector sel, const PhiFunctional& phi, double s) {
  return sharpest_beta_full(chain, sel, phi, s).value;
}

double phi_a_constant(const FiniteChain& chain, const PhiFunctional& phi) {
  if (std::holds_alternative<L2Squared>(phi)) return 1.0;
  if (std::holds_alternative<TwoPNormSquared>(phi)) return 0.25;
  // max over subsets S of π(S)(1 - π(S))
  const int d = chain.size();
  if (d > 24) throw std::invalid_argument("phi_a_constant: state space too large for subset enumeration");
  double best = 0.0;
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    double m = 0.0;
    for (int i = 0; i < d; ++i)
      if ((mask >> i) & 1u) m += chain.pi()(i);
    best = std::max(best, m * (1.0 - m));
  }
  return best;
}

TabulatedBeta sharpest_beta_table(const FiniteChain& chain, TSelector sel, const PhiFunctional& phi, int points) {
  double gap = chain.spectral_gap(sel);
  if (!(gap > 1e-12)) throw std::domain_error("sharpest_beta_table: T has no spectral gap");
  double s_max = 1.0 / gap;
  TabulatedBeta out;
  out.a = phi_a_constant(chain, phi);
  out.s.push_back(1e-12 * s_max);
  for (double s : num::log_space(1e-4 * s_max, s_max, static_cast<std::size_t>(points))) out.s.push_back(s);
  for (double s : out.s) out.values.push_back(sharpest_beta(chain, sel, phi, s));
  out.values.back() = 0.0;
  for (int i = static_cast<int>(out.values.size()) - 2; i >= 0; --i)
    out.values[i] = std::max(out.values[i], out.values[i + 1]);
  out.beta = BetaFn::tabulated(out.s, out.values, std::nullopt, Interpolation::Linear);
  return out;
}

// ---------------------------------------------------------------------------
// necessity

NecessityBeta::NecessityBeta(std::function<double(double)> gamma, NecessityOptions opt)
    : opt_(opt), gamma_(std::move(gamma)) {}

double NecessityBeta::log_gamma(double n) const {
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;
  double g = gamma_(n);
  if (g < 0.0 || std::isnan(g)) throw std::domain_error("necessity_beta: gamma must be nonnegative");
  double lg = g > 0.0 ? std::log(g) : -kInf;
  cache_.emplace(n, lg);
  return lg;
}

std::vector<double> NecessityBeta::candidates(double t) const {
  std::vector<double> n;
  double cap = std::max(opt_.n_cap_factor * t, 4.0);
  for (int k = 2; k <= opt_.n_dense && k <= cap; ++k) n.push_back(k);
  double x = opt_.n_dense;
  while (x * opt_.n_ratio <= cap) {
    x = std::round(x * opt_.n_ratio) > x ? std::round(x * opt_.n_ratio) : x + 1.0;
    n.push_back(x);
  }
  n.push_back(std::max(2.0, std::floor(t)));
  n.push_back(std::max(2.0, std::ceil(t)));
  return n;
}

// log of the inner infimum at t
double NecessityBeta::log_inner(double t, bool first) const {
  double best = kInf;
  const double lt = std::log(t), ltm = std::log(t - 1.0);
  for (double n : candidates(t)) {
    double lg = log_gamma(n);
    double v;
    if (first) {
      v = n * lt - (n - 1.0) * ltm + (n - 1.0) * std::log(n - 1.0) - n * std::log(n) + lg;
    } else {
      v = std::log(0.5) + lg + ltm - std::log(n) + n / (t - 1.0);
    }
    best = std::min(best, v);
  }
  return best;
}

double NecessityBeta::sup_over_t(double s, bool first) const {
  if (!(s > 1.0)) throw std::domain_error("necessity_beta: s must exceed 1");
  double best = log_inner(s, first);
  // global grid 10^(k/per_decade), restricted to (s, s·10^decades]
  const double step = 1.0 / opt_.t_per_decade;
  double k0 = std::floor(std::log10(s) / step) + 1.0;
  double k1 = std::floor((std::log10(s) + opt_.t_decades) / step);
  for (double k = k0; k <= k1; k += 1.0) best = std::max(best, log_inner(std::pow(10.0, k * step), first));
  return std::exp(best);
}

double NecessityBeta::beta1(double s) const { return sup_over_t(s, true); }
double NecessityBeta::beta2(double s) const { return sup_over_t(s, false); }

double necessity_beta(const std::function<double(double)>& gamma, double s, const NecessityOptions& opt) {
  return NecessityBeta(gamma, opt).beta1(s);
}

NecessityRoundTrip necessity_round_trip(double c1, int s_points, const NecessityOptions& opt) {
  if (!(c1 > 0.0)) throw std::domain_error("necessity_round_trip: c1 must be positive");
  RateOptions ro;
  ro.mode = RateMode::Finf;
  RateBound src(BetaFn::polynomial(1.0, c1), ro);
  auto gamma = [&](double n) { return src.F_inverse(n); };
  NecessityBeta nb(gamma, opt);
  NecessityRoundTrip out;
  out.s = num::log_space(2.0, 1e5, s_points);
  for (double s : out.s) {
    double v1 = nb.beta1(s), v2 = nb.beta2(s), eg = std::exp(1.0) * gamma(std::floor(s));
    out.beta1.push_back(v1);
    out.beta2.push_back(v2);
    out.e_gamma_floor.push_back(eg);
    if (v1 > v2 * (1.0 + 1e-12)) out.bounds_hold = false;
    if (s >= 5.0 && v1 > eg * (1.0 + 1e-12)) out.bounds_hold = false;
  }
  std::vector<double> b1 = out.beta1;
  for (std::size_t i = 1; i < b1.size(); ++i) b1[i] = std::min(b1[i], b1[i - 1]);
  const std::size_t m = b1.size();
  double k = -std::log(b1[m - 1] / b1[m - 2]) / std::log(out.s[m - 1] / out.s[m - 2]);
  RateOptions ra;
  ra.mode = RateMode::Fa;
  ra.a = std::max(1.0, b1.front());
  RateBound back(BetaFn::tabulated(out.s, b1, k), ra);
  std::vector<double> lx, ly;
  for (double n : num::log_space(1e3, 1e5, 21)) {
    lx.push_back(std::log(n));
    ly.push_back(back.log_F_inverse(n));
  }
  out.exponent = -num::fit_line(lx, ly).slope;
  return out;
}

// ---------------------------------------------------------------------------
// verification

std::string route_name(VerifyRoute r) {
  switch (r) {
    case VerifyRoute::Auto:
      return "auto";
    case VerifyRoute::Direct:
      return "direct";
    case VerifyRoute::PositiveDirect:
      return "positive";
    case VerifyRoute::SpectralGap:
      return "spectral-gap";
    case VerifyRoute::WeaklyLazy:
      return "weakly-lazy";
  }
  return "?";
}

VerifyReport verify_decay_bound(const FiniteChain& chain, const PhiFunctional& phi, const VerifyOptions& opt) {
  if (!chain.reversible()) throw std::invalid_argument("verify_decay_bound: chain must be reversible");
  VerifyRoute route = opt.route;
  if (route == VerifyRoute::Auto) {
    if (chain.positive())
      route = VerifyRoute::PositiveDirect;
    else if (chain.c_gap() > 1e-9)
      route = VerifyRoute::SpectralGap;
    else
      route = VerifyRoute::Direct;
  }
  if (route == VerifyRoute::PositiveDirect && !chain.positive())
    throw std::invalid_argument("verify_decay_bound: positive route needs a nonnegative spectrum");
  if (route == VerifyRoute::WeaklyLazy && !std::holds_alternative<OscSquared>(phi))
    throw std::invalid_argument("verify_decay_bound: weakly-lazy route is stated for the oscillation functional");

  VerifyReport rep;
  rep.route = route;
  TSelector sel = route == VerifyRoute::Direct ? TSelector::P2 : TSelector::P;
  TabulatedBeta tab = sharpest_beta_table(chain, sel, phi, opt.beta_points);
  rep.a = tab.a;
  BetaFn beta = tab.beta;
  if (route == VerifyRoute::SpectralGap) {
    if (!(chain.c_gap() > 0.0)) throw std::invalid_argument("verify_decay_bound: c_gap must be positive");
    beta = spectral_gap_correct(beta, std::min(1.0, chain.c_gap()));
  } else if (route == VerifyRoute::WeaklyLazy) {
    std::vector<double> eps(chain.size()), mass(chain.size());
    for (int i = 0; i < chain.size(); ++i) {
      eps[i] = chain.P()(i, i);
      mass[i] = chain.pi()(i);
    }
    beta = chain_weak(beta, dirichlet_domination_beta(weakly_lazy_tail(eps, mass), kInf));
  }
  if (opt.beta_scale != 1.0) beta = beta.scaled(opt.beta_scale);

  RateOptions ro;
  ro.a = tab.a;
  ro.mode = RateMode::Fa;
  RateBound rb(beta, ro);
  std::vector<double> bound(opt.n_max + 1);
  for (int n = 0; n <= opt.n_max; ++n) bound[n] = rb.decay_bound(n);

  // test functions
  std::vector<VectorXd> fs;
  for (std::size_t i = 0; i < tab.s.size(); i += 4) fs.push_back(sharpest_beta_full(chain, sel, phi, tab.s[i]).maximiser);
  for (int i = 0; i < chain.size(); ++i) {
    fs.push_back(VectorXd::Unit(chain.size(), i));
    fs.push_back(chain.eigenvectors().col(i));
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < opt.random_f; ++k) {
    VectorXd f(chain.size());
    for (int i = 0; i < chain.size(); ++i) f(i) = nd(rng);
    fs.push_back(f);
  }

  const VectorXd& pi = chain.pi();
  for (const VectorXd& f0 : fs) {
    VectorXd f = chain.center(f0);
    double ph = phi_value(phi, std::span<const double>(f.data(), f.size()), std::span<const double>(pi.data(), pi.size()));
    if (!(ph > 1e-300)) continue;
    for (int n = 0; n <= opt.n_max; ++n) {
      double lhs = exact_decay(chain, f, n);
      double rhs = ph * bound[n];
      double allowed = rhs * (1.0 + opt.rel_tol) + opt.abs_tol;
      ++rep.checks;
      rep.worst_ratio = std::max(rep.worst_ratio, lhs / allowed);
      if (lhs > allowed) {
        if (rep.violations == 0) rep.counterexample = Counterexample{f, n, lhs, rhs};
        ++rep.violations;
      }
    }
  }
  return rep;
}

std::vector<VerifyReport> verify_battery(const std::vector<FiniteChain>& chains, const PhiFunctional& phi,
                                         const VerifyOptions& opt, int threads) {
  std::vector<VerifyReport> out(chains.size());
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(chains.size(), 1)));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < chains.size(); i += threads) {
          VerifyOptions o = opt;
          o.seed = num::stream_seed(opt.seed, i);
          out[i] = verify_decay_bound(chains[i], phi, o);
        }
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace wpi
