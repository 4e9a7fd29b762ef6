#include "wpi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>
#include <thread>

#include "wpi/numeric.hpp"

namespace wpi {

using num::kInf;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// 1 - (1 - t)² = t(2 - t) with t = c s^-e, clamped at 1
double pair_complement(double c, double s, double e) {
  double t = std::min(1.0, c * std::pow(s, -e));
  return t * (2.0 - t);
}

}  // namespace

void validate(const IMHSpec& spec) {
  std::visit(Overloaded{
                 [](const ExpExp& e) {
                   if (!(e.a1 > 0.0 && e.a2 > e.a1)) throw std::domain_error("ExpExp: need 0 < a1 < a2");
                 },
                 [](const PolyPoly& p) {
                   if (!(p.b1 > 0.0 && p.b2 > p.b1)) throw std::domain_error("PolyPoly: need 0 < b1 < b2");
                 },
                 [](const CustomIMH& c) {
                   if (!c.log_target || !c.log_proposal || !c.sample_proposal)
                     throw std::invalid_argument("Custom IMH: target, proposal and sampler are required");
                   if (c.mc_draws < 100) throw std::invalid_argument("Custom IMH: mc_draws too small");
                 },
             },
             spec);
}

std::optional<double> imh_exponent(const IMHSpec& spec) {
  validate(spec);
  if (const auto* e = std::get_if<ExpExp>(&spec)) return e->a1 / (e->a2 - e->a1);
  if (const auto* p = std::get_if<PolyPoly>(&spec)) return p->b1 / (p->b2 - p->b1);
  return std::nullopt;
}

double imh_beta(const IMHSpec& spec, double s) {
  if (!(s > 0.0)) throw std::domain_error("imh_beta: s must be positive");
  if (auto e = imh_exponent(spec)) {
    if (s < 1.0) throw std::domain_error("imh_beta: closed form needs s >= 1");
    return 0.5 * pair_complement(1.0, s, *e);
  }
  return imh_beta_mc(std::get<CustomIMH>(spec), {s}).front().value;
}

double imh_beta_exact(const IMHSpec& spec, double s) {
  if (!(s > 0.0)) throw std::domain_error("imh_beta_exact: s must be positive");
  if (const auto* e = std::get_if<ExpExp>(&spec)) {
    validate(spec);
    return 0.5 * pair_complement(1.0, s * e->a2 / e->a1, e->a1 / (e->a2 - e->a1));
  }
  if (const auto* p = std::get_if<PolyPoly>(&spec)) {
    validate(spec);
    return 0.5 * pair_complement(1.0, s * p->b2 / p->b1, p->b1 / (p->b2 - p->b1));
  }
  return imh_beta_mc(std::get<CustomIMH>(spec), {s}).front().value;
}

std::vector<McValue> imh_beta_mc(const CustomIMH& spec, const std::vector<double>& s_grid) {
  validate(IMHSpec{spec});
  Rng rng = num::make_stream(spec.seed, 0);
  const long n = spec.mc_draws;
  std::vector<double> lw(n);
  double lmax = -kInf;
  for (long i = 0; i < n; ++i) {
    double y = spec.sample_proposal(rng);
    double v = spec.log_target(y) - spec.log_proposal(y);
    lw[i] = std::isfinite(v) ? v : -kInf;
    lmax = std::max(lmax, lw[i]);
  }
  if (!std::isfinite(lmax)) throw std::domain_error("Custom IMH: no finite weights in the sample");
  // normalise: w = w̃ / E_q[w̃]
  double z = 0.0;
  for (double v : lw) z += std::exp(v - lmax);
  const double log_norm = lmax + std::log(z / n);
  std::vector<double> w(n), r(n);
  for (long i = 0; i < n; ++i) {
    w[i] = std::exp(lw[i] - lmax) / (z / n);  // w̃/Z̃ relative to lmax
    r[i] = lw[i] - log_norm;                   // log of the normalised weight
  }
  std::vector<McValue> out;
  for (double s : s_grid) {
    if (!(s > 0.0)) throw std::domain_error("imh_beta_mc: s must be positive");
    const double ls = std::log(s);
    // ratio estimator of π(w ≤ s) = E_q[w 1{w≤s}] / E_q[w]
    double num = 0.0;
    for (long i = 0; i < n; ++i)
      if (r[i] <= ls) num += w[i];
    double p = num / n;
    double var = 0.0;
    for (long i = 0; i < n; ++i) {
      double d = w[i] * ((r[i] <= ls ? 1.0 : 0.0) - p);
      var += d * d;
    }
    double se_p = std::sqrt(var / n) / std::sqrt(static_cast<double>(n));
    p = std::clamp(p, 0.0, 1.0);
    out.push_back({0.5 * (1.0 - p * p), p * se_p});
  }
  return out;
}

BetaFn imh_beta_fn(const IMHSpec& spec) {
  if (auto e = imh_exponent(spec)) return BetaFn::polynomial(1.0, *e);
  const auto& c = std::get<CustomIMH>(spec);
  auto s = num::log_space(1e-3, 1e6, 181);
  auto mc = imh_beta_mc(c, s);
  std::vector<double> b;
  for (const auto& m : mc) b.push_back(m.value);
  for (std::size_t i = 1; i < b.size(); ++i) b[i] = std::min(b[i], b[i - 1]);
  std::optional<double> k = c.tail_exponent;
  if (!k && b.back() > 0.0) {
    // slope over the last decade with positive values
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= s.back() / 10.0 && b[i] > 0.0) {
        xs.push_back(std::log(s[i]));
        ys.push_back(std::log(b[i]));
      }
    double slope = xs.size() >= 2 ? num::fit_line(xs, ys).slope : 0.0;
    k = std::max(-slope, 1e-3);
  }
  return BetaFn::tabulated(s, b, k, Interpolation::LogLog);
}

RateBound imh_rate(const IMHSpec& spec) { return RateBound(imh_beta_fn(spec)); }

double imh_log_weight(const IMHSpec& spec, double x) {
  return std::visit(Overloaded{
                        [x](const ExpExp& e) {
                          if (!(x > 0.0)) return -kInf;
                          return std::log(e.a1 / e.a2) + (e.a2 - e.a1) * x;
                        },
                        [x](const PolyPoly& p) {
                          if (!(x >= 1.0)) return -kInf;
                          return std::log(p.b1 / p.b2) + (p.b2 - p.b1) * std::log(x);
                        },
                        [x](const CustomIMH& c) { return c.log_target(x) - c.log_proposal(x); },
                    },
                    spec);
}

double imh_sample_proposal(const IMHSpec& spec, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const ExpExp& e) { return -std::log1p(-uniform01(rng)) / e.a2; },
                        [&](const PolyPoly& p) { return std::pow(1.0 - uniform01(rng), -1.0 / p.b2); },
                        [&](const CustomIMH& c) { return c.sample_proposal(rng); },
                    },
                    spec);
}

double imh_sample_target(const IMHSpec& spec, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const ExpExp& e) { return -std::log1p(-uniform01(rng)) / e.a1; },
                        [&](const PolyPoly& p) { return std::pow(1.0 - uniform01(rng), -1.0 / p.b1); },
                        [&](const CustomIMH&) -> double {
                          throw std::invalid_argument("Custom IMH: no exact target sampler");
                        },
                    },
                    spec);
}

double imh_step(const IMHSpec& spec, double x, Rng& rng, bool* accepted, bool* nonfinite) {
  double y = imh_sample_proposal(spec, rng);
  double u = uniform01(rng);
  double ly = imh_log_weight(spec, y), lx = imh_log_weight(spec, x);
  if (accepted) *accepted = false;
  if (nonfinite) *nonfinite = false;
  if (std::isnan(ly) || ly == kInf || ly == -kInf) {
    if (nonfinite) *nonfinite = true;
    return x;
  }
  if (lx == -kInf || std::log(u) < ly - lx) {
    if (accepted) *accepted = true;
    return y;
  }
  return x;
}

Trajectory imh_sample(const IMHSpec& spec, double x0, long n_steps, std::uint64_t seed) {
  validate(spec);
  if (n_steps < 0) throw std::invalid_argument("imh_sample: n_steps must be nonnegative");
  Rng rng = num::make_stream(seed, 0);
  Trajectory tr;
  tr.x.reserve(n_steps + 1);
  tr.x.push_back(x0);
  double x = x0;
  for (long i = 0; i < n_steps; ++i) {
    bool acc = false, bad = false;
    x = imh_step(spec, x, rng, &acc, &bad);
    tr.accepted += acc;
    tr.nonfinite += bad;
    tr.x.push_back(x);
  }
  return tr;
}

// ---------------------------------------------------------------------------

DecayEstimate estimate_decay(const std::function<double(double, Rng&)>& step,
                             const std::function<double(Rng&)>& sample_pi, const std::function<double(double)>& f,
                             const DecayOptions& opt) {
  if (opt.n_grid.empty()) throw std::invalid_argument("estimate_decay: empty n grid");
  if (opt.replicas < 2 || opt.inner < 2) throw std::invalid_argument("estimate_decay: need replicas >= 2 and inner >= 2");
  if (!sample_pi) throw std::invalid_argument("estimate_decay: a stationary sampler is required off a finite space");
  std::vector<int> grid = opt.n_grid;
  for (int n : grid)
    if (n < 0) throw std::invalid_argument("estimate_decay: negative n");
  const int n_max = *std::max_element(grid.begin(), grid.end());
  const std::size_t G = grid.size();
  // per replica, per grid point
  std::vector<std::vector<double>> vals(opt.replicas, std::vector<double>(G));
  auto work = [&](long r) {
    Rng rng = num::make_stream(opt.seed, static_cast<std::uint64_t>(r));
    double x0 = sample_pi(rng);
    std::vector<double> S(n_max + 1, 0.0), Q(n_max + 1, 0.0);
    for (long m = 0; m < opt.inner; ++m) {
      double x = x0;
      for (int n = 0; n <= n_max; ++n) {
        if (n > 0) x = step(x, rng);
        double v = f(x);
        S[n] += v;
        Q[n] += v * v;
      }
    }
    const double M = static_cast<double>(opt.inner);
    for (std::size_t g = 0; g < G; ++g) {
      int n = grid[g];
      vals[r][g] = (S[n] * S[n] - Q[n]) / (M * (M - 1.0));
    }
  };
  int threads = std::max(1, opt.threads);
  if (threads == 1) {
    for (long r = 0; r < opt.replicas; ++r) work(r);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (long r = t; r < opt.replicas; r += threads) work(r);
      });
    for (auto& th : pool) th.join();
  }
  DecayEstimate est;
  est.replicas = opt.replicas;
  est.inner = opt.inner;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> col(opt.replicas);
    for (long r = 0; r < opt.replicas; ++r) col[r] = vals[r][g];
    auto ms = num::mean_se(col);
    est.n.push_back(grid[g]);
    est.estimate.push_back(ms.mean);
    est.se.push_back(ms.se);
  }
  return est;
}

DecayEstimate estimate_decay_exact(const FiniteChain& chain, const Eigen::VectorXd& f, const std::vector<int>& n_grid) {
  DecayEstimate est;
  est.replicas = 0;
  for (int n : n_grid) {
    if (n < 0) throw std::invalid_argument("estimate_decay_exact: negative n");
    est.n.push_back(n);
    est.estimate.push_back(exact_decay_power(chain, f, n));
    est.se.push_back(0.0);
  }
  return est;
}

void attach_bound(DecayEstimate& est, const RateBound& rb, double phi_f) {
  est.bound.clear();
  for (double n : est.n) est.bound.push_back(phi_f * rb.decay_bound(n));
}

void write_csv(std::ostream& os, const DecayEstimate& est) {
  os << "n,estimate,se,bound\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < est.n.size(); ++i) {
    os << est.n[i] << ',' << est.estimate[i] << ',' << est.se[i] << ',';
    if (i < est.bound.size()) os << est.bound[i];
    os << '\n';
  }
}

}  // namespace wpi
