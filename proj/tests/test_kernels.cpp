#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "wpi/kernels.hpp"
#include "wpi/numeric.hpp"

using namespace wpi;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// ½ π⊗π({x > c} ∪ {y > c}) by nested quadrature on the product space
double pair_mass_2d(const std::function<double(double)>& dens, double lo, double c) {
  auto inner = [&](double x) {
    if (x > c) return gk(dens, lo, kInf);
    return gk(dens, c, kInf);
  };
  auto outer = [&](double x) { return dens(x) * inner(x); };
  double m = gk(outer, lo, c) + gk(outer, c, kInf);
  return 0.5 * m;
}

double fitted_exponent(const RateBound& rb) {
  std::vector<double> x, y;
  for (double n : num::log_space(1e3, 1e6, 25)) {
    x.push_back(std::log(n));
    y.push_back(rb.log_F_inverse(n));
  }
  return -num::fit_line(x, y).slope;
}

CustomIMH custom_expexp(double a1, double a2) {
  CustomIMH c;
  c.log_target = [a1](double x) { return x > 0.0 ? -a1 * x : -kInf; };
  c.log_proposal = [a2](double x) { return x > 0.0 ? std::log(a2) - a2 * x : -kInf; };
  c.sample_proposal = [a2](Rng& r) { return std::exponential_distribution<double>(a2)(r); };
  c.mc_draws = 400000;
  c.seed = 11;
  return c;
}

// batch-means standard error of the mean
double batch_se(const std::vector<double>& v, int batches) {
  std::size_t len = v.size() / batches;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += v[i];
    means.push_back(s / len);
  }
  return num::mean_se(means).se;
}

}  // namespace

TEST_CASE("IMH beta closed form") {
  ExpExp e{1.0, 2.0};
  CHECK(*imh_exponent(e) == 1.0);
  CHECK(imh_beta(e, 4.0) == Approx(7.0 / 32.0).epsilon(1e-15));
  CHECK(imh_beta(e, 1.0) == Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(imh_beta(e, 0.5), std::domain_error);
  CHECK_THROWS_AS(validate(ExpExp{2.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(validate(PolyPoly{1.0, 1.0}), std::domain_error);
  for (IMHSpec spec : {IMHSpec{ExpExp{1.0, 3.0}}, IMHSpec{ExpExp{2.0, 3.0}}, IMHSpec{PolyPoly{1.0, 2.0}}}) {
    double ex = *imh_exponent(spec);
    for (double s : num::log_space(1.0, 1e6, 30)) {
      CHECK(imh_beta(spec, s) <= std::pow(s, -ex) * (1.0 + 1e-14));
      CHECK(imh_beta_exact(spec, s) <= imh_beta(spec, s) * (1.0 + 1e-14));
    }
  }
}

TEST_CASE("IMH beta against two-dimensional quadrature") {
  for (auto [a1, a2] : {std::pair{1.0, 2.0}, std::pair{1.0, 3.0}, std::pair{2.0, 3.0}}) {
    ExpExp spec{a1, a2};
    auto dens = [a1 = a1](double x) { return a1 * std::exp(-a1 * x); };
    for (double s : {1.5, 4.0, 20.0, 300.0}) {
      double c_closed = std::log(s) / (a2 - a1);
      double c_true = std::log(s * a2 / a1) / (a2 - a1);  // w(x) = (a1/a2) e^{(a2-a1)x} ≤ s
      CHECK(pair_mass_2d(dens, 0.0, c_closed) == Approx(imh_beta(spec, s)).epsilon(1e-6));
      CHECK(pair_mass_2d(dens, 0.0, c_true) == Approx(imh_beta_exact(spec, s)).epsilon(1e-6));
    }
  }
  const double b1 = 1.0, b2 = 2.0;
  auto dens = [&](double x) { return b1 * std::pow(x, -1.0 - b1); };
  for (double s : {2.0, 50.0}) {
    CHECK(pair_mass_2d(dens, 1.0, std::pow(s, 1.0 / (b2 - b1))) == Approx(imh_beta(PolyPoly{b1, b2}, s)).epsilon(1e-6));
    CHECK(pair_mass_2d(dens, 1.0, std::pow(s * b2 / b1, 1.0 / (b2 - b1))) ==
          Approx(imh_beta_exact(PolyPoly{b1, b2}, s)).epsilon(1e-6));
  }
}

TEST_CASE("IMH rates") {
  auto rb = imh_rate(ExpExp{1.0, 2.0});
  for (double n : num::log_space(10.0, 1e5, 12)) CHECK(rb.F_inverse(n) <= 4.0 / n * (1.0 + 1e-9));
  CHECK(fitted_exponent(imh_rate(PolyPoly{1.0, 2.0})) == Approx(1.0).epsilon(0.05));
  CHECK(fitted_exponent(imh_rate(ExpExp{1.0, 3.0})) == Approx(0.5).epsilon(0.1));
}

TEST_CASE("IMH acceptance from a fixed state") {
  ExpExp spec{1.0, 2.0};
  const double x0 = 0.7;
  const double exact = std::exp(-2.0 * x0) + 2.0 * std::exp(-x0) * (1.0 - std::exp(-x0));
  const long M = 1000000;
  Rng rng = num::make_stream(3, 0);
  long acc = 0;
  for (long i = 0; i < M; ++i) {
    bool a = false;
    imh_step(spec, x0, rng, &a);
    acc += a;
  }
  double p_step = static_cast<double>(acc) / M;
  // independent estimate of E[1 ∧ w(Y)/w(x0)], Y ~ q
  std::mt19937 other(99);
  std::exponential_distribution<double> q(2.0);
  std::vector<double> ratios(M);
  for (long i = 0; i < M; ++i) ratios[i] = std::min(1.0, std::exp(q(other) - x0));
  auto ms = num::mean_se(ratios);
  double se_step = std::sqrt(p_step * (1.0 - p_step) / M);
  CHECK(std::abs(p_step - ms.mean) <= 3.0 * std::hypot(se_step, ms.se));
  CHECK(std::abs(p_step - exact) <= 3.0 * se_step);
  CHECK(std::abs(ms.mean - exact) <= 3.0 * ms.se);

  // stationary acceptance rate is ∫ e^{-x}(2e^{-x} - e^{-2x}) dx = 2/3
  auto tr = imh_sample(spec, 1.0, M, 7);
  CHECK(static_cast<double>(tr.accepted) / M == Approx(2.0 / 3.0).epsilon(0.01));
  CHECK(tr.nonfinite == 0);
}

TEST_CASE("IMH sampling is seeded") {
  ExpExp spec{1.0, 2.0};
  auto a = imh_sample(spec, 1.0, 5000, 42), b = imh_sample(spec, 1.0, 5000, 42), c = imh_sample(spec, 1.0, 5000, 43);
  CHECK(a.x == b.x);
  CHECK(a.x != c.x);
}

TEST_CASE("custom IMH") {
  auto c = custom_expexp(1.0, 2.0);
  IMHSpec spec{c};
  CHECK_FALSE(imh_exponent(spec).has_value());
  Rng r1(1);
  CHECK_THROWS(imh_sample_target(spec, r1));
  // weights agree with the closed family up to a constant
  double off = imh_log_weight(spec, 1.0) - imh_log_weight(ExpExp{1.0, 2.0}, 1.0);
  for (double x : {0.1, 2.0, 7.0}) CHECK(imh_log_weight(spec, x) - imh_log_weight(ExpExp{1.0, 2.0}, x) == Approx(off));

  // detailed balance π(x)q(y)α(x,y) = π(y)q(x)α(y,x)
  auto flux = [&](double x, double y) {
    double la = std::min(0.0, imh_log_weight(spec, y) - imh_log_weight(spec, x));
    return std::exp(c.log_target(x) + c.log_proposal(y) + la);
  };
  for (double x : num::lin_space(0.05, 5.0, 15))
    for (double y : num::lin_space(0.05, 5.0, 15)) CHECK(flux(x, y) == Approx(flux(y, x)).epsilon(1e-12));

  std::vector<double> s_grid{1.0, 4.0, 20.0};
  auto mc = imh_beta_mc(c, s_grid);
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    double want = imh_beta_exact(ExpExp{1.0, 2.0}, s_grid[i]);
    CHECK(std::abs(mc[i].value - want) <= 4.0 * mc[i].se + 1e-12);
  }

  // π = q: every proposal is accepted
  CustomIMH same = custom_expexp(1.0, 1.0);
  same.log_target = same.log_proposal;
  auto tr = imh_sample(IMHSpec{same}, 1.0, 10000, 5);
  CHECK(tr.accepted == 10000);
}

TEST_CASE("pseudo-marginal rates") {
  PMSpec bounded{.marginal = 0.4, .weights = BoundedWeights{2.0}};
  CHECK(pm_bounded_shortcut(bounded));
  auto rb = pm_rate(bounded);
  for (double n : {1.0, 10.0, 50.0}) CHECK(rb.F_inverse(n) == Approx(std::exp(-0.2 * n)).epsilon(1e-10));

  PMSpec moment{.marginal = 1.0, .weights = MomentWeights{3, 2.0}};
  CHECK(pm_beta_prime(moment, 4.0) == Approx(2.0 / 64.0).epsilon(1e-14));
  auto rm = pm_rate(moment);
  for (double n : num::log_space(100.0, 1e5, 8)) CHECK(rm.F_inverse(n) <= 512.0 * std::pow(n, -3.0) * (1.0 + 1e-9));

  PMSpec ln{.marginal = 1.0, .weights = LognormalWeights{1.0}};
  auto rl = pm_rate(ln);
  for (double n : {10.0, 100.0, 1000.0})
    CHECK(rl.F_inverse(n) == Approx(lognormal_Finv_numeric(1.0, 1.0, n)).epsilon(1e-6));
  CHECK(pm_beta_prime(ln, 1e-9) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unit weights reproduce the marginal chain") {
  auto model = finite_mh_model({0.2, 0.5, 0.3});
  WeightSampler one = [](double, Rng&) { return 1.0; };
  auto a = mh_sample(model, 0.0, 20000, 9);
  auto b = pm_sample(model, one, 0.0, 1.0, 20000, 9);
  CHECK(a.x == b.x);
  CHECK(a.accepted == b.accepted);
}

TEST_CASE("pseudo-marginal chain keeps the target") {
  auto model = finite_mh_model({0.3, 0.7});
  auto tr = pm_sample(model, weight_sampler(LognormalWeights{1.0}), 0.0, 1.0, 1000000, 21);
  std::vector<double> ind(tr.x.size() - 1);
  for (std::size_t i = 1; i < tr.x.size(); ++i) ind[i - 1] = tr.x[i] == 0.0 ? 1.0 : 0.0;
  double p = num::mean_se(ind).mean;
  double se = batch_se(ind, 100);
  CHECK(std::abs(p - 0.3) <= 4.0 * se);
  CHECK(se < 0.01);
  CHECK_THROWS_AS(weight_sampler(BoundedWeights{2.0}), std::invalid_argument);
}

TEST_CASE("decay estimator on a two-state chain") {
  Eigen::MatrixXd P(2, 2);
  P << 0.8, 0.2, 0.2, 0.8;
  FiniteChain ch(P);
  Eigen::VectorXd f(2);
  f << 1.0, -1.0;
  std::vector<int> grid{0, 1, 2, 4, 8};
  auto exact = estimate_decay_exact(ch, f, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(exact.estimate[i] == Approx(std::pow(0.6, 2 * grid[i])).epsilon(1e-12));

  DecayOptions o;
  o.n_grid = grid;
  o.replicas = 4000;
  o.inner = 4;
  auto step = [](double x, Rng& r) {
    bool flip = std::uniform_real_distribution<double>(0.0, 1.0)(r) < 0.2;
    return flip ? 1.0 - x : x;
  };
  auto pi = [](Rng& r) { return std::uniform_real_distribution<double>(0.0, 1.0)(r) < 0.5 ? 0.0 : 1.0; };
  auto fx = [](double x) { return x == 0.0 ? 1.0 : -1.0; };
  auto est = estimate_decay(step, pi, fx, o);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(est.estimate[i] - exact.estimate[i]) <= 4.0 * est.se[i] + 1e-12);

  o.threads = 3;
  auto threaded = estimate_decay(step, pi, fx, o);
  CHECK(threaded.estimate == est.estimate);

  // SE shrinks like 1/√replicas
  o.threads = 1;
  o.n_grid = {2};
  o.replicas = 100;
  double se_small = estimate_decay(step, pi, fx, o).se[0];
  o.replicas = 10000;
  double se_big = estimate_decay(step, pi, fx, o).se[0];
  CHECK(se_small / se_big == Approx(10.0).epsilon(0.4));
}

TEST_CASE("simulated IMH decay stays below the bound") {
  ExpExp spec{1.0, 2.0};
  const double thr = 1.0, tail = std::exp(-thr);
  DecayOptions o;
  o.n_grid = {1, 2, 4, 8, 16, 32};
  o.replicas = 2000;
  o.inner = 5;
  o.seed = 17;
  auto est = estimate_decay([&](double x, Rng& r) { return imh_step(spec, x, r); },
                            [&](Rng& r) { return imh_sample_target(spec, r); },
                            [&](double x) { return (x > thr ? 1.0 : 0.0) - tail; }, o);
  attach_bound(est, imh_rate(spec), 1.0);
  for (std::size_t i = 0; i < est.n.size(); ++i) {
    CHECK(est.estimate[i] <= est.bound[i] + 3.0 * est.se[i]);
    CHECK(est.bound[i] <= 4.0 / est.n[i] * (1.0 + 1e-9));
  }
  std::ostringstream os;
  write_csv(os, est);
  CHECK(os.str().rfind("n,estimate,se,bound\n", 0) == 0);
}
