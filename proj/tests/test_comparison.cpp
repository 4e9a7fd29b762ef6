#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "wpi/comparison.hpp"
#include "wpi/numeric.hpp"

using namespace wpi;
using doctest::Approx;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double fitted_exponent(const RateBound& rb) {
  std::vector<double> x, y;
  for (double n : num::log_space(1e3, 1e6, 25)) {
    x.push_back(std::log(n));
    y.push_back(rb.log_F_inverse(n));
  }
  return -num::fit_line(x, y).slope;
}

}  // namespace

TEST_CASE("strong link") {
  auto inv = BetaFn::polynomial(1.0, 1.0);
  CHECK(chain_strong(0.5, inv)(4.0) == Approx(1.0).epsilon(1e-14));
  for (double s : {0.3, 2.0, 50.0}) CHECK(chain_strong(1.0, inv)(s) == Approx(inv(s)).epsilon(1e-14));

  // agrees with the rescaling identity c1 = 1/C_P, c2 = C_P
  const double cp = 0.3;
  RateOptions o{.mode = RateMode::Finf};
  RateBound base(BetaFn::polynomial(1.0, 2.0), o);
  RateBound composed(chain_strong(cp, BetaFn::polynomial(1.0, 2.0)), o);
  for (double n : {1.0, 10.0, 100.0, 1e4})
    CHECK(rel(composed.F_inverse(n), base.F_inverse(cp * n) / cp) < 1e-6);
}

TEST_CASE("weak link against a strong-PI first step") {
  const double cp = 0.4;
  auto bp = BetaFn::polynomial(1.0, 1.5);
  auto weak = chain_weak(BetaFn::strong_pi(1.0, cp), bp);
  auto strong = chain_strong(cp, bp);
  for (double s : num::log_space(0.01, 1e3, 20)) CHECK(rel(weak(s), std::min(1.0, strong(s))) < 1e-6);
}

TEST_CASE("weak link output decreases to zero") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  for (int k = 0; k < 10; ++k) {
    auto b = chain_weak(BetaFn::polynomial(1.0, u(rng)), BetaFn::polynomial(1.0, u(rng)));
    double prev = b(1e-3);
    for (double s : num::log_space(1e-3, 1e8, 60)) {
      double v = b(s);
      CHECK(v >= 0.0);
      CHECK(v <= prev * (1.0 + 1e-9));
      prev = v;
    }
    CHECK(b(1e12) < 0.5 * b(1e3));
  }
}

TEST_CASE("conjugate of a composition is the composition of conjugates") {
  auto check_pair = [](const BetaFn& b1, const BetaFn& b2) {
    // infimum path only: no conjugate shortcut
    auto inf_path = BetaFn::callable_log([b1, b2](double s) { return chain_weak_log_value(b1, b2, s); }, "inf");
    for (double v : {0.05, 0.2, 0.5}) {
      double composed = conjugate(b2, conjugate(b1, v));
      CHECK(rel(numeric_conjugate(inf_path, v), composed) < 1e-4);
    }
  };
  check_pair(BetaFn::polynomial(1.0, 1.0), BetaFn::polynomial(1.0, 1.0));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int k = 0; k < 10; ++k) check_pair(BetaFn::polynomial(u(rng), u(rng)), BetaFn::polynomial(u(rng), u(rng)));
}

TEST_CASE("composed polynomial exponent") {
  for (auto [a1, a2] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{1.0, 3.0}}) {
    RateBound rb(chain_weak(BetaFn::polynomial(1.0, a1), BetaFn::polynomial(1.0, a2)));
    CHECK(fitted_exponent(rb) == Approx(a1 * a2 / (1.0 + a1 + a2)).epsilon(0.02 / (a1 * a2 / (1.0 + a1 + a2))));
  }
}

TEST_CASE("spectral gap correction") {
  auto p = BetaFn::polynomial(1.0, 2.0);
  for (double s : {0.5, 3.0}) CHECK(spectral_gap_correct(p, 1.0)(s) == Approx(p(s)).epsilon(1e-15));
  CHECK(spectral_gap_correct(p, 0.5)(2.0) == Approx(1.0).epsilon(1e-14));
  RateOptions o{.mode = RateMode::Finf, .force_numeric = true};
  RateBound base(p, o), corr(spectral_gap_correct(p, 0.5), o);
  for (double n : {1.0, 10.0, 100.0}) CHECK(rel(corr.F_inverse(n), base.F_inverse(0.5 * n)) < 1e-6);
}

TEST_CASE("Dirichlet-form domination term") {
  TailFn sq = [](double s) { return std::min(1.0, 1.0 / (s * s)); };
  auto inf_p = dirichlet_domination_beta(sq, num::kInf);
  auto two = dirichlet_domination_beta(sq, 2.0);
  for (double s : {1.0, 3.0, 40.0}) {
    CHECK(inf_p(s) == Approx(sq(s)).epsilon(1e-14));
    CHECK(two(s) == Approx(1.0 / s).epsilon(1e-14));
  }
  // ε takes the values 0.5 and 0.1 with masses 0.3 and 0.7
  auto tail = weakly_lazy_tail({0.5, 0.1}, {0.3, 0.7});
  for (double s : {0.5, 1.0, 1.9, 2.0, 2.1, 9.9, 10.0, 10.1, 1e3}) {
    double want = 0.0;
    if (1.0 / 0.5 >= s) want += 0.3;
    if (1.0 / 0.1 >= s) want += 0.7;
    CHECK(tail(s) == Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("link pipeline") {
  auto base = BetaFn::polynomial(1.0, 1.0);
  auto same = apply_links(base, {});
  for (double s : {0.1, 1.0, 10.0}) CHECK(same(s) == base(s));
  auto gap = apply_links(base, {GapLink{0.5}});
  CHECK(gap(4.0) == Approx(0.5).epsilon(1e-14));
  auto st = apply_links(base, {StrongLink{0.5}});
  CHECK(st(4.0) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sequences of comparison bounds") {
  SequenceOptions opt;
  opt.n_hi = 200.0;
  opt.n_points = 40;
  auto b1 = BetaFn::strong_pi(1.0, 1.0);
  auto same = beta_sequence_limit([b1](double) { return b1; }, b1, {0.5, 0.1}, opt);
  for (double g : same.gaps) CHECK(g == Approx(0.0).epsilon(1e-12));

  const double cp = 0.5;
  auto family = [cp](double iota) {
    return BetaFn::callable([cp, iota](double s) {
      double x = cp * s;
      double bp = x <= 1.0 ? 1.0 : iota / x;
      return std::min(1.0, bp / cp);
    });
  };
  auto ex = beta_sequence_limit(family, BetaFn::strong_pi(1.0, cp), {0.5, 0.1, 0.01}, opt);
  CHECK(ex.ordered);
  CHECK(ex.decreasing);
  CHECK(ex.gaps.back() < ex.gaps.front());

  auto ln = beta_sequence_limit([](double sigma) { return BetaFn::lognormal_tail(sigma); }, BetaFn::strong_pi(1.0, 1.0),
                                {1.0, 0.5, 0.1}, opt);
  CHECK(ln.ordered);
  CHECK(ln.decreasing);

  CHECK_THROWS_AS(beta_sequence_limit([](double) { return BetaFn::polynomial(0.01, 1.0); }, BetaFn::strong_pi(1.0, 1.0),
                                      {1.0}, opt),
                  std::invalid_argument);
}
