#include "wpi/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "wpi/comparison.hpp"
#include "wpi/kernels.hpp"
#include "wpi/numeric.hpp"
#include "wpi/oracle.hpp"
#include "wpi/weights.hpp"

namespace wpi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<double> arr(const Json& j) {
  std::vector<double> v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

// slope of log y against log x over points with x in [x_lo, x_hi] and y > 0
double loglog_slope(const std::vector<double>& x, const std::vector<double>& logy, double x_lo, double x_hi) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] >= x_lo && x[i] <= x_hi && std::isfinite(logy[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(logy[i]);
    }
  if (lx.size() < 2) return kNaN;
  return num::fit_line(lx, ly).slope;
}

std::vector<double> local_slopes(const std::vector<double>& x, const std::vector<double>& logy) {
  std::vector<double> out(x.size(), kNaN);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t a = i == 0 ? 0 : i - 1, b = std::min(i + 1, x.size() - 1);
    if (a == b) continue;
    out[i] = (logy[b] - logy[a]) / (std::log(x[b]) - std::log(x[a]));
  }
  return out;
}

// Polynomial exponent of a chain of weak links, when every piece is polynomial.
std::optional<double> predicted_exponent(const BetaFn& base, const std::vector<ChainLink>& links) {
  const auto* p = std::get_if<Polynomial>(&base.variant());
  if (!p) return std::nullopt;
  double e = p->c1;
  for (const auto& l : links) {
    if (const auto* w = std::get_if<WeakLink>(&l)) {
      const auto* q = std::get_if<Polynomial>(&w->beta2.variant());
      if (!q) return std::nullopt;
      e = e * q->c1 / (1.0 + e + q->c1);
    } else if (!std::holds_alternative<StrongLink>(l) && !std::holds_alternative<GapLink>(l)) {
      return std::nullopt;
    }
  }
  return e;
}

double rate_envelope(const RateBound& rb, double n, const std::optional<StretchedExpEnvelope>& env) {
  const auto& v = rb.beta().variant();
  if (const auto* s = std::get_if<StrongPI>(&v)) return rb.a() * std::exp(-s->cp * n);
  if (const auto* p = std::get_if<Polynomial>(&v)) return p->c0 * std::pow(1.0 + p->c1, 1.0 + p->c1) * std::pow(n, -p->c1);
  if (env) return env->envelope(n);
  return kNaN;
}

}  // namespace

void write_table(std::ostream& os, const Table& t, const std::string& format) {
  if (format == "csv") {
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
      os << '\n';
    }
    return;
  }
  std::vector<std::size_t> w(t.header.size());
  for (std::size_t i = 0; i < t.header.size(); ++i) w[i] = t.header[i].size();
  for (const auto& r : t.rows)
    for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], fmt(r[i]).size());
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "  " : "") << std::setw(static_cast<int>(w[i])) << t.header[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "  " : "") << std::setw(static_cast<int>(w[i])) << fmt(r[i]);
    os << '\n';
  }
}

std::string emit(const RunConfig& rc, const std::string& stem, const Table& t) {
  std::filesystem::create_directories(rc.out);
  std::string path = (std::filesystem::path(rc.out) / (stem + (rc.format == "csv" ? ".csv" : ".txt"))).string();
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_table(f, t, rc.format);
  return path;
}

// ---------------------------------------------------------------------------

int cmd_rate(const RunConfig& rc, std::ostream& log) {
  const Json& c = rc.doc.at("rate");
  BetaFn beta = beta_from_json(c["beta"], "rate.beta");
  RateOptions ro;
  ro.a = c["a"];
  ro.mode = rate_mode_from_string(c["mode"], "rate.mode");
  RateBound rb(beta, ro);
  std::optional<StretchedExpEnvelope> env;
  if (std::holds_alternative<StretchedExp>(beta.variant())) env = stretched_exp_envelope(rb);
  const bool rw = c["rockner_wang"];
  std::optional<AlphaFn> alpha;
  if (rw) alpha = beta_to_alpha(beta, ro.a);

  auto ns = num::log_space(c["n_min"].get<double>(), c["n_max"].get<double>(), c["n_points"].get<std::size_t>());
  std::vector<double> lf;
  for (double n : ns) lf.push_back(rb.log_F_inverse(n));
  auto slopes = local_slopes(ns, lf);
  Table t;
  t.header = {"n", "F_inverse", "log_F_inverse", "local_slope", "envelope"};
  if (rw) t.header.push_back("rockner_wang");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    std::vector<double> row{ns[i], std::exp(lf[i]), lf[i], slopes[i], rate_envelope(rb, ns[i], env)};
    if (rw) row.push_back(rockner_wang_rate(*alpha, static_cast<int>(std::lround(std::max(1.0, ns[i])))));
    t.add(row);
  }
  std::string path = emit(rc, "rate", t);
  double hi = ns.back();
  double slope = loglog_slope(ns, lf, std::sqrt(ns.front() * hi), hi);
  log << "beta: " << beta.kind() << "  mode: " << (rb.uses_F_infinity() ? "F_inf" : "F_a") << "  a: " << fmt(rb.a())
      << '\n';
  log << "fitted_slope (upper half of n grid): " << fmt(slope) << '\n';
  log << "wrote " << path << '\n';
  return 0;
}

int cmd_chain(const RunConfig& rc, std::ostream& log) {
  const Json& c = rc.doc.at("chain");
  BetaFn base = beta_from_json(c["base"], "chain.base");
  std::vector<ChainLink> links;
  for (std::size_t i = 0; i < c["links"].size(); ++i)
    links.push_back(link_from_json(c["links"][i], "chain.links[" + std::to_string(i) + "]"));
  BetaFn beta = apply_links(base, links);

  Table tb;
  tb.header = {"s", "beta", "base_beta"};
  for (double s : num::log_space(c["s_min"].get<double>(), c["s_max"].get<double>(), c["s_points"].get<std::size_t>()))
    tb.add({s, beta(s), base(s)});
  std::string p1 = emit(rc, "chain_beta", tb);

  RateOptions ro;
  ro.a = c["a"];
  ro.mode = RateMode::Fa;
  RateBound rb(beta, ro);
  auto ns = num::log_space(c["n_min"].get<double>(), c["n_max"].get<double>(), c["n_points"].get<std::size_t>());
  std::vector<double> lf;
  for (double n : ns) lf.push_back(rb.log_F_inverse(n));
  Table tr;
  tr.header = {"n", "F_inverse", "log_F_inverse"};
  for (std::size_t i = 0; i < ns.size(); ++i) tr.add({ns[i], std::exp(lf[i]), lf[i]});
  std::string p2 = emit(rc, "chain_rate", tr);

  double slope = loglog_slope(ns, lf, std::sqrt(ns.front() * ns.back()), ns.back());
  log << "links: " << links.size() << "  composed beta: " << beta.kind() << '\n';
  log << "fitted_exponent: " << fmt(-slope) << '\n';
  if (auto e = predicted_exponent(base, links)) log << "predicted_exponent: " << fmt(*e) << '\n';
  log << "wrote " << p1 << '\n' << "wrote " << p2 << '\n';
  return 0;
}

int cmd_imh(const RunConfig& rc, std::ostream& log) {
  const Json& c = rc.doc.at("imh");
  const std::string fam = c["family"];
  IMHSpec spec;
  double tail_prob;
  const double thr = c["threshold"];
  if (fam == "expexp") {
    spec = ExpExp{c["a1"], c["a2"]};
    tail_prob = std::exp(-c["a1"].get<double>() * thr);
  } else if (fam == "polypoly") {
    spec = PolyPoly{c["b1"], c["b2"]};
    if (thr < 1.0) throw ConfigError("imh.threshold: must be at least 1 for polypoly");
    tail_prob = std::pow(thr, -c["b1"].get<double>());
  } else {
    throw ConfigError("imh.family: expected expexp or polypoly");
  }
  validate(spec);
  const double e = *imh_exponent(spec);

  Table tb;
  tb.header = {"s", "beta", "beta_exact", "envelope"};
  for (double s : num::log_space(1.0, c["s_max"].get<double>(), c["s_points"].get<std::size_t>()))
    tb.add({s, imh_beta(spec, s), imh_beta_exact(spec, s), std::pow(s, -e)});
  std::string p1 = emit(rc, "imh_beta", tb);

  RateBound rb = imh_rate(spec);
  Table tr;
  tr.header = {"n", "F_inverse", "decay_bound"};
  for (double n : num::log_space(1.0, c["n_max"].get<double>(), c["n_points"].get<std::size_t>()))
    tr.add({n, rb.F_inverse(n), rb.decay_bound(n)});
  std::string p2 = emit(rc, "imh_bound", tr);
  log << "exponent: " << fmt(e) << "  F_inverse(n)*n^e at n=1e3: " << fmt(rb.F_inverse(1e3) * std::pow(1e3, e)) << '\n';
  log << "wrote " << p1 << '\n' << "wrote " << p2 << '\n';

  if (c["simulate"].get<bool>()) {
    DecayOptions o;
    int nmax = c["sim_n_max"];
    std::vector<int> grid{0};
    for (double n : num::log_space(1.0, std::max(1, nmax), 25)) {
      int k = static_cast<int>(std::lround(n));
      if (k != grid.back()) grid.push_back(k);
    }
    o.n_grid = grid;
    o.replicas = c["replicas"];
    o.inner = c["inner"];
    o.seed = rc.seed;
    o.threads = rc.threads > 0 ? rc.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto est = estimate_decay([&](double x, Rng& r) { return imh_step(spec, x, r); },
                              [&](Rng& r) { return imh_sample_target(spec, r); },
                              [&](double x) { return (x > thr ? 1.0 : 0.0) - tail_prob; }, o);
    attach_bound(est, rb, 1.0);  // osc² of an indicator
    Table td;
    td.header = {"n", "estimate", "se", "bound"};
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < est.n.size(); ++i) {
      td.add({est.n[i], est.estimate[i], est.se[i], est.bound[i]});
      if (est.se[i] > 0.0) worst = std::max(worst, (est.estimate[i] - est.bound[i]) / est.se[i]);
    }
    std::string p3 = emit(rc, "imh_decay", td);
    log << "steps: " << o.replicas * o.inner * nmax << "  worst (estimate - bound)/se: " << fmt(worst) << '\n';
    log << "wrote " << p3 << '\n';
  }
  return 0;
}

int cmd_pm(const RunConfig& rc, std::ostream& log) {
  const Json& all = rc.doc.at("pm");
  const std::string& sub = rc.subcommand;
  if (sub == "lognormal-rate") {
    const Json& c = all["lognormal_rate"];
    const double cp = c["cp"];
    Table t;
    t.header = {"sigma", "n", "closed_form", "closed_form_capped", "numeric"};
    long bad = 0;
    for (double sigma : arr(c["sigmas"]))
      for (double n : num::log_space(c["n_min"].get<double>(), c["n_max"].get<double>(), c["n_points"].get<std::size_t>())) {
        auto cf = lognormal_Finv(sigma, cp, n);
        double nu = lognormal_Finv_numeric(sigma, cp, n);
        if (cf.raw < nu * (1.0 - 1e-9)) ++bad;
        t.add({sigma, n, cf.raw, cf.value, nu});
      }
    log << "closed form below numeric at " << bad << " points\n";
    log << "wrote " << emit(rc, "pm_lognormal_rate", t) << '\n';
    return bad == 0 ? 0 : 1;
  }
  if (sub == "mixing") {
    const Json& c = all["mixing"];
    const double sigma = c["sigma"], cp = c["cp"];
    Table t;
    t.header = {"epsilon", "H", "n", "F_inverse_at_n", "epsilon_sq"};
    bool ok = true;
    for (double eps : arr(c["epsilons"])) {
      double n = lognormal_mixing_n(eps, sigma, cp);
      double f = lognormal_Finv(sigma, cp, n).raw;
      ok = ok && f <= eps * eps * (1.0 + 1e-12);
      t.add({eps, lognormal_H(eps, cp), n, f, eps * eps});
    }
    log << "F_inverse(n) <= epsilon^2 at every row: " << (ok ? "yes" : "no") << '\n';
    log << "wrote " << emit(rc, "pm_mixing", t) << '\n';
    return ok ? 0 : 1;
  }
  if (sub == "budget") {
    const Json& c = all["budget"];
    const double cp = c["cp"], s0 = c["sigma0_sq"];
    Table t;
    t.header = {"epsilon", "H",     "sigma_star", "sqrtH_sigma_star", "n_star", "N_star",     "B_star",
                "sigma_bar", "N_bar", "n_bar",    "n_bar_bound",      "B_bar",  "B_bar_bound"};
    auto row = [&](const BudgetReport& r) {
      t.add({r.epsilon, r.H, r.sigma_star, std::sqrt(r.H) * r.sigma_star, r.n_star, r.N_star, r.B_star,
             r.has_simplified ? r.sigma_bar : kNaN, r.has_simplified ? r.N_bar : kNaN,
             r.has_simplified ? r.n_bar : kNaN, r.has_simplified ? r.n_bar_bound : kNaN,
             r.has_simplified ? r.B_bar : kNaN, r.has_simplified ? r.B_bar_bound : kNaN});
    };
    for (double eps : arr(c["epsilons"])) row(budget_split(eps, cp, s0));
    double last = kNaN;
    for (double H : arr(c["H_values"])) {
      auto r = budget_from_H(H, cp, s0);
      row(r);
      last = std::sqrt(H) * r.sigma_star;
    }
    log << "sqrt(H)*sigma_star at the largest H: " << fmt(last) << " (limit 3)\n";
    log << "wrote " << emit(rc, "pm_budget", t) << '\n';
    return 0;
  }
  if (sub == "avar-curve") {
    const Json& c = all["avar_curve"];
    const double cp = c["cp"];
    Table t;
    t.header = {"sigma", "v_tilde", "log_v_tilde_over_sigma_sq"};
    for (double s : num::lin_space(c["sigma_min"].get<double>(), c["sigma_max"].get<double>(), c["points"].get<std::size_t>())) {
      double v = lognormal_vtilde(s, cp);
      t.add({s, v, std::log(v / (s * s))});
    }
    double ss = lognormal_sigma_star(cp, c["sigma_min"].get<double>(), c["sigma_max"].get<double>());
    log << "sigma_star: " << fmt(ss) << '\n';
    log << "wrote " << emit(rc, "pm_avar_curve", t) << '\n';
    return 0;
  }
  if (sub == "abc") {
    const Json& c = all["abc"];
    auto ell = arr(c["ell"]), pi = arr(c["pi"]);
    const int p = c["p"];
    Table t;
    t.header = {"N", "C_Np", "finite"};
    for (double N : arr(c["N_values"])) {
      auto k = abc_tail_constant(ell, pi, static_cast<int>(N), p);
      t.add({N, k.finite ? k.value : kNaN, k.finite ? 1.0 : 0.0});
    }
    log << "wrote " << emit(rc, "pm_abc", t) << '\n';
    return 0;
  }
  if (sub == "product") {
    const Json& c = all["product"];
    const double alpha = c["alpha"];
    const int p = c["p"];
    Table t;
    t.header = {"T", "required_N"};
    for (double T : arr(c["T_values"])) t.add({T, static_cast<double>(product_required_N(static_cast<int>(T), alpha))});
    log << "wrote " << emit(rc, "pm_product_N", t) << '\n';
    double b = c["b"], k = c["k"], cc = c["c"], l = c["l"];
    bool finite = product_integral_finite(b, k, cc, l, alpha);
    double I = product_mp_integral(b, k, cc, l, alpha);
    log << "M_p integral finite: " << (finite ? "yes" : "no") << "  value: " << fmt(I) << '\n';
    if (finite) {
      Table tt;
      tt.header = {"s", "tail_bound"};
      for (double s : num::log_space(c["s_min"].get<double>(), c["s_max"].get<double>(), c["s_points"].get<std::size_t>()))
        tt.add({s, product_tail_bound(I, p, s)});
      log << "wrote " << emit(rc, "pm_product_tail", tt) << '\n';
    }
    return 0;
  }
  throw ConfigError("pm: unknown subcommand '" + sub + "' (lognormal-rate, mixing, budget, avar-curve, abc, product)");
}

int cmd_verify(const RunConfig& rc, std::ostream& log) {
  const Json& c = rc.doc.at("verify");
  const int count = c["chains"], dmin = c["d_min"], dmax = c["d_max"];
  if (dmin < 2 || dmax < dmin || dmax > 16) throw ConfigError("verify: need 2 <= d_min <= d_max <= 16");
  std::vector<std::string> kinds;
  for (const auto& k : c["kinds"]) kinds.push_back(k);
  if (kinds.empty()) throw ConfigError("verify.kinds: empty");
  PhiFunctional phi;
  const std::string ph = c["phi"];
  if (ph == "osc2")
    phi = OscSquared{};
  else if (ph == "l2")
    phi = L2Squared{};
  else
    throw ConfigError("verify.phi: expected osc2 or l2");

  std::vector<FiniteChain> chains;
  Table tc;
  tc.header = {"chain", "d", "kind_index", "lambda_min", "checks", "violations", "worst_ratio"};
  for (int i = 0; i < count; ++i) {
    int d = dmin + i % (dmax - dmin + 1);
    chains.push_back(random_reversible_chain(d, num::stream_seed(rc.seed, static_cast<std::uint64_t>(i)),
                                             kinds[i % kinds.size()]));
  }
  VerifyOptions vo;
  vo.n_max = c["n_max"];
  vo.random_f = c["random_f"];
  vo.beta_scale = c["beta_scale"];
  vo.beta_points = c["beta_points"];
  vo.seed = rc.seed;
  auto reps = verify_battery(chains, phi, vo, rc.threads);
  long violations = 0, checks = 0;
  double worst = 0.0;
  int first_bad = -1;
  for (int i = 0; i < count; ++i) {
    const auto& r = reps[i];
    checks += r.checks;
    violations += r.violations;
    worst = std::max(worst, r.worst_ratio);
    if (r.violations > 0 && first_bad < 0) first_bad = i;
    tc.add({static_cast<double>(i), static_cast<double>(chains[i].size()),
            static_cast<double>(std::find(kinds.begin(), kinds.end(), kinds[i % kinds.size()]) - kinds.begin()),
            chains[i].lambda_min(), static_cast<double>(r.checks), static_cast<double>(r.violations), r.worst_ratio});
  }
  log << "battery: " << count << " chains, " << checks << " checks, " << violations << " violations, worst ratio "
      << fmt(worst) << '\n';
  log << "wrote " << emit(rc, "verify_battery", tc) << '\n';
  bool ok = violations == 0;

  if (first_bad >= 0) {
    const auto& ce = *reps[first_bad].counterexample;
    Table t;
    t.header = {"state", "pi", "f"};
    for (int k = 0; k < chains[first_bad].size(); ++k)
      t.add({static_cast<double>(k), chains[first_bad].pi()(k), ce.f(k)});
    log << "counterexample: chain " << first_bad << " (" << route_name(reps[first_bad].route) << "), n=" << ce.n
        << ", lhs=" << fmt(ce.lhs) << ", rhs=" << fmt(ce.rhs) << '\n';
    log << "wrote " << emit(rc, "counterexample", t) << '\n';
  }

  if (c["two_state_check"].get<bool>()) {
    Eigen::MatrixXd P(2, 2);
    P << 0.7, 0.3, 0.2, 0.8;
    FiniteChain ch(P);
    double p1 = ch.pi()(0), p2 = ch.pi()(1), worst_err = 0.0;
    for (double s : num::log_space(1e-2, 1e2, 41)) {
      double closed = std::max(0.0, p1 * p2 - s * p1 * P(0, 1));
      worst_err = std::max(worst_err, std::fabs(sharpest_beta(ch, TSelector::P, OscSquared{}, s) - closed));
    }
    bool pass = worst_err <= 1e-12;
    ok = ok && pass;
    log << "two-state closed form: max error " << fmt(worst_err) << (pass ? " ok" : " FAILED") << '\n';
  }

  if (c["necessity"].get<bool>()) {
    const double c1 = c["necessity_c1"];
    auto rt = necessity_round_trip(c1);
    Table tn;
    tn.header = {"s", "beta1", "beta2", "e_gamma_floor_s"};
    for (std::size_t i = 0; i < rt.s.size(); ++i) tn.add({rt.s[i], rt.beta1[i], rt.beta2[i], rt.e_gamma_floor[i]});
    bool bounds_ok = rt.bounds_hold;
    double slope = -rt.exponent;
    bool pass = std::fabs(rt.exponent - c1) <= 0.1 && bounds_ok;
    ok = ok && pass;
    log << "necessity round trip: exponent " << fmt(-slope) << " (target " << fmt(c1) << "), bounds "
        << (bounds_ok ? "hold" : "VIOLATED") << (pass ? " ok" : " FAILED") << '\n';
    log << "wrote " << emit(rc, "verify_necessity", tn) << '\n';
  }
  log << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
  return ok ? 0 : 1;
}

int run_command(const RunConfig& rc, std::ostream& log) {
  std::filesystem::create_directories(rc.out);
  {
    std::ofstream f(std::filesystem::path(rc.out) / (rc.command + "_config.json"));
    f << rc.doc.dump(2) << '\n';
  }
  if (rc.command == "rate") return cmd_rate(rc, log);
  if (rc.command == "chain") return cmd_chain(rc, log);
  if (rc.command == "imh") return cmd_imh(rc, log);
  if (rc.command == "pm") return cmd_pm(rc, log);
  if (rc.command == "verify") return cmd_verify(rc, log);
  throw ConfigError("unknown command '" + rc.command + "'");
}

}  // namespace wpi
