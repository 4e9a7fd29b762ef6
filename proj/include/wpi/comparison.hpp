#pragma once

#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "wpi/rate_core.hpp"

namespace wpi {

// s ↦ β′(C_P s)/C_P, for ‖f‖² ≤ E(T1,f)/C_P and E(T1,f) ≤ sE(T2,f) + β′(s)Φ(f).
BetaFn chain_strong(double cp, const BetaFn& beta_prime);

struct ChainWeakOptions {
  double log_s1_lo = -30.0;
  double log_s1_hi = 30.0;
  int grid_points = 400;
  double golden_tol = 1e-10;
};

// β(s) = inf{s1 β2(s2) + β1(s1) : s1 s2 = s}. β1 belongs to the first
// inequality (‖f‖² against E(T1,f)), β2 to the second. The result carries
// K* = K2* ∘ K1* as its conjugate.
BetaFn chain_weak(const BetaFn& beta1, const BetaFn& beta2, const ChainWeakOptions& opt = {});
// The infimum only, no conjugate shortcut attached.
double chain_weak_log_value(const BetaFn& beta1, const BetaFn& beta2, double s, const ChainWeakOptions& opt = {});

// s ↦ β(c_gap s)
BetaFn spectral_gap_correct(const BetaFn& beta, double c_gap);

using TailFn = std::function<double(double)>;

// s ↦ tail(s)^(1/q) with 1/q = 1 - 1/p; p = +inf gives the tail itself.
BetaFn dirichlet_domination_beta(TailFn eps_tail, double p);

// s ↦ μ(ε(X)⁻¹ ≥ s) for a finite state space.
TailFn weakly_lazy_tail(std::vector<double> eps, std::vector<double> mass);

// pipeline links, applied in order to a running β
struct StrongLink {
  double cp = 1.0;
};
struct WeakLink {
  BetaFn beta2;
};
struct GapLink {
  double c_gap = 1.0;
};
struct LazyLink {
  std::vector<double> eps, mass;
  double p = std::numeric_limits<double>::infinity();
};
using ChainLink = std::variant<StrongLink, WeakLink, GapLink, LazyLink>;

BetaFn apply_links(const BetaFn& base, const std::vector<ChainLink>& links);

struct SequenceOptions {
  double a = 1.0;
  double s_lo = 1e-3, s_hi = 1e3;
  int s_points = 61;
  double n_hi = 1e4;
  int n_points = 200;
};

struct SequenceReport {
  std::vector<double> iotas;
  std::vector<double> gaps;  // sup_n F_{2,ι}⁻¹(n) - F_1⁻¹(n)
  bool ordered = true;       // F_{2,ι}⁻¹ ≥ F_1⁻¹ on the n-grid
  bool decreasing = true;    // gaps shrink along the ι list
};

// Throws std::invalid_argument naming (ι, s) when β_{2,ι} < β1 on the s-grid.
SequenceReport beta_sequence_limit(const std::function<BetaFn(double)>& family, const BetaFn& beta1,
                                   const std::vector<double>& iotas, const SequenceOptions& opt = {});

}  // namespace wpi
