#include "wpi/numeric.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace wpi::num {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  // Coarse pass to set the relative scale, then refine each panel.
  constexpr int kPanels = 8;
  double h = (b - a) / kPanels;
  std::vector<double> xs(2 * kPanels + 1), fs(2 * kPanels + 1);
  for (int i = 0; i <= 2 * kPanels; ++i) {
    xs[i] = a + 0.5 * h * i;
    fs[i] = f(xs[i]);
  }
  double coarse = 0.0;
  for (int p = 0; p < kPanels; ++p)
    coarse += h / 6.0 * (fs[2 * p] + 4.0 * fs[2 * p + 1] + fs[2 * p + 2]);
  double eps = std::max(abs_tol, rel_tol * std::fabs(coarse)) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    double whole = h / 6.0 * (fs[2 * p] + 4.0 * fs[2 * p + 1] + fs[2 * p + 2]);
    total += simpson_rec(f, xs[2 * p], xs[2 * p + 2], fs[2 * p], fs[2 * p + 1], fs[2 * p + 2],
                         whole, eps, max_depth);
  }
  return total;
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / dp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    r.x[i] = z;
    r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::domain_error("log_space needs positive bounds");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_space(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
  double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

namespace {
std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1))));
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(stream_seed(seed, index));
}

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  double n = static_cast<double>(v.size());
  for (double x : v) out.mean += x;
  out.mean /= n;
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

}  // namespace wpi::num
