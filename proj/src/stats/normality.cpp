#include "covsv/stats/normality.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "covsv/core/error.hpp"
#include "covsv/stats/distributions.hpp"

namespace covsv::stats {
namespace {

double poly(std::initializer_list<double> c, double x) {
  double acc = 0.0;
  for (auto it = std::rbegin(c); it != std::rend(c); ++it) acc = acc * x + *it;
  return acc;
}

void check_size(std::size_t n) {
  if (n < kNormalityMinSize || n > kNormalityMaxSize)
    throw DomainError("normality tests need a sample size in [20, 5000], got " + std::to_string(n));
}

bool is_constant(const std::vector<double>& sorted) {
  return sorted.front() == sorted.back();
}

// log Phi(z) without underflow in the far left tail.
double log_normal_cdf(double z) {
  if (z > -30.0) return std::log(normal_cdf(z));
  // Mills ratio asymptotics
  return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * M_PI) + std::log1p(-1.0 / (z * z));
}

}  // namespace

std::string to_string(NormalityKind kind) {
  return kind == NormalityKind::shapiro_wilk ? "shapiro_wilk" : "anderson_darling";
}

NormalityKind parse_normality_kind(std::string_view name) {
  if (name == "shapiro_wilk") return NormalityKind::shapiro_wilk;
  if (name == "anderson_darling") return NormalityKind::anderson_darling;
  throw ConfigError("unknown normality test '" + std::string(name) + "'");
}

NormalityResult shapiro_wilk(std::span<const double> sample) {
  check_size(sample.size());
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (is_constant(x)) return {1.0, 0.0};
  const std::size_t n = x.size();
  const double an = static_cast<double>(n);

  // expected normal order statistics (Blom scores), antisymmetric
  std::vector<double> m(n);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = normal_quantile((static_cast<double>(i) + 1.0 - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly({0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056}, rsn) - m[0] / ssumm2;
  const double a2 = poly({0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633}, rsn) - m[1] / ssumm2;
  const double fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                               (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = m[i] / fac;
  a[0] = -a1;
  a[1] = -a2;
  a[n - 1] = a1;
  a[n - 2] = a2;

  // W as a squared correlation; 1 - W formed directly to keep digits near W = 1
  const double xbar = sample_moments(x).mean;
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  double abar = 0.0;
  for (double v : a) abar += v / an;
  for (std::size_t i = 0; i < n; ++i) {
    const double ca = a[i] - abar, cx = x[i] - xbar;
    ssa += ca * ca;
    ssx += cx * cx;
    sax += ca * cx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  const double ln = std::log(an);
  const double mean = poly({-1.5861, -0.31082, -0.083751, 0.0038915}, ln);
  const double sd = std::exp(poly({-0.4803, -0.082676, 0.0030302}, ln));
  const double p = 1.0 - normal_cdf((std::log(w1) - mean) / sd);
  return {w, std::clamp(p, 0.0, 1.0)};
}

NormalityResult anderson_darling(std::span<const double> sample) {
  check_size(sample.size());
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (is_constant(x)) return {std::numeric_limits<double>::infinity(), 0.0};
  const auto mom = sample_moments(x);
  const double sd = std::sqrt(mom.variance);
  const std::size_t n = x.size();
  const double an = static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = (x[i] - mom.mean) / sd;
    const double hi = (x[n - 1 - i] - mom.mean) / sd;
    s += (2.0 * static_cast<double>(i) + 1.0) * (log_normal_cdf(lo) + log_normal_cdf(-hi));
  }
  const double a2 = -an - s / an;
  const double as = a2 * (1.0 + 0.75 / an + 2.25 / (an * an));
  double p;
  if (as < 0.2)
    p = 1.0 - std::exp(-13.436 + 101.14 * as - 223.73 * as * as);
  else if (as < 0.34)
    p = 1.0 - std::exp(-8.318 + 42.796 * as - 59.938 * as * as);
  else if (as < 0.6)
    p = std::exp(0.9177 - 4.279 * as - 1.38 * as * as);
  else
    p = std::exp(1.2937 - 5.709 * as + 0.0186 * as * as);
  return {as, std::clamp(p, 0.0, 1.0)};
}

double normality_test(std::span<const double> sample, NormalityKind kind) {
  return kind == NormalityKind::shapiro_wilk ? shapiro_wilk(sample).p_value : anderson_darling(sample).p_value;
}

}  // namespace covsv::stats
