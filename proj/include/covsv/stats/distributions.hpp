#pragma once

#include <span>
#include <vector>

namespace covsv::stats {

double normal_cdf(double x);
double normal_quantile(double p);  // Phi^{-1}, p in (0, 1)

// Kolmogorov limiting survival function P(sup |B| > x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

// c(alpha) = sqrt(-ln(alpha / 2) / 2), the asymptotic Kolmogorov-Smirnov
// critical coefficient (1.628 at alpha = 0.01).
double ks_coefficient(double alpha);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample KS distance of `sample` to the standard normal CDF.
KsResult ks_normal(std::span<const double> sample);

// Two-sample KS distance sup |F_a - F_b| with Stephens' finite-size
// correction of the asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double standard_error = 0.0;
  std::size_t count = 0;
};

// Two-pass mean/variance in index order (deterministic).
Moments sample_moments(std::span<const double> x);

// Empirical q-quantile with linear interpolation between order statistics.
double quantile(std::vector<double> x, double q);
double median(std::vector<double> x);

// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace covsv::stats
