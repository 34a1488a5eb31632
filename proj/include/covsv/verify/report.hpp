#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "covsv/verify/config.hpp"

namespace covsv::verify {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One tested (or merely reported) quantity. A statistic passes when
// lo <= value <= hi; p_value is set for A/B comparisons and feeds the
// Bonferroni-corrected overall verdict.
struct Statistic {
  std::string name;
  std::string kind;  // mean_difference, ks_two_sample, ks_normal, quantile, slope, max_ratio, variance, info
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double standard_error = kNaN;
  double p_value = kNaN;
  bool asserted = true;  // false: reported only
  bool passed = true;
};

// Per-replicate observables of one ensemble, row-major (replicate x column).
struct ObservableTable {
  std::string ensemble;  // "A", "B", or a law / size label
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::size_t c) const;
};

struct ExperimentReport {
  std::string experiment;
  ExperimentConfig config;
  std::vector<ObservableTable> observables;
  std::vector<Statistic> statistics;
  bool in_hypotheses = true;  // false: out-of-hypothesis regime, verdicts not asserted
  std::vector<std::string> notes;

  bool strict_pass = true;   // every asserted statistic within its thresholds
  bool overall_pass = true;  // Bonferroni: asserted p-values >= family_alpha / m, other asserted checks pass
  int bonferroni_tests = 0;

  const Statistic* find(const std::string& name) const;
  // Recomputes strict_pass, overall_pass and bonferroni_tests.
  void finalize();
};

// Mean difference of theta(x) between two samples with pooled CLT error bars
// sqrt(se_a^2 + se_b^2); passes within `sigmas` bars.
Statistic compare_means(const std::string& name, std::span<const double> a, std::span<const double> b,
                        double sigmas);

// Two-sample KS distance against ks_constant * sqrt(2 / n), n the smaller sample size.
Statistic compare_distributions(const std::string& name, std::span<const double> a, std::span<const double> b,
                                double ks_constant);

// Full battery for one observable column: theta means plus KS.
void compare_observable(ExperimentReport& report, const std::string& name, std::span<const double> a,
                        std::span<const double> b);

}  // namespace covsv::verify
