#pragma once

#include <span>
#include <string>
#include <string_view>

namespace covsv::stats {

enum class NormalityKind { shapiro_wilk, anderson_darling };

std::string to_string(NormalityKind kind);
NormalityKind parse_normality_kind(std::string_view name);  // ConfigError on unknown names

inline constexpr std::size_t kNormalityMinSize = 20;
inline constexpr std::size_t kNormalityMaxSize = 5000;

struct NormalityResult {
  double statistic = 0.0;  // W or the size-adjusted A*^2
  double p_value = 0.0;
};

// Royston's polynomial approximation to the W null distribution (n >= 12).
NormalityResult shapiro_wilk(std::span<const double> sample);

// Case 3 (mean and variance estimated); p-value from the D'Agostino-Stephens
// piecewise fit in the adjusted statistic A*^2 = A^2 (1 + 0.75/n + 2.25/n^2).
NormalityResult anderson_darling(std::span<const double> sample);

// p-value of the chosen test. DomainError unless 20 <= n <= 5000; a
// constant sample gets p = 0.
double normality_test(std::span<const double> sample, NormalityKind kind);

}  // namespace covsv::stats
