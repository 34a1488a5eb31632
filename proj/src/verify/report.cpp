#include "covsv/verify/report.hpp"

#include <cmath>

#include "covsv/core/error.hpp"
#include "covsv/stats/distributions.hpp"

namespace covsv::verify {

std::vector<double> ObservableTable::column(std::size_t c) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

const Statistic* ExperimentReport::find(const std::string& name) const {
  for (const auto& s : statistics)
    if (s.name == name) return &s;
  return nullptr;
}

void ExperimentReport::finalize() {
  strict_pass = true;
  bonferroni_tests = 0;
  for (auto& s : statistics) {
    s.passed = s.value >= s.lo && s.value <= s.hi;
    if (!in_hypotheses) s.asserted = false;
    if (!s.asserted) continue;
    strict_pass = strict_pass && s.passed;
    if (!std::isnan(s.p_value)) ++bonferroni_tests;
  }
  overall_pass = true;
  const double level = bonferroni_tests > 0 ? config.thresholds.family_alpha / bonferroni_tests : 0.0;
  for (const auto& s : statistics) {
    if (!s.asserted) continue;
    overall_pass = overall_pass && (std::isnan(s.p_value) ? s.passed : s.p_value >= level);
  }
}

Statistic compare_means(const std::string& name, std::span<const double> a, std::span<const double> b,
                        double sigmas) {
  const auto ma = stats::sample_moments(a), mb = stats::sample_moments(b);
  Statistic s;
  s.name = name;
  s.kind = "mean_difference";
  s.value = std::abs(ma.mean - mb.mean);
  s.standard_error = std::hypot(ma.standard_error, mb.standard_error);
  s.lo = 0.0;
  s.hi = sigmas * s.standard_error;
  if (s.standard_error > 0.0)
    s.p_value = 2.0 * (1.0 - stats::normal_cdf(s.value / s.standard_error));
  else
    s.p_value = s.value == 0.0 ? 1.0 : 0.0;
  return s;
}

Statistic compare_distributions(const std::string& name, std::span<const double> a, std::span<const double> b,
                                double ks_constant) {
  const auto r = stats::ks_two_sample(a, b);
  Statistic s;
  s.name = name;
  s.kind = "ks_two_sample";
  s.value = r.statistic;
  s.p_value = r.p_value;
  s.lo = 0.0;
  s.hi = ks_constant * std::sqrt(2.0 / static_cast<double>(std::min(a.size(), b.size())));
  return s;
}

void compare_observable(ExperimentReport& report, const std::string& name, std::span<const double> a,
                        std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("comparison needs two samples of size >= 2");
  const auto& t = report.config.thresholds;
  std::vector<double> ta(a.size()), tb(b.size());
  for (auto id : report.config.theta_battery) {
    for (std::size_t i = 0; i < a.size(); ++i) ta[i] = apply_theta(id, a[i]);
    for (std::size_t i = 0; i < b.size(); ++i) tb[i] = apply_theta(id, b[i]);
    report.statistics.push_back(compare_means(name + "/" + to_string(id), ta, tb, t.mean_sigmas));
  }
  report.statistics.push_back(compare_distributions(name + "/ks", a, b, t.ks_constant));
}

}  // namespace covsv::verify
