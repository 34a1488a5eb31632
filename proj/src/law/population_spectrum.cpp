#include "covsv/law/population_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "covsv/core/error.hpp"

namespace covsv::law {

PopulationSpectrum PopulationSpectrum::create(std::vector<double> sigma, std::vector<double> weights, int M, int N,
                                              double tau) {
  if (M < 1 || N < 1) throw ConfigError("M and N must be positive integers");
  if (sigma.empty()) throw ConfigError("sigma must not be empty");
  if (sigma.size() != weights.size()) throw ConfigError("sigma and weights must have equal length");
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) throw ConfigError("sigma[" + std::to_string(i) + "] must be positive");
    if (!(weights[i] > 0.0)) throw ConfigError("weights[" + std::to_string(i) + "] must be positive");
    if (i > 0 && !(sigma[i] < sigma[i - 1])) throw ConfigError("sigma must be strictly descending");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("weights must sum to 1 (got " + std::to_string(total) + ")");
  if (tau > 0.0) {
    const double r = static_cast<double>(N) / M;
    if (!(sigma.back() > tau) || sigma.front() > 1.0 / tau) throw ConfigError("sigma outside (tau, 1/tau]");
    if (r < tau || r > 1.0 / tau) throw ConfigError("aspect ratio N/M outside [tau, 1/tau]");
  }
  return PopulationSpectrum(std::move(sigma), std::move(weights), M, N);
}

PopulationSpectrum PopulationSpectrum::from_diagonal(std::span<const double> diagonal, int N, double tau) {
  if (diagonal.empty()) throw ConfigError("diagonal must not be empty");
  std::map<double, int, std::greater<>> counts;
  for (double d : diagonal) ++counts[d];
  std::vector<double> sigma;
  std::vector<double> weights;
  const double M = static_cast<double>(diagonal.size());
  for (auto [value, count] : counts) {
    sigma.push_back(value);
    weights.push_back(count / M);
  }
  // Renormalise against accumulated rounding.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return create(std::move(sigma), std::move(weights), static_cast<int>(diagonal.size()), N, tau);
}

PopulationSpectrum PopulationSpectrum::scalar(double c, int M, int N, double tau) {
  return create({c}, {1.0}, M, N, tau);
}

std::vector<int> PopulationSpectrum::multiplicities() const {
  std::vector<int> out;
  out.reserve(weights_.size());
  int total = 0;
  for (double w : weights_) {
    const double x = w * M_;
    const double rounded = std::round(x);
    if (std::abs(x - rounded) > 1e-6 || rounded < 1)
      throw ConfigError("weights * M must be positive integers to realise Sigma at M=" + std::to_string(M_));
    out.push_back(static_cast<int>(rounded));
    total += out.back();
  }
  if (total != M_) throw ConfigError("multiplicities do not sum to M");
  return out;
}

std::vector<double> PopulationSpectrum::diagonal() const {
  const auto mult = multiplicities();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(M_));
  for (std::size_t i = 0; i < sigma_.size(); ++i) out.insert(out.end(), static_cast<std::size_t>(mult[i]), sigma_[i]);
  return out;
}

PopulationSpectrum PopulationSpectrum::resized(int N) const {
  const int M = std::max(1, static_cast<int>(std::lround(N / r())));
  return PopulationSpectrum(sigma_, weights_, M, N);
}

}  // namespace covsv::law
