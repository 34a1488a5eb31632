#pragma once

#include <span>
#include <vector>

namespace covsv::law {

inline constexpr double kDefaultTau = 1e-3;

// Spectral measure of a diagonal population covariance together with the
// matrix shape. `sigma` holds the distinct eigenvalues in strictly descending
// order and `weights` their relative multiplicities (summing to one).
class PopulationSpectrum {
 public:
  // Validates positivity, ordering, normalisation and the tau bounds
  // tau < sigma_min <= sigma_max <= 1/tau, tau <= N/M <= 1/tau.
  // Throws ConfigError on violation.
  static PopulationSpectrum create(std::vector<double> sigma, std::vector<double> weights, int M, int N,
                                   double tau = kDefaultTau);

  // Groups a list of M diagonal entries (any order) into a spectrum.
  static PopulationSpectrum from_diagonal(std::span<const double> diagonal, int N, double tau = kDefaultTau);

  // Sigma = c I.
  static PopulationSpectrum scalar(double c, int M, int N, double tau = kDefaultTau);

  const std::vector<double>& sigma() const noexcept { return sigma_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  int M() const noexcept { return M_; }
  int N() const noexcept { return N_; }
  double r() const noexcept { return static_cast<double>(N_) / static_cast<double>(M_); }
  std::size_t size() const noexcept { return sigma_.size(); }

  bool is_scalar() const noexcept { return sigma_.size() == 1; }

  // Multiplicities weight_i * M, rounded. Throws ConfigError if any product
  // is not within 1e-6 of an integer (the measure is not realisable at this M).
  std::vector<int> multiplicities() const;

  // Length-M diagonal of Sigma in descending order.
  std::vector<double> diagonal() const;

  // Same measure at a different matrix size with the aspect ratio preserved
  // as closely as integers allow (N is given, M = round(N / r)).
  PopulationSpectrum resized(int N) const;

 private:
  PopulationSpectrum(std::vector<double> sigma, std::vector<double> weights, int M, int N)
      : sigma_(std::move(sigma)), weights_(std::move(weights)), M_(M), N_(N) {}

  std::vector<double> sigma_;
  std::vector<double> weights_;
  int M_ = 1;
  int N_ = 1;
};

}  // namespace covsv::law
