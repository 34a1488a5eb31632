#pragma once

#include <vector>

#include "covsv/law/population_spectrum.hpp"
#include "covsv/law/stieltjes.hpp"
#include "covsv/law/structure.hpp"

namespace covsv::law {

struct DensityValue {
  double rho = 0.0;
  bool edge_warning = false;  // E within 1e-9 of an edge
};

// gamma_{k,1} > ... > gamma_{k,N_k}: the quantiles int_{gamma_{k,i}}^{a_{2k-1}} rho = (i - 1/2)/N.
struct ClassicalLocations {
  int bulk = 1;
  std::vector<double> gamma;
};

struct EdgeCheck {
  double edge = 0.0;
  double gap_margin = 0.0;   // min_{l != k} |a_k - a_l|
  double pole_margin = 0.0;  // min_i |x_k + 1/sigma_i| (infinite at x = infinity)
  bool edge_ok = false;      // a_k >= tau
  bool gap_ok = false;
  bool pole_ok = false;
  bool ok() const { return edge_ok && gap_ok && pole_ok; }
};

struct BulkCheck {
  double min_density = 0.0;  // over [a_{2k} + tau', a_{2k-1} - tau'] on a 1000-point grid
  bool ok = false;
};

struct RegularityReport {
  double tau = 0.0;
  double tau_prime = 0.0;
  double tau_gamma = 0.0;
  std::vector<EdgeCheck> edges;
  std::vector<BulkCheck> bulks;
  double min_gamma = 0.0;
  bool gamma_ok = false;
  bool all_ok() const;
};

enum class DensityMethod {
  real_axis,    // Newton polish of f(m) = E at eta = 0 (seeded by continuation)
  extrapolated  // Richardson extrapolation of Im m(E + i eta)/pi over an eta ladder
};

struct DensityOptions {
  DensityMethod method = DensityMethod::real_axis;
  std::vector<double> eta_ladder{1e-5, 5e-6, 2.5e-6};
  double quadrature_tolerance = 1e-12;
};

// Deformed Marchenko-Pastur law of a population spectrum. Computes the
// support structure once; all queries are const and thread-safe.
class MpLaw {
 public:
  explicit MpLaw(PopulationSpectrum spec, const StructureOptions& structure_options = {},
                 const DensityOptions& density_options = {});

  const PopulationSpectrum& spec() const noexcept { return spec_; }
  const SpectrumStructure& structure() const noexcept { return structure_; }
  int p() const noexcept { return structure_.p; }

  StieltjesValue stieltjes(cplx z) const { return solve_m(z, spec_); }

  // rho(E); zero outside every bulk interval.
  double density(double E) const { return density_value(E).rho; }
  DensityValue density_value(double E) const;

  // int_lo^hi rho restricted to bulk k.
  double bulk_mass_between(int k, double lo, double hi) const;

  ClassicalLocations classical_locations(int k) const;

  // Slope of log rho(edge -/+ t) against log t over 20 log-spaced t in
  // [1e-4, 1e-2]; 1/2 for a regular (square-root) edge.
  double square_root_fit(int k, bool right_edge = true) const;

  RegularityReport check_regularity(double tau, double tau_prime, double tau_gamma) const;
  RegularityReport check_regularity(double tau, double tau_prime) const {
    return check_regularity(tau, tau_prime, tau);
  }

 private:
  double real_axis_density(double E) const;
  double extrapolated_density(double E) const;

  PopulationSpectrum spec_;
  SpectrumStructure structure_;
  DensityOptions density_options_;
};

// Convenience wrapper that builds the structure on the fly.
double density(double E, const PopulationSpectrum& spec);

}  // namespace covsv::law
