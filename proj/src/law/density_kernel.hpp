#pragma once

#include "covsv/law/population_spectrum.hpp"
#include "covsv/law/stieltjes.hpp"

#include <vector>

namespace covsv::law::detail {

// rho(E) = Im m(E + i0) / pi without consulting the support structure.
double raw_density(double E, const PopulationSpectrum& spec, const SolverOptions& options = {});

// Bulk [lo, hi] is parametrised by x(theta) = lo + (hi - lo)(1 + cos theta)/2,
// theta in [0, pi], theta = 0 at the upper edge. In this variable the
// square-root (and hard-edge inverse square-root) behaviour at both ends
// becomes smooth, so ordinary Gauss-Kronrod applies.
double bulk_point(double lo, double hi, double theta);
double bulk_angle(double lo, double hi, double x);

// int_{x(theta1)}^{x(theta0)} rho dx for 0 <= theta0 <= theta1 <= pi.
double bulk_integral(const PopulationSpectrum& spec, double lo, double hi, double theta0, double theta1,
                     double tolerance);

// Piecewise description of theta -> int_{x(theta)}^{hi} rho dx: adaptive panel
// boundaries and the cumulative mass at each boundary.
struct CdfTable {
  std::vector<double> theta;
  std::vector<double> cumulative;
};

CdfTable build_cdf_table(const PopulationSpectrum& spec, double lo, double hi, double tolerance);

// Smallest theta with cumulative mass equal to target, found inside the panel
// that contains it. Requires 0 <= target <= table.cumulative.back().
double invert_cdf_table(const PopulationSpectrum& spec, double lo, double hi, const CdfTable& table, double target);

}  // namespace covsv::law::detail
