#include "density_kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>

namespace covsv::law::detail {

double raw_density(double E, const PopulationSpectrum& spec, const SolverOptions& options) {
  const StieltjesValue v = solve_m(cplx(E, 0.0), spec, options);
  return std::max(0.0, v.m.imag()) / std::numbers::pi;
}

double bulk_point(double lo, double hi, double theta) {
  // Half-angle forms keep the distance to the nearer edge accurate.
  if (theta < 0.5 * std::numbers::pi) {
    const double s = std::sin(0.5 * theta);
    return hi - (hi - lo) * s * s;
  }
  const double c = std::cos(0.5 * theta);
  return lo + (hi - lo) * c * c;
}

double bulk_angle(double lo, double hi, double x) {
  const double w = hi - lo;
  if (hi - x < x - lo) return 2.0 * std::asin(std::sqrt(std::clamp((hi - x) / w, 0.0, 1.0)));
  return 2.0 * std::acos(std::sqrt(std::clamp((x - lo) / w, 0.0, 1.0)));
}

double bulk_integral(const PopulationSpectrum& spec, double lo, double hi, double theta0, double theta1,
                     double tolerance) {
  if (!(theta1 > theta0)) return 0.0;
  const double half = 0.5 * (hi - lo);
  auto integrand = [&](double t) {
    const double x = bulk_point(lo, hi, t);
    if (!(x > lo) || !(x < hi)) return 0.0;
    return raw_density(x, spec) * half * std::sin(t);
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, theta0, theta1, 12, tolerance,
                                                                       &error);
}

namespace {

double theta_integrand(const PopulationSpectrum& spec, double lo, double hi, double t) {
  const double x = bulk_point(lo, hi, t);
  if (!(x > lo) || !(x < hi)) return 0.0;
  return raw_density(x, spec) * 0.5 * (hi - lo) * std::sin(t);
}

void split_panel(const PopulationSpectrum& spec, double lo, double hi, double a, double b, double tolerance, int depth,
                 CdfTable& table) {
  auto f = [&](double t) { return theta_integrand(spec, lo, hi, t); };
  double error = 0.0, l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &error, &l1);
  const double budget = std::max(tolerance * (b - a) / std::numbers::pi, 100 * std::numeric_limits<double>::epsilon() * l1);
  if (error > budget && depth < 12) {
    const double mid = 0.5 * (a + b);
    split_panel(spec, lo, hi, a, mid, tolerance, depth + 1, table);
    split_panel(spec, lo, hi, mid, b, tolerance, depth + 1, table);
    return;
  }
  table.theta.push_back(b);
  table.cumulative.push_back(table.cumulative.back() + value);
}

}  // namespace

CdfTable build_cdf_table(const PopulationSpectrum& spec, double lo, double hi, double tolerance) {
  CdfTable table{{0.0}, {0.0}};
  // Start from a modest uniform split so that narrow interior features are seen.
  constexpr int kInitial = 16;
  for (int j = 0; j < kInitial; ++j)
    split_panel(spec, lo, hi, std::numbers::pi * j / kInitial, std::numbers::pi * (j + 1) / kInitial, tolerance, 0,
                table);
  return table;
}

double invert_cdf_table(const PopulationSpectrum& spec, double lo, double hi, const CdfTable& table, double target) {
  const auto& cum = table.cumulative;
  auto it = std::lower_bound(cum.begin() + 1, cum.end(), target);
  if (it == cum.end()) return table.theta.back();
  const std::size_t j = static_cast<std::size_t>(it - cum.begin()) - 1;
  const double a = table.theta[j];
  const double b = table.theta[j + 1];
  auto f = [&](double t) { return theta_integrand(spec, lo, hi, t); };
  auto g = [&](double t) {
    const double partial = boost::math::quadrature::gauss<double, 20>::integrate(f, a, t);
    return std::make_pair(cum[j] + partial - target, f(t));
  };
  const double frac = (target - cum[j]) / std::max(cum[j + 1] - cum[j], 1e-300);
  std::uintmax_t iters = 60;
  return boost::math::tools::newton_raphson_iterate(g, a + frac * (b - a), a, b, 48, iters);
}

}  // namespace covsv::law::detail
