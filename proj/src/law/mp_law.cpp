#include "covsv/law/mp_law.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "covsv/core/error.hpp"
#include "density_kernel.hpp"

namespace covsv::law {
namespace {

constexpr double kEdgeWarning = 1e-9;

// Value at 0 of the interpolating polynomial through (xs[i], ys[i]).
double extrapolate_to_zero(const std::vector<double>& xs, std::vector<double> ys) {
  const std::size_t n = xs.size();
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = 0; i + level < n; ++i)
      ys[i] = (xs[i + level] * ys[i] - xs[i] * ys[i + 1]) / (xs[i + level] - xs[i]);
  return ys[0];
}

}  // namespace

bool RegularityReport::all_ok() const {
  for (const auto& e : edges)
    if (!e.ok()) return false;
  for (const auto& b : bulks)
    if (!b.ok) return false;
  return gamma_ok;
}

MpLaw::MpLaw(PopulationSpectrum spec, const StructureOptions& structure_options, const DensityOptions& density_options)
    : spec_(std::move(spec)),
      structure_(find_spectrum_structure(spec_, structure_options)),
      density_options_(density_options) {}

DensityValue MpLaw::density_value(double E) const {
  DensityValue out;
  for (double a : structure_.edges)
    if (std::abs(E - a) < kEdgeWarning) out.edge_warning = true;
  const int k = structure_.bulk_of(E);
  if (k == 0) return out;
  const auto [lo, hi] = structure_.bulk_intervals[static_cast<std::size_t>(k - 1)];
  if (E <= lo || E >= hi) return out;
  out.rho = density_options_.method == DensityMethod::real_axis ? real_axis_density(E) : extrapolated_density(E);
  return out;
}

double MpLaw::real_axis_density(double E) const { return detail::raw_density(E, spec_); }

double MpLaw::extrapolated_density(double E) const {
  const auto& etas = density_options_.eta_ladder;
  std::vector<double> values;
  values.reserve(etas.size());
  for (double eta : etas) values.push_back(solve_m(cplx(E, eta), spec_).m.imag() / std::numbers::pi);
  return std::max(0.0, extrapolate_to_zero(etas, values));
}

double MpLaw::bulk_mass_between(int k, double lo, double hi) const {
  if (k < 1 || k > structure_.p) throw IndexError("bulk index out of range");
  const auto [a, b] = structure_.bulk_intervals[static_cast<std::size_t>(k - 1)];
  lo = std::clamp(lo, a, b);
  hi = std::clamp(hi, a, b);
  if (!(hi > lo)) return 0.0;
  return detail::bulk_integral(spec_, a, b, detail::bulk_angle(a, b, hi), detail::bulk_angle(a, b, lo),
                               density_options_.quadrature_tolerance);
}

ClassicalLocations MpLaw::classical_locations(int k) const {
  if (k < 1 || k > structure_.p) throw IndexError("bulk index " + std::to_string(k) + " outside 1.." +
                                                  std::to_string(structure_.p));
  const auto [lo, hi] = structure_.bulk_intervals[static_cast<std::size_t>(k - 1)];
  const int count = structure_.bulk_count(k);
  const double N = spec_.N();
  const double mass = structure_.bulk_masses[static_cast<std::size_t>(k - 1)];
  if (count > 0 && mass < (count - 0.5) / N)
    throw IndexError("bulk " + std::to_string(k) + " carries mass " + std::to_string(mass) + " < (N_k - 1/2)/N");

  const auto table = detail::build_cdf_table(spec_, lo, hi, density_options_.quadrature_tolerance);
  ClassicalLocations out{k, {}};
  out.gamma.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i)
    out.gamma.push_back(detail::bulk_point(lo, hi, detail::invert_cdf_table(spec_, lo, hi, table, (i - 0.5) / N)));
  return out;
}

double MpLaw::square_root_fit(int k, bool right_edge) const {
  if (k < 1 || k > structure_.p) throw IndexError("bulk index out of range");
  const auto [lo, hi] = structure_.bulk_intervals[static_cast<std::size_t>(k - 1)];
  constexpr int kPoints = 20;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int j = 0; j < kPoints; ++j) {
    const double t = std::pow(10.0, -4.0 + 2.0 * j / (kPoints - 1));
    const double E = right_edge ? hi - t : lo + t;
    const double rho = detail::raw_density(E, spec_);
    if (!(rho > 0.0)) throw SolverError("density vanished inside the bulk at E = " + std::to_string(E), 0.0);
    const double x = std::log(t);
    const double y = std::log(rho);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (kPoints * sxy - sx * sy) / (kPoints * sxx - sx * sx);
}

RegularityReport MpLaw::check_regularity(double tau, double tau_prime, double tau_gamma) const {
  RegularityReport rep;
  rep.tau = tau;
  rep.tau_prime = tau_prime;
  rep.tau_gamma = tau_gamma;
  const auto& edges = structure_.edges;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    EdgeCheck c;
    c.edge = edges[k];
    c.gap_margin = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < edges.size(); ++l)
      if (l != k) c.gap_margin = std::min(c.gap_margin, std::abs(edges[k] - edges[l]));
    const auto& cp = structure_.critical_points[k];
    c.pole_margin = std::numeric_limits<double>::infinity();
    if (!cp.at_infinity)
      for (double s : spec_.sigma()) c.pole_margin = std::min(c.pole_margin, std::abs(cp.x + 1.0 / s));
    c.edge_ok = c.edge >= tau;
    c.gap_ok = c.gap_margin >= tau;
    c.pole_ok = c.pole_margin >= tau;
    rep.edges.push_back(c);
  }
  for (int k = 1; k <= structure_.p; ++k) {
    BulkCheck b;
    const double lo = structure_.bulk_lower(k) + tau_prime;
    const double hi = structure_.bulk_upper(k) - tau_prime;
    if (!(hi > lo)) {
      b.min_density = std::numeric_limits<double>::infinity();
      b.ok = true;
    } else {
      constexpr int kGrid = 1000;
      b.min_density = std::numeric_limits<double>::infinity();
      for (int j = 0; j < kGrid; ++j) {
        const double E = lo + (hi - lo) * j / (kGrid - 1);
        b.min_density = std::min(b.min_density, detail::raw_density(E, spec_));
      }
      b.ok = b.min_density > 0.0;
    }
    rep.bulks.push_back(b);
  }
  rep.min_gamma = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= structure_.p; ++k) {
    const auto loc = classical_locations(k);
    if (!loc.gamma.empty()) rep.min_gamma = std::min(rep.min_gamma, loc.gamma.back());
  }
  rep.gamma_ok = rep.min_gamma >= tau_gamma;
  return rep;
}

double density(double E, const PopulationSpectrum& spec) { return MpLaw(spec).density(E); }

}  // namespace covsv::law
