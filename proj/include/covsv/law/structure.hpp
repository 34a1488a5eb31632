#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "covsv/law/population_spectrum.hpp"

namespace covsv::law {

struct CriticalPoint {
  double x = 0.0;
  bool at_infinity = false;  // r = 1: the I_0 critical point is the point at infinity
  bool degenerate = false;   // double root of f', listed twice
  int interval = 0;          // 0 for I_0, i >= 1 for I_i = (-1/sigma_i, -1/sigma_{i-1})
};

// Support structure of the deformed Marchenko-Pastur law. Edges are indexed
// a_1 >= a_2 >= ... >= a_{2p}; bulk k (1-based) is [a_{2k}, a_{2k-1}].
struct SpectrumStructure {
  std::vector<CriticalPoint> critical_points;  // x_1 >= ... >= x_{2p-1}, then x_{2p} in I_0
  std::vector<double> edges;
  int p = 0;
  std::vector<std::pair<double, double>> bulk_intervals;  // {a_{2k}, a_{2k-1}}
  std::vector<double> bulk_masses;                        // int_bulk rho
  std::vector<int> bulk_counts;                           // N_k
  std::vector<std::optional<double>> curvatures;          // varpi per edge, absent at infinity
  double zero_atom_mass = 0.0;                            // max(0, 1 - 1/r)
  std::vector<int> interval_counts;                       // |C cap I_i|, index 0 is I_0
  int N = 0;
  int M = 0;

  double bulk_lower(int k) const { return bulk_intervals.at(static_cast<std::size_t>(k - 1)).first; }
  double bulk_upper(int k) const { return bulk_intervals.at(static_cast<std::size_t>(k - 1)).second; }
  int bulk_count(int k) const { return bulk_counts.at(static_cast<std::size_t>(k - 1)); }
  // Number of eigenvalues in bulks before k (sum_{t<k} N_t).
  int offset(int k) const;
  // 1-based bulk containing E, or 0 if E lies in no bulk interval.
  int bulk_of(double E) const;
};

struct StructureOptions {
  int probes = 256;             // Chebyshev probes per interval for the sign scan of f'
  double root_tolerance = 1e-12;
  double degenerate_gap = 1e-7; // closer roots merge into one degenerate point
  double mass_tolerance = 1e-11;
};

// Locates all critical points of f interval by interval, then edges, bulk
// masses/counts and edge curvatures. Throws StructureError when a bracket
// cannot be established or an interval holds an impossible number of
// critical points.
SpectrumStructure find_spectrum_structure(const PopulationSpectrum& spec, const StructureOptions& options = {});

}  // namespace covsv::law
