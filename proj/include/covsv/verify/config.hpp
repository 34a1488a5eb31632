#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "covsv/ensembles/entry_law.hpp"
#include "covsv/ensembles/spectral_index.hpp"
#include "covsv/law/population_spectrum.hpp"
#include "covsv/verify/theta.hpp"

namespace covsv::verify {

using IndexPair = std::pair<int, int>;  // 1-based coordinates

// One observed singular pair: the alpha' given by (k, l, side), with the
// vector-entry products N xi(i) xi(j) and N zeta(mu) zeta(nu) recorded for the
// listed pairs. h selects the eigenvalue for the edge rescaling q_{k,h}.
struct Target {
  int k = 1;
  int l = 1;
  ensembles::EdgeSide side = ensembles::EdgeSide::right_edge;
  int h = 1;
  std::vector<IndexPair> xi_pairs{{1, 1}, {1, 2}};
  std::vector<IndexPair> zeta_pairs{{1, 1}, {1, 2}};
};

struct Thresholds {
  double mean_sigmas = 3.0;        // |mean_A - mean_B| <= mean_sigmas * pooled SE
  double ks_constant = 1.63;       // two-sample KS <= ks_constant * sqrt(2 / replicates)
  double family_alpha = 0.01;      // Bonferroni-corrected overall verdict
  double rigidity_constant = 10.0; // 99th percentile of s_i
  int rigidity_min_n = 200;
  double edge_slope_lo = -0.82, edge_slope_hi = -0.52;
  double bulk_slope_lo = -1.2, bulk_slope_hi = -0.8;
  double deloc_constant = 5.0;     // N D <= c (log N)^2
  double normal_ks = 0.05;
  double variance_lo = 0.9, variance_hi = 1.1;
  double edge_exponent = 0.3;      // edge targets need l <= N_k^0.3
  double bulk_delta = 0.3;         // bulk targets need delta N_k <= l <= (1 - delta) N_k
};

struct ExperimentConfig {
  ensembles::EntryLaw law_a{ensembles::EntryKind::gaussian};
  ensembles::EntryLaw law_b{ensembles::EntryKind::gaussian};
  law::PopulationSpectrum spec = law::PopulationSpectrum::scalar(1.0, 300, 300);
  int replicates = 500;
  std::uint64_t seed = 0;
  std::vector<Target> targets{Target{}};
  std::vector<ThetaId> theta_battery = default_theta_battery();
  Thresholds thresholds;
  std::vector<int> sizes{100, 200, 400, 800};  // rigidity: N values, aspect ratio kept
  int bulk = 1;                                // rigidity: bulk whose edge and middle are fitted
  double tau = law::kDefaultTau;               // classical-location floor for delocalization
  int threads = 0;                             // <= 0: automatic
  bool keep_observables = true;                // store per-replicate rows in the report
};

inline constexpr int kMinReplicates = 100;

// Replicate count and theta battery checks. Throws ConfigError.
void validate(const ExperimentConfig& config);

}  // namespace covsv::verify
