#pragma once

#include <string>
#include <string_view>

#include "covsv/ensembles/decomposition.hpp"
#include "covsv/verify/config.hpp"
#include "covsv/verify/report.hpp"

namespace covsv::verify {

// N xi_a(i) xi_a(j) for t.xi_pairs then N zeta_a(mu) zeta_a(nu) for t.zeta_pairs,
// a = alpha_prime (1-based). Products only, so flipping a singular pair's sign
// leaves them unchanged.
std::vector<double> target_products(const ensembles::SampleDecomposition& d, int alpha_prime, const Target& t);

// s_i = |lambda_{k,i} - gamma_{k,i}| (i ^ (N_k + 1 - i))^{1/3} N^{2/3} over every i of the
// configured bulk, per size in config.sizes; 99th percentile asserted for
// N >= rigidity_min_n. Log-log slopes of the median |lambda - gamma| at the
// top of the bulk and at its middle are asserted when two or more sizes run.
ExperimentReport rigidity_experiment(const ExperimentConfig& config);

// N (max |xi_a(s)|^2 + max |zeta_a(s)|^2) over vectors whose classical
// location is >= tau, for law_a and (if different) law_b.
ExperimentReport delocalization_experiment(const ExperimentConfig& config);

// A/B comparison of N xi(i) xi(j) and N zeta(mu) zeta(nu) at edge targets.
// ConfigError unless the laws match two moments; targets beyond
// l <= N_k^0.3 make the run report-only.
ExperimentReport edge_universality_experiment(const ExperimentConfig& config);

// As the edge experiment for mid-bulk targets plus
// p = rho(gamma) N (lambda - gamma) and joint products. Needs four matched moments.
ExperimentReport bulk_universality_experiment(const ExperimentConfig& config);

// A/B comparison of (q_{k,h}, N xi xi, N zeta zeta) per target; several
// targets in different bulks add the product over all coordinates.
ExperimentReport joint_edge_experiment(const ExperimentConfig& config);

// sqrt(N) zeta_a(mu) (with an independent random sign) against the standard
// normal. ConfigError unless Sigma is scalar.
ExperimentReport normal_limit_check(const ExperimentConfig& config);

// Dispatch by name: rigidity, deloc, edge, bulk, joint, normal.
ExperimentReport run_experiment(std::string_view name, const ExperimentConfig& config);

}  // namespace covsv::verify
