#pragma once

#include <Eigen/Dense>
#include <string>

#include "covsv/ensembles/decomposition.hpp"
#include "covsv/law/structure.hpp"

namespace covsv::ensembles {

enum class EdgeSide { right_edge, left_edge };

std::string to_string(EdgeSide side);
EdgeSide parse_edge_side(const std::string& name);  // "right"/"right_edge", "left"/"left_edge"

// Position l (1-based) counted from one edge of bulk k, and the matching
// global index alpha' into lambda_1 >= lambda_2 >= ... (1-based).
struct SpectralIndex {
  int k = 1;
  int l = 1;
  EdgeSide side = EdgeSide::right_edge;
  int alpha_prime = 1;
};

// right edge: alpha' = l + sum_{t<k} N_t; left edge: alpha' = -l + 1 + sum_{t<=k} N_t.
// Throws IndexError unless 1 <= k <= p and 1 <= l <= N_k.
SpectralIndex alpha_prime(int k, int l, EdgeSide side, const law::SpectrumStructure& structure);

// Inverse map: the bulk containing alpha' and l measured from `side`.
SpectralIndex from_alpha_prime(int alpha_prime, EdgeSide side, const law::SpectrumStructure& structure);

// lambda_{k,i}: i-th largest eigenvalue attributed to bulk k (1-based).
double bulk_eigenvalue(const Eigen::VectorXd& lambdas, const law::SpectrumStructure& structure, int k, int i);

// Tracy-Widom scaling of the h-th eigenvalue from an edge of bulk k:
//   right: N^{2/3} (lambda_{k,h} - a_{2k-1}) / varpi_{2k-1}
//   left: -N^{2/3} (lambda_{k,N_k-h+1} - a_{2k}) / varpi_{2k}
// Throws DomainError when the edge has no curvature (hard edge at 0).
double rescale_edge_eigenvalue(const Eigen::VectorXd& lambdas, const law::SpectrumStructure& structure, int k, int h,
                               EdgeSide side);
inline double rescale_edge_eigenvalue(const SampleDecomposition& d, const law::SpectrumStructure& structure, int k,
                                      int h, EdgeSide side) {
  return rescale_edge_eigenvalue(d.lambdas, structure, k, h, side);
}

}  // namespace covsv::ensembles
