#include "covsv/ensembles/spectral_index.hpp"

#include <cmath>

#include "covsv/core/error.hpp"

namespace covsv::ensembles {

std::string to_string(EdgeSide side) { return side == EdgeSide::right_edge ? "right_edge" : "left_edge"; }

EdgeSide parse_edge_side(const std::string& name) {
  if (name == "right" || name == "right_edge") return EdgeSide::right_edge;
  if (name == "left" || name == "left_edge") return EdgeSide::left_edge;
  throw ConfigError("edge side must be 'right' or 'left', got '" + name + "'");
}

SpectralIndex alpha_prime(int k, int l, EdgeSide side, const law::SpectrumStructure& structure) {
  if (k < 1 || k > structure.p)
    throw IndexError("bulk index " + std::to_string(k) + " outside 1.." + std::to_string(structure.p));
  const int Nk = structure.bulk_count(k);
  if (l < 1 || l > Nk)
    throw IndexError("position " + std::to_string(l) + " outside 1.." + std::to_string(Nk) + " in bulk " +
                     std::to_string(k));
  SpectralIndex out{k, l, side, 0};
  out.alpha_prime = side == EdgeSide::right_edge ? l + structure.offset(k) : -l + 1 + structure.offset(k) + Nk;
  return out;
}

SpectralIndex from_alpha_prime(int alpha, EdgeSide side, const law::SpectrumStructure& structure) {
  for (int k = 1; k <= structure.p; ++k) {
    const int lo = structure.offset(k) + 1;
    const int hi = structure.offset(k) + structure.bulk_count(k);
    if (alpha >= lo && alpha <= hi) {
      const int l = side == EdgeSide::right_edge ? alpha - structure.offset(k) : hi - alpha + 1;
      return {k, l, side, alpha};
    }
  }
  throw IndexError("alpha' = " + std::to_string(alpha) + " does not fall in any bulk");
}

double bulk_eigenvalue(const Eigen::VectorXd& lambdas, const law::SpectrumStructure& structure, int k, int i) {
  const int alpha = alpha_prime(k, i, EdgeSide::right_edge, structure).alpha_prime;
  if (alpha > lambdas.size())
    throw IndexError("eigenvalue " + std::to_string(alpha) + " requested from " + std::to_string(lambdas.size()));
  return lambdas(alpha - 1);
}

double rescale_edge_eigenvalue(const Eigen::VectorXd& lambdas, const law::SpectrumStructure& structure, int k, int h,
                               EdgeSide side) {
  const int Nk = structure.bulk_count(k);
  const std::size_t edge = static_cast<std::size_t>(side == EdgeSide::right_edge ? 2 * k - 2 : 2 * k - 1);
  const auto& curvature = structure.curvatures.at(edge);
  if (!curvature)
    throw DomainError("edge a_" + std::to_string(edge + 1) + " = " + std::to_string(structure.edges[edge]) +
                      " has no square-root curvature; edge rescaling is unsupported there");
  const double scale = std::pow(static_cast<double>(structure.N), 2.0 / 3.0) / *curvature;
  if (side == EdgeSide::right_edge) return scale * (bulk_eigenvalue(lambdas, structure, k, h) - structure.edges[edge]);
  return -scale * (bulk_eigenvalue(lambdas, structure, k, Nk - h + 1) - structure.edges[edge]);
}

}  // namespace covsv::ensembles
