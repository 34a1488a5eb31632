#include "covsv/ensembles/sampling.hpp"

#include <cmath>
#include <string>

#include "covsv/core/error.hpp"

namespace covsv::ensembles {

Eigen::MatrixXd sample_matrix(const EntryLaw& law, int M, int N, std::uint64_t seed, std::uint64_t replicate,
                              std::uint64_t stream) {
  if (M < 1 || N < 1) throw DomainError("sample_matrix needs M, N >= 1 (got " + std::to_string(M) + " x " +
                                        std::to_string(N) + ")");
  Rng rng = make_rng(seed, stream, replicate);
  Eigen::MatrixXd X(M, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  double* out = X.data();
  const Eigen::Index total = X.size();
  switch (law.kind()) {
    case EntryKind::gaussian: {
      std::normal_distribution<double> normal;
      for (Eigen::Index i = 0; i < total; ++i) out[i] = scale * normal(rng);
      break;
    }
    default:
      for (Eigen::Index i = 0; i < total; ++i) out[i] = scale * law.draw(rng);
      break;
  }
  return X;
}

Eigen::MatrixXd scale_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& sigma_diagonal) {
  if (sigma_diagonal.size() != X.rows())
    throw DomainError("Sigma has " + std::to_string(sigma_diagonal.size()) + " entries but X has " +
                      std::to_string(X.rows()) + " rows");
  if ((sigma_diagonal.array() <= 0.0).any()) throw DomainError("Sigma must be positive");
  return sigma_diagonal.array().sqrt().matrix().asDiagonal() * X;
}

}  // namespace covsv::ensembles
