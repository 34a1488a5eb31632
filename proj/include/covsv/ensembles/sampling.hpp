#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "covsv/ensembles/entry_law.hpp"

namespace covsv::ensembles {

// X with i.i.d. entries q_ij / sqrt(N), q ~ law. The stream is derived from
// (seed, stream, replicate), so a replicate can be regenerated in isolation.
// Entries are filled column by column.
Eigen::MatrixXd sample_matrix(const EntryLaw& law, int M, int N, std::uint64_t seed, std::uint64_t replicate = 0,
                              std::uint64_t stream = 0);

// Y = Sigma^{1/2} X for diagonal Sigma given by its diagonal.
Eigen::MatrixXd scale_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& sigma_diagonal);

}  // namespace covsv::ensembles
