#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace covsv::ensembles {

// Singular value decomposition Y = sum_k sqrt(lambda_k) xi_k zeta_k^T with
// lambda_1 >= ... >= lambda_{min(M,N)} >= 0 the eigenvalues of Y^T Y.
// Sign convention: in every pair (xi_k, zeta_k) the largest-magnitude entry of
// zeta_k is positive. Observables built from products of entries do not
// depend on it.
struct SampleDecomposition {
  int M = 0;
  int N = 0;
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd xi;    // M x min(M,N), empty when vectors were not requested
  Eigen::MatrixXd zeta;  // N x min(M,N)
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::string law;

  int rank() const noexcept { return static_cast<int>(lambdas.size()); }
  bool has_vectors() const noexcept { return xi.cols() == lambdas.size() && lambdas.size() > 0; }
};

enum class SvdPath {
  automatic,  // Gram path when min(M,N) <= gram_threshold, thin SVD otherwise
  gram,       // symmetric eigensolve of the smaller Gram matrix
  thin_svd,   // divide-and-conquer SVD of Y
};

struct DecomposeOptions {
  SvdPath path = SvdPath::automatic;
  bool vectors = true;
  int gram_threshold = 512;
};

// Decomposes Y = Sigma^{1/2} X. Throws DomainError on a size mismatch or
// non-positive Sigma and NumericError if the eigensolver fails.
SampleDecomposition decompose(const Eigen::MatrixXd& X, const Eigen::VectorXd& sigma_diagonal,
                              const DecomposeOptions& options = {});

// Decomposes an already formed Y.
SampleDecomposition decompose_y(const Eigen::MatrixXd& Y, const DecomposeOptions& options = {});

// max_ij |Y - sum_k sqrt(lambda_k) xi_k zeta_k^T|.
double reconstruction_error(const SampleDecomposition& d, const Eigen::MatrixXd& Y);

// max over k != l of |<xi_k, xi_l>|, |<zeta_k, zeta_l>| and over k of ||xi_k|| - 1, ||zeta_k|| - 1.
double orthonormality_error(const SampleDecomposition& d);

// Flips (xi_k, zeta_k) so that the largest-magnitude entry of zeta_k is positive.
void apply_sign_convention(SampleDecomposition& d);

}  // namespace covsv::ensembles
