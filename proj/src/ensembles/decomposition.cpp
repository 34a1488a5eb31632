#include "covsv/ensembles/decomposition.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>
#include <sstream>

#include "covsv/core/error.hpp"
#include "covsv/ensembles/sampling.hpp"

namespace covsv::ensembles {
namespace {

// Replaces the columns of V by an orthonormal set spanning the same nested
// subspaces (thin Householder QR with signs chosen so that diag(R) >= 0).
// Numerically null columns come out as some unit vector orthogonal to the rest.
void orthonormalize(Eigen::MatrixXd& V) {
  const Eigen::Index m = V.rows(), n = V.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);
  const auto& R = qr.matrixQR();
  for (Eigen::Index k = 0; k < n; ++k)
    if (R(k, k) < 0.0) Q.col(k) *= -1.0;
  V = std::move(Q);
}

SampleDecomposition gram_path(const Eigen::MatrixXd& Y, bool vectors) {
  const Eigen::Index M = Y.rows(), N = Y.cols();
  const bool left_small = M <= N;
  const Eigen::MatrixXd A = left_small ? Eigen::MatrixXd(Y * Y.transpose()) : Eigen::MatrixXd(Y.transpose() * Y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "symmetric eigensolver failed on the " << A.rows() << " x " << A.cols()
       << " Gram matrix (Frobenius norm " << A.norm() << ")";
    throw NumericError(os.str());
  }
  const Eigen::Index n = A.rows();
  SampleDecomposition d;
  d.M = static_cast<int>(M);
  d.N = static_cast<int>(N);
  d.lambdas.resize(n);
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < n; ++k) d.lambdas(k) = std::max(0.0, es.eigenvalues()(n - 1 - k));
  if (!vectors) return d;

  Eigen::MatrixXd small = es.eigenvectors().rowwise().reverse();
  Eigen::MatrixXd other = left_small ? Eigen::MatrixXd(Y.transpose() * small) : Eigen::MatrixXd(Y * small);
  // Singular values as column norms of Y^T u: absolute error eps ||Y|| instead
  // of the sqrt(eps) ||Y|| that taking square roots of Gram eigenvalues gives.
  Eigen::VectorXd sv = other.colwise().norm().transpose();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return sv(a) > sv(b); });
  Eigen::MatrixXd small_sorted(small.rows(), n), other_sorted(other.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index from = order[static_cast<std::size_t>(k)];
    small_sorted.col(k) = small.col(from);
    const double s = sv(from);
    d.lambdas(k) = s * s;
    other_sorted.col(k) = s > 0.0 ? Eigen::VectorXd(other.col(from) / s) : Eigen::VectorXd(other.col(from));
  }
  small = std::move(small_sorted);
  other = std::move(other_sorted);
  // The derived side loses accuracy like 1/sqrt(lambda); restore exact
  // orthonormality, most accurate (largest lambda) columns first.
  orthonormalize(other);
  if (left_small) {
    d.xi = std::move(small);
    d.zeta = std::move(other);
  } else {
    d.zeta = std::move(small);
    d.xi = std::move(other);
  }
  return d;
}

SampleDecomposition svd_path(const Eigen::MatrixXd& Y, bool vectors) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Y, vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0);
  if (svd.info() != Eigen::Success) {
    std::ostringstream os;
    os << "SVD failed on a " << Y.rows() << " x " << Y.cols() << " matrix (max |entry| " << Y.cwiseAbs().maxCoeff()
       << ")";
    throw NumericError(os.str());
  }
  SampleDecomposition d;
  d.M = static_cast<int>(Y.rows());
  d.N = static_cast<int>(Y.cols());
  d.lambdas = svd.singularValues().array().square();
  if (vectors) {
    d.xi = svd.matrixU();
    d.zeta = svd.matrixV();
  }
  return d;
}

}  // namespace

void apply_sign_convention(SampleDecomposition& d) {
  if (!d.has_vectors()) return;
  for (Eigen::Index k = 0; k < d.zeta.cols(); ++k) {
    Eigen::Index at = 0;
    d.zeta.col(k).cwiseAbs().maxCoeff(&at);
    if (d.zeta(at, k) < 0.0) {
      d.zeta.col(k) *= -1.0;
      d.xi.col(k) *= -1.0;
    }
  }
}

SampleDecomposition decompose_y(const Eigen::MatrixXd& Y, const DecomposeOptions& options) {
  if (Y.size() == 0) throw DomainError("cannot decompose an empty matrix");
  const Eigen::Index n = std::min(Y.rows(), Y.cols());
  bool gram = false;
  switch (options.path) {
    case SvdPath::automatic:
      gram = n <= options.gram_threshold;
      break;
    case SvdPath::gram:
      gram = true;
      break;
    case SvdPath::thin_svd:
      gram = false;
      break;
  }
  SampleDecomposition d = gram ? gram_path(Y, options.vectors) : svd_path(Y, options.vectors);
  apply_sign_convention(d);
  return d;
}

SampleDecomposition decompose(const Eigen::MatrixXd& X, const Eigen::VectorXd& sigma_diagonal,
                              const DecomposeOptions& options) {
  return decompose_y(scale_rows(X, sigma_diagonal), options);
}

double reconstruction_error(const SampleDecomposition& d, const Eigen::MatrixXd& Y) {
  if (!d.has_vectors()) throw DomainError("decomposition holds no singular vectors");
  const Eigen::MatrixXd R = d.xi * d.lambdas.cwiseSqrt().asDiagonal() * d.zeta.transpose();
  return (Y - R).cwiseAbs().maxCoeff();
}

double orthonormality_error(const SampleDecomposition& d) {
  if (!d.has_vectors()) throw DomainError("decomposition holds no singular vectors");
  const Eigen::Index n = d.lambdas.size();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const double a = (d.xi.transpose() * d.xi - I).cwiseAbs().maxCoeff();
  const double b = (d.zeta.transpose() * d.zeta - I).cwiseAbs().maxCoeff();
  return std::max(a, b);
}

}  // namespace covsv::ensembles
