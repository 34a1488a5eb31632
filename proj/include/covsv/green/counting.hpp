#pragma once

#include <Eigen/Dense>

namespace covsv::green {

// Eigenvalues of Y^T Y: the min(M, N) given ones padded with N - min(M, N) zeros.

// (N/pi) int_{E1}^{E2} Im m2(w + i eta) dw, evaluated exactly as
// (1/pi) sum_j [atan((E2 - lambda_j)/eta) - atan((E1 - lambda_j)/eta)].
// Throws DomainError unless E1 < E2 and eta > 0.
double smoothed_counting(const Eigen::VectorXd& lambdas, int N, double E1, double E2, double eta);

// The same integral by adaptive Gauss-Kronrod quadrature of Im m2 (relative
// tolerance 1e-9); an independent route used to cross-check the closed form.
double smoothed_counting_quadrature(const Eigen::VectorXd& lambdas, int N, double E1, double E2, double eta);

// #{j : E1 <= lambda_j <= E2} over all N eigenvalues (zeros included).
int sharp_counting(const Eigen::VectorXd& lambdas, int N, double E1, double E2);

}  // namespace covsv::green
