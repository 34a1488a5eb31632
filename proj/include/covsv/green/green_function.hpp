#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "covsv/ensembles/decomposition.hpp"
#include "covsv/law/population_spectrum.hpp"

namespace covsv::green {

using cplx = std::complex<double>;

// Index layout of the (M+N)-dimensional linearisation: 0..M-1 is the first
// block (rows of Y), M..M+N-1 the second block (columns of Y).
//
// G(z) = H(z)^{-1}, H = [[-z I, z^{1/2} Y], [z^{1/2} Y^T, -z I]], assembled from
// the singular value decomposition:
//   G11 = sum_k xi_k xi_k^T / (lambda_k - z) - (I - sum_k xi_k xi_k^T) / z
//   G22 = sum_k zeta_k zeta_k^T / (lambda_k - z) - (I - sum_k zeta_k zeta_k^T) / z
//   G12 = z^{-1/2} sum_k sqrt(lambda_k) xi_k zeta_k^T / (lambda_k - z) = G21^T
// with the principal square root (arg z^{1/2} in (0, pi/2) for Im z > 0).
// The deterministic equivalent is Pi = diag(-z^{-1} (1 + m Sigma)^{-1}, m I).
//
// A GreenEvaluation refers to the decomposition it was built from, which must
// outlive it. Bilinear forms cost O((M+N) min(M,N)); the dense matrix is only
// formed on request for small instances.
class GreenEvaluation {
 public:
  GreenEvaluation(const ensembles::SampleDecomposition& decomp, Eigen::VectorXd sigma_diagonal, cplx z, cplx m);

  cplx z() const noexcept { return z_; }
  cplx sqrt_z() const noexcept { return sqrt_z_; }
  cplx m() const noexcept { return m_; }  // deterministic m(z)
  int M() const noexcept { return decomp_->M; }
  int N() const noexcept { return decomp_->N; }
  const Eigen::VectorXd& sigma_diagonal() const noexcept { return sigma_; }

  // (1/M) Tr G11 and (1/N) Tr G22.
  cplx m1() const noexcept { return m1_; }
  cplx m2() const noexcept { return m2_; }
  // sqrt(Im m / (N eta)) + 1/(N eta) with the deterministic m.
  double psi() const noexcept { return psi_; }

  cplx entry(Eigen::Index a, Eigen::Index b) const;
  cplx pi_entry(Eigen::Index a, Eigen::Index b) const;

  // u^T G v and u^T Pi v (bilinear, no complex conjugation).
  cplx bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const;
  cplx pi_bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const;

  // Dense G and Pi; DomainError when min(M, N) > 64.
  Eigen::MatrixXcd dense() const;
  Eigen::MatrixXcd dense_pi() const;

 private:
  const ensembles::SampleDecomposition* decomp_;
  Eigen::VectorXd sigma_;
  cplx z_, sqrt_z_, m_;
  Eigen::VectorXcd resolvent_;  // 1 / (lambda_k - z)
  cplx m1_, m2_;
  double psi_ = 0.0;
};

// Requires Im z > 0 (DomainError otherwise) and a decomposition with vectors.
// m(z) is solved for `spec`; Sigma is spec.diagonal().
GreenEvaluation build_green(const ensembles::SampleDecomposition& decomp, const law::PopulationSpectrum& spec, cplx z);
GreenEvaluation build_green(const ensembles::SampleDecomposition& decomp, const law::PopulationSpectrum& spec,
                            const Eigen::VectorXd& sigma_diagonal, cplx z);

// Empirical Stieltjes transforms from eigenvalues alone; zero eigenvalues
// beyond min(M, N) contribute -1/z.
cplx empirical_m1(const Eigen::VectorXd& lambdas, int M, cplx z);
cplx empirical_m2(const Eigen::VectorXd& lambdas, int N, cplx z);

double psi(cplx m, int N, double eta);

// Pi(z) viewed as a resolvent: the deterministic side of the anisotropic law.
class DeterministicEquivalent {
 public:
  DeterministicEquivalent(Eigen::VectorXd sigma_diagonal, int N, cplx z, cplx m);
  cplx z() const noexcept { return z_; }
  cplx sqrt_z() const noexcept { return sqrt_z_; }
  int M() const noexcept { return static_cast<int>(sigma_.size()); }
  int N() const noexcept { return N_; }
  const Eigen::VectorXd& sigma_diagonal() const noexcept { return sigma_; }
  cplx bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const;
  cplx pi_bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const { return bilinear(u, v); }

 private:
  Eigen::VectorXd sigma_;
  int N_;
  cplx z_, sqrt_z_, m_;
};

// |<a, (G - Pi) b>| with a = S^{-1} u, b = S^{-1} v and
// S^{-1} = diag(z^{1/2} Sigma^{-1/2}, I). Works for any resolvent-like type
// providing bilinear/pi_bilinear; for a DeterministicEquivalent it is 0.
template <class Resolvent>
double anisotropic_error(const Resolvent& g, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const Eigen::Index M = g.M();
  Eigen::VectorXcd a = u.cast<cplx>(), b = v.cast<cplx>();
  for (Eigen::Index i = 0; i < M; ++i) {
    const double s = 1.0 / std::sqrt(g.sigma_diagonal()(i));
    a(i) *= g.sqrt_z() * s;
    b(i) *= g.sqrt_z() * s;
  }
  return std::abs(g.bilinear(a, b) - g.pi_bilinear(a, b));
}

enum class Block { first, second };

// Poisson-kernel form of (G(z) - G(conj z)) / (2i) on one diagonal block at
// z = E + i eta:
//   second block: sum_b eta / ((E - lambda_b)^2 + eta^2) zeta_b(mu) zeta_b(nu)
//                 + eta / (E^2 + eta^2) (delta_{mu nu} - sum_b zeta_b(mu) zeta_b(nu))
// (the last term is the zero modes of Y^T Y when N > M; it vanishes otherwise),
// first block analogously with xi. Indices are local to the block.
double tilde_green(const ensembles::SampleDecomposition& decomp, double E, double eta, Block block, Eigen::Index a,
                   Eigen::Index b);

// One row of a z-grid sweep.
struct ZGridRow {
  cplx z;
  cplx m2;
  double psi = 0.0;
  double anisotropic_error_max = 0.0;
};

// Evaluates m2, Psi and the maximum anisotropic error over the given probe
// pairs at each z.
std::vector<ZGridRow> sweep_z_grid(const ensembles::SampleDecomposition& decomp, const law::PopulationSpectrum& spec,
                                   const std::vector<cplx>& zs,
                                   const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& probes);

}  // namespace covsv::green
