#include "covsv/green/green_function.hpp"

#include <sstream>

#include "covsv/core/error.hpp"
#include "covsv/law/stieltjes.hpp"

namespace covsv::green {
namespace {

constexpr int kDenseLimit = 64;

void require_upper(cplx z) {
  if (!(z.imag() > 0.0)) {
    std::ostringstream os;
    os << "Green function needs Im z > 0, got z = " << z;
    throw DomainError(os.str());
  }
}

}  // namespace

GreenEvaluation::GreenEvaluation(const ensembles::SampleDecomposition& decomp, Eigen::VectorXd sigma_diagonal, cplx z,
                                 cplx m)
    : decomp_(&decomp), sigma_(std::move(sigma_diagonal)), z_(z), sqrt_z_(std::sqrt(z)), m_(m) {
  require_upper(z);
  if (!decomp.has_vectors()) throw DomainError("Green function assembly needs singular vectors");
  if (sigma_.size() != decomp.M)
    throw DomainError("Sigma has " + std::to_string(sigma_.size()) + " entries, expected M = " +
                      std::to_string(decomp.M));
  const Eigen::Index n = decomp.lambdas.size();
  resolvent_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) resolvent_(k) = 1.0 / (decomp.lambdas(k) - z);
  const cplx s = resolvent_.sum();
  m1_ = (s - static_cast<double>(decomp.M - n) / z) / static_cast<double>(decomp.M);
  m2_ = (s - static_cast<double>(decomp.N - n) / z) / static_cast<double>(decomp.N);
  psi_ = green::psi(m, decomp.N, z.imag());
}

cplx GreenEvaluation::entry(Eigen::Index a, Eigen::Index b) const {
  const Eigen::Index M = decomp_->M, total = decomp_->M + decomp_->N;
  if (a < 0 || b < 0 || a >= total || b >= total) throw IndexError("Green function index out of range");
  const auto& xi = decomp_->xi;
  const auto& zeta = decomp_->zeta;
  const auto& lam = decomp_->lambdas;
  cplx acc = 0.0;
  if (a < M && b < M) {
    double proj = 0.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      const double w = xi(a, k) * xi(b, k);
      acc += w * resolvent_(k);
      proj += w;
    }
    return acc - ((a == b ? 1.0 : 0.0) - proj) / z_;
  }
  if (a >= M && b >= M) {
    double proj = 0.0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      const double w = zeta(a - M, k) * zeta(b - M, k);
      acc += w * resolvent_(k);
      proj += w;
    }
    return acc - ((a == b ? 1.0 : 0.0) - proj) / z_;
  }
  const Eigen::Index i = std::min(a, b), mu = std::max(a, b) - M;
  for (Eigen::Index k = 0; k < lam.size(); ++k) acc += std::sqrt(lam(k)) * xi(i, k) * zeta(mu, k) * resolvent_(k);
  return acc / sqrt_z_;
}

cplx GreenEvaluation::pi_entry(Eigen::Index a, Eigen::Index b) const {
  const Eigen::Index M = decomp_->M, total = decomp_->M + decomp_->N;
  if (a < 0 || b < 0 || a >= total || b >= total) throw IndexError("Green function index out of range");
  if (a != b) return 0.0;
  if (a < M) return -1.0 / (z_ * (1.0 + m_ * sigma_(a)));
  return m_;
}

cplx GreenEvaluation::bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
  const Eigen::Index M = decomp_->M, N = decomp_->N;
  if (u.size() != M + N || v.size() != M + N) throw DomainError("probe vectors must have length M + N");
  const Eigen::MatrixXd& xi = decomp_->xi;
  const Eigen::MatrixXd& zeta = decomp_->zeta;
  const Eigen::VectorXcd pu1 = xi.transpose().cast<cplx>() * u.head(M);
  const Eigen::VectorXcd pv1 = xi.transpose().cast<cplx>() * v.head(M);
  const Eigen::VectorXcd pu2 = zeta.transpose().cast<cplx>() * u.tail(N);
  const Eigen::VectorXcd pv2 = zeta.transpose().cast<cplx>() * v.tail(N);
  const Eigen::VectorXcd sqrt_lam = decomp_->lambdas.cwiseSqrt().cast<cplx>();

  const cplx in1 = pu1.cwiseProduct(pv1).sum();
  const cplx in2 = pu2.cwiseProduct(pv2).sum();
  const cplx g11 = pu1.cwiseProduct(pv1).cwiseProduct(resolvent_).sum() -
                   ((u.head(M).transpose() * v.head(M))(0, 0) - in1) / z_;
  const cplx g22 = pu2.cwiseProduct(pv2).cwiseProduct(resolvent_).sum() -
                   ((u.tail(N).transpose() * v.tail(N))(0, 0) - in2) / z_;
  const Eigen::VectorXcd weight = sqrt_lam.cwiseProduct(resolvent_);
  const cplx g12 = (pu1.cwiseProduct(pv2).cwiseProduct(weight).sum() + pu2.cwiseProduct(pv1).cwiseProduct(weight).sum()) /
                   sqrt_z_;
  return g11 + g22 + g12;
}

cplx GreenEvaluation::pi_bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
  return DeterministicEquivalent(sigma_, decomp_->N, z_, m_).bilinear(u, v);
}

Eigen::MatrixXcd GreenEvaluation::dense() const {
  const Eigen::Index M = decomp_->M, N = decomp_->N;
  if (std::min(M, N) > kDenseLimit)
    throw DomainError("dense Green function is only formed for min(M, N) <= " + std::to_string(kDenseLimit));
  const Eigen::MatrixXcd xi = decomp_->xi.cast<cplx>();
  const Eigen::MatrixXcd zeta = decomp_->zeta.cast<cplx>();
  const Eigen::VectorXcd weight = decomp_->lambdas.cwiseSqrt().cast<cplx>().cwiseProduct(resolvent_) / sqrt_z_;
  Eigen::MatrixXcd G(M + N, M + N);
  G.topLeftCorner(M, M) = xi * resolvent_.asDiagonal() * xi.transpose() -
                          (Eigen::MatrixXcd::Identity(M, M) - xi * xi.transpose()) / z_;
  G.bottomRightCorner(N, N) = zeta * resolvent_.asDiagonal() * zeta.transpose() -
                              (Eigen::MatrixXcd::Identity(N, N) - zeta * zeta.transpose()) / z_;
  G.topRightCorner(M, N) = xi * weight.asDiagonal() * zeta.transpose();
  G.bottomLeftCorner(N, M) = G.topRightCorner(M, N).transpose();
  return G;
}

Eigen::MatrixXcd GreenEvaluation::dense_pi() const {
  const Eigen::Index M = decomp_->M, N = decomp_->N;
  if (std::min(M, N) > kDenseLimit)
    throw DomainError("dense Pi is only formed for min(M, N) <= " + std::to_string(kDenseLimit));
  Eigen::VectorXcd diag(M + N);
  for (Eigen::Index i = 0; i < M; ++i) diag(i) = -1.0 / (z_ * (1.0 + m_ * sigma_(i)));
  diag.tail(N).setConstant(m_);
  return diag.asDiagonal();
}

GreenEvaluation build_green(const ensembles::SampleDecomposition& decomp, const law::PopulationSpectrum& spec,
                            const Eigen::VectorXd& sigma_diagonal, cplx z) {
  require_upper(z);
  const cplx m = law::solve_m(z, spec).m;
  return GreenEvaluation(decomp, sigma_diagonal, z, m);
}

GreenEvaluation build_green(const ensembles::SampleDecomposition& decomp, const law::PopulationSpectrum& spec, cplx z) {
  const auto diag = spec.diagonal();
  return build_green(decomp, spec, Eigen::Map<const Eigen::VectorXd>(diag.data(), static_cast<Eigen::Index>(diag.size())),
                     z);
}

cplx empirical_m1(const Eigen::VectorXd& lambdas, int M, cplx z) {
  cplx s = 0.0;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) s += 1.0 / (lambdas(k) - z);
  return (s - static_cast<double>(M - lambdas.size()) / z) / static_cast<double>(M);
}

cplx empirical_m2(const Eigen::VectorXd& lambdas, int N, cplx z) {
  cplx s = 0.0;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) s += 1.0 / (lambdas(k) - z);
  return (s - static_cast<double>(N - lambdas.size()) / z) / static_cast<double>(N);
}

double psi(cplx m, int N, double eta) {
  const double Neta = static_cast<double>(N) * eta;
  return std::sqrt(std::max(0.0, m.imag()) / Neta) + 1.0 / Neta;
}

DeterministicEquivalent::DeterministicEquivalent(Eigen::VectorXd sigma_diagonal, int N, cplx z, cplx m)
    : sigma_(std::move(sigma_diagonal)), N_(N), z_(z), sqrt_z_(std::sqrt(z)), m_(m) {}

cplx DeterministicEquivalent::bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
  const Eigen::Index M = sigma_.size();
  if (u.size() != M + N_ || v.size() != M + N_) throw DomainError("probe vectors must have length M + N");
  cplx acc = 0.0;
  for (Eigen::Index i = 0; i < M; ++i) acc += u(i) * v(i) * (-1.0 / (z_ * (1.0 + m_ * sigma_(i))));
  acc += m_ * (u.tail(N_).transpose() * v.tail(N_))(0, 0);
  return acc;
}

double tilde_green(const ensembles::SampleDecomposition& decomp, double E, double eta, Block block, Eigen::Index a,
                   Eigen::Index b) {
  if (!(eta > 0.0)) throw DomainError("tilde_green needs eta > 0");
  if (!decomp.has_vectors()) throw DomainError("tilde_green needs singular vectors");
  const Eigen::MatrixXd& V = block == Block::first ? decomp.xi : decomp.zeta;
  if (a < 0 || b < 0 || a >= V.rows() || b >= V.rows()) throw IndexError("tilde_green index out of range");
  double acc = 0.0, proj = 0.0;
  for (Eigen::Index k = 0; k < decomp.lambdas.size(); ++k) {
    const double w = V(a, k) * V(b, k);
    const double d = E - decomp.lambdas(k);
    acc += eta / (d * d + eta * eta) * w;
    proj += w;
  }
  if (V.rows() > V.cols()) acc += eta / (E * E + eta * eta) * ((a == b ? 1.0 : 0.0) - proj);
  return acc;
}

std::vector<ZGridRow> sweep_z_grid(const ensembles::SampleDecomposition& decomp, const law::PopulationSpectrum& spec,
                                   const std::vector<cplx>& zs,
                                   const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& probes) {
  std::vector<ZGridRow> rows;
  rows.reserve(zs.size());
  const auto diag = spec.diagonal();
  const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(diag.data(), static_cast<Eigen::Index>(diag.size()));
  for (cplx z : zs) {
    const auto g = build_green(decomp, spec, sigma, z);
    ZGridRow row{z, g.m2(), g.psi(), 0.0};
    for (const auto& [u, v] : probes) row.anisotropic_error_max = std::max(row.anisotropic_error_max, anisotropic_error(g, u, v));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace covsv::green
