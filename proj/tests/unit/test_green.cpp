#include <cmath>
#include <random>

#include "covsv/core/error.hpp"
#include "covsv/ensembles/sampling.hpp"
#include "covsv/green/counting.hpp"
#include "covsv/green/green_function.hpp"
#include "covsv/law/mp_law.hpp"
#include "doctest.h"

using namespace covsv;
using namespace covsv::green;
using ensembles::EntryKind;
using ensembles::EntryLaw;

namespace {

// Oracle: H(z) = [[-z I, z^{1/2} Y], [z^{1/2} Y^T, -z I]] inverted densely.
Eigen::MatrixXcd dense_inverse(const Eigen::MatrixXd& Y, cplx z) {
  const Eigen::Index M = Y.rows(), N = Y.cols();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(M + N, M + N);
  H.topLeftCorner(M, M).diagonal().setConstant(-z);
  H.bottomRightCorner(N, N).diagonal().setConstant(-z);
  H.topRightCorner(M, N) = std::sqrt(z) * Y.cast<cplx>();
  H.bottomLeftCorner(N, M) = std::sqrt(z) * Y.transpose().cast<cplx>();
  return H.fullPivLu().inverse();
}

struct Instance {
  law::PopulationSpectrum spec;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd Y;
  ensembles::SampleDecomposition d;
};

Instance make_instance(int M, int N, std::uint64_t seed, std::uint64_t rep = 0) {
  std::vector<double> diag(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) diag[static_cast<std::size_t>(i)] = i < M / 2 ? 2.0 : 1.0;
  auto spec = law::PopulationSpectrum::from_diagonal(diag, N);
  Eigen::VectorXd sigma = Eigen::Map<Eigen::VectorXd>(diag.data(), M);
  const auto X = ensembles::sample_matrix(EntryLaw(EntryKind::gaussian), M, N, seed, rep);
  Eigen::MatrixXd Y = ensembles::scale_rows(X, sigma);
  auto d = ensembles::decompose(X, sigma);
  return {std::move(spec), std::move(sigma), std::move(Y), std::move(d)};
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v.normalized();
}

const std::vector<cplx> kZs{{0.5, 0.1}, {1.7, 0.01}, {3.0, 0.5}, {-0.4, 0.2}, {6.0, 1e-3}};

}  // namespace

TEST_CASE("spectral assembly equals dense inversion") {
  for (auto [M, N] : std::vector<std::pair<int, int>>{{10, 20}, {20, 10}, {12, 12}}) {
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      const auto inst = make_instance(M, N, 3, rep);
      for (cplx z : kZs) {
        const auto g = build_green(inst.d, inst.spec, inst.sigma, z);
        const Eigen::MatrixXcd G = g.dense();
        const Eigen::MatrixXcd oracle = dense_inverse(inst.Y, z);
        CHECK((G - oracle).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(g.entry(1, M + 2) - oracle(1, M + 2)) < 1e-8);
        CHECK(std::abs(g.entry(M + 3, M + 3) - oracle(M + 3, M + 3)) < 1e-8);
        CHECK(std::abs(g.m2() - G.bottomRightCorner(N, N).trace() / static_cast<double>(N)) < 1e-12);
        CHECK(std::abs(g.m1() - G.topLeftCorner(M, M).trace() / static_cast<double>(M)) < 1e-12);
        CHECK(g.m2().imag() > 0.0);
      }
    }
  }
}

TEST_CASE("bilinear forms match the dense matrices") {
  const auto inst = make_instance(15, 25, 8);
  std::mt19937_64 rng(2);
  for (cplx z : kZs) {
    const auto g = build_green(inst.d, inst.spec, inst.sigma, z);
    const Eigen::MatrixXcd G = g.dense(), P = g.dense_pi();
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXcd u = random_unit(rng, 40).cast<cplx>() * cplx(1.0, 0.3);
      const Eigen::VectorXcd v = random_unit(rng, 40).cast<cplx>();
      CHECK(std::abs(g.bilinear(u, v) - (u.transpose() * G * v)(0, 0)) < 1e-10);
      CHECK(std::abs(g.pi_bilinear(u, v) - (u.transpose() * P * v)(0, 0)) < 1e-12);
    }
  }
}

TEST_CASE("resolvent asymptotics and trace identities") {
  const auto inst = make_instance(10, 20, 5);
  const cplx z(0.0, 1e6);
  const auto g = build_green(inst.d, inst.spec, inst.sigma, z);
  const Eigen::MatrixXcd G = g.dense();
  const Eigen::MatrixXcd R = z * G + Eigen::MatrixXcd::Identity(30, 30);
  // Diagonal blocks approach -1/z at rate |z|^{-2}; the off-diagonal block is
  // z^{1/2} (z^{-1} Y + O(|z|^{-2})) and only decays like |z|^{-1/2}.
  CHECK(R.topLeftCorner(10, 10).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(R.bottomRightCorner(20, 20).cwiseAbs().maxCoeff() < 1e-4);
  const Eigen::MatrixXcd off = R.topRightCorner(10, 20) + (inst.Y / std::sqrt(z)).cast<cplx>();
  CHECK(off.cwiseAbs().maxCoeff() < 1e-8);

  const cplx w(1.3, 0.05);
  const auto h = build_green(inst.d, inst.spec, inst.sigma, w);
  cplx expected = 0.0;
  for (Eigen::Index k = 0; k < inst.d.lambdas.size(); ++k) expected += 1.0 / (inst.d.lambdas(k) - w);
  expected = expected / 20.0 + (20.0 - 10.0) / 20.0 * (-1.0 / w);
  CHECK(std::abs(h.m2() - expected) < 1e-14);
  CHECK(std::abs(empirical_m2(inst.d.lambdas, 20, w) - h.m2()) < 1e-15);
  CHECK(std::abs(empirical_m1(inst.d.lambdas, 10, w) - h.m1()) < 1e-15);
  CHECK_THROWS_AS(build_green(inst.d, inst.spec, inst.sigma, cplx(1.0, 0.0)), DomainError);
  CHECK_THROWS_AS(build_green(inst.d, inst.spec, inst.sigma, cplx(1.0, -0.1)), DomainError);
}

TEST_CASE("resolvent identity on the diagonal blocks and for H") {
  const auto inst = make_instance(8, 14, 6);
  const cplx z1(0.7, 0.2), z2(2.1, 0.05);
  const Eigen::MatrixXcd G1 = build_green(inst.d, inst.spec, inst.sigma, z1).dense();
  const Eigen::MatrixXcd G2 = build_green(inst.d, inst.spec, inst.sigma, z2).dense();
  // G11 and G22 are (Y Y^T - z)^{-1} and (Y^T Y - z)^{-1}.
  auto block_check = [&](Eigen::Index off, Eigen::Index n) {
    const Eigen::MatrixXcd A = G1.block(off, off, n, n), B = G2.block(off, off, n, n);
    return (A - B - (z1 - z2) * A * B).cwiseAbs().maxCoeff();
  };
  CHECK(block_check(0, 8) < 1e-8);
  CHECK(block_check(8, 14) < 1e-8);
  // Full matrix: G1 - G2 = G1 (H2 - H1) G2.
  auto H = [&](cplx z) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(22, 22);
    h.diagonal().setConstant(-z);
    h.topRightCorner(8, 14) = std::sqrt(z) * inst.Y.cast<cplx>();
    h.bottomLeftCorner(14, 8) = std::sqrt(z) * inst.Y.transpose().cast<cplx>();
    return h;
  };
  CHECK((G1 - G2 - G1 * (H(z2) - H(z1)) * G2).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("tilde G identity") {
  for (auto [M, N] : std::vector<std::pair<int, int>>{{10, 20}, {20, 10}}) {
    const auto inst = make_instance(M, N, 9);
    for (auto [E, eta] : std::vector<std::pair<double, double>>{{1.0, 0.1}, {2.5, 0.01}, {0.05, 0.02}}) {
      const cplx z(E, eta);
      const Eigen::MatrixXcd Gz = dense_inverse(inst.Y, z);
      const Eigen::MatrixXcd Gzbar = dense_inverse(inst.Y, std::conj(z));
      const Eigen::MatrixXcd D = (Gz - Gzbar) / cplx(0.0, 2.0);
      double worst = 0.0;
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b)
          worst = std::max(worst, std::abs(D(a, b) - tilde_green(inst.d, E, eta, Block::first, a, b)));
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          worst = std::max(worst, std::abs(D(M + a, M + b) - tilde_green(inst.d, E, eta, Block::second, a, b)));
      CHECK(worst < 1e-10);
      for (int a = 0; a < N; ++a) {
        const double t = tilde_green(inst.d, E, eta, Block::second, a, a);
        CHECK(t >= 0.0);
        CHECK(std::abs(t - build_green(inst.d, inst.spec, inst.sigma, z).entry(M + a, M + a).imag()) < 1e-10);
      }
    }
  }
}

TEST_CASE("tilde G for a single nonzero eigenvalue") {
  const auto X = ensembles::sample_matrix(EntryLaw(), 1, 6, 4);
  const auto d = ensembles::decompose(X, Eigen::VectorXd::Ones(1));
  const double E = 0.7, eta = 0.05, lam = d.lambdas(0);
  const double kernel = eta / ((E - lam) * (E - lam) + eta * eta);
  CHECK(tilde_green(d, E, eta, Block::first, 0, 0) == doctest::Approx(kernel).epsilon(1e-14));
  // The five zero eigenvalues of Y^T Y add eta/(E^2+eta^2) (delta - zeta zeta^T).
  const double zero = eta / (E * E + eta * eta);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      const double zz = d.zeta(a, 0) * d.zeta(b, 0);
      CHECK(tilde_green(d, E, eta, Block::second, a, b) ==
            doctest::Approx(kernel * zz + zero * ((a == b ? 1.0 : 0.0) - zz)).epsilon(1e-12));
    }
}

TEST_CASE("anisotropic error: reductions") {
  const auto inst = make_instance(12, 18, 10);
  const cplx z(1.5, 0.1);
  const auto g = build_green(inst.d, inst.spec, inst.sigma, z);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(30);
  e(12) = 1.0;
  CHECK(anisotropic_error(g, e, e) == doctest::Approx(std::abs(g.entry(12, 12) - g.m())).epsilon(1e-12));

  const DeterministicEquivalent pi(inst.sigma, 18, z, g.m());
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) CHECK(anisotropic_error(pi, random_unit(rng, 30), random_unit(rng, 30)) == 0.0);

  // First block: S^{-1} e_i = z^{1/2} sigma_i^{-1/2} e_i, so the error is |z/sigma_i (G_ii - Pi_ii)|.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(30);
  f(0) = 1.0;
  CHECK(anisotropic_error(g, f, f) ==
        doctest::Approx(std::abs(z / inst.sigma(0) * (g.entry(0, 0) - g.pi_entry(0, 0)))).epsilon(1e-12));
}

TEST_CASE("anisotropic local law at N = 300") {
  const int N = 300;
  const auto spec = law::PopulationSpectrum::scalar(1.0, N, N);
  const auto X = ensembles::sample_matrix(EntryLaw(), N, N, 77);
  const auto d = ensembles::decompose(X, Eigen::VectorXd::Ones(N));
  const cplx z(2.0, std::pow(N, -0.6));
  const auto g = build_green(d, spec, z);
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) worst = std::max(worst, anisotropic_error(g, random_unit(rng, 2 * N), random_unit(rng, 2 * N)));
  CHECK(worst <= 10.0 * g.psi());
}

TEST_CASE("Psi decreases in eta and m2 tracks m") {
  const int N = 200;
  const auto spec = law::PopulationSpectrum::scalar(1.0, N, N);
  for (double E : {0.5, 2.0, 3.8}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 40; ++j) {
      const double eta = std::pow(10.0, std::log10(1.0 / N) * (1.0 - j / 40.0));
      const double p = psi(law::solve_m(cplx(E, eta), spec).m, N, eta);
      CHECK(p < prev);
      prev = p;
    }
  }
  const double tau = 0.1;
  std::vector<cplx> grid;
  for (double E : {0.3, 1.0, 2.0, 3.0, 3.9})
    for (double eta : {std::pow(N, -1.0 + tau), 0.05, 0.3, 1.0}) grid.emplace_back(E, eta);
  int good = 0;
  constexpr int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    const auto d = ensembles::decompose(ensembles::sample_matrix(EntryLaw(), N, N, 41, rep), Eigen::VectorXd::Ones(N));
    bool ok = true;
    for (cplx z : grid) {
      const cplx m = law::solve_m(z, spec).m;
      ok = ok && std::abs(empirical_m2(d.lambdas, N, z) - m) <= 10.0 * psi(m, N, z.imag());
    }
    good += ok ? 1 : 0;
  }
  CHECK(good >= 19);
}

TEST_CASE("smoothed and sharp counting") {
  const auto inst = make_instance(20, 35, 12);
  const auto& lam = inst.d.lambdas;
  CHECK(std::abs(smoothed_counting(lam, 35, -1.0, 50.0, 1e-9) - 35.0) < 1e-6);
  CHECK(sharp_counting(lam, 35, -1.0, 50.0) == 35);
  CHECK(sharp_counting(lam, 35, 1e-12, 50.0) == 20);
  CHECK(smoothed_counting(lam, 35, 100.0, 101.0, 1e-4) <= 0.01);
  for (auto [E1, E2, eta] : std::vector<std::array<double, 3>>{{0.5, 2.0, 0.01}, {-0.5, 0.5, 0.1}, {1.0, 1.3, 1e-3}}) {
    const double exact = smoothed_counting(lam, 35, E1, E2, eta);
    const double quad = smoothed_counting_quadrature(lam, 35, E1, E2, eta);
    CHECK(std::abs(exact - quad) <= 1e-8 * std::max(1.0, exact));
  }
  CHECK_THROWS_AS(smoothed_counting(lam, 35, 2.0, 1.0, 0.1), DomainError);
  CHECK_THROWS_AS(smoothed_counting(lam, 35, 1.0, 2.0, 0.0), DomainError);
}

TEST_CASE("smoothed counting near the upper edge") {
  const int N = 200;
  const double half = 2.0 * std::pow(N, -2.0 / 3.0 + 0.05);
  const double eta = std::pow(N, -2.0 / 3.0 - 0.3);
  const double guard = std::pow(N, -2.0 / 3.0 - 0.1);
  ensembles::DecomposeOptions opt;
  opt.vectors = false;
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = ensembles::decompose(ensembles::sample_matrix(EntryLaw(), N, N, 55, rep), Eigen::VectorXd::Ones(N), opt);
    const double E1 = 4.0 - half, E2 = 4.0 + half;
    const double diff = std::abs(sharp_counting(d.lambdas, N, E1, E2) - smoothed_counting(d.lambdas, N, E1, E2, eta));
    const int near = sharp_counting(d.lambdas, N, E1 - guard, E1 + guard) + sharp_counting(d.lambdas, N, E2 - guard, E2 + guard);
    CHECK(diff <= 1.0 + near);
  }
}

TEST_CASE("z-grid sweep") {
  const auto inst = make_instance(10, 20, 13);
  std::mt19937_64 rng(1);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> probes;
  for (int t = 0; t < 3; ++t) probes.emplace_back(random_unit(rng, 30), random_unit(rng, 30));
  const auto rows = sweep_z_grid(inst.d, inst.spec, kZs, probes);
  REQUIRE(rows.size() == kZs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto g = build_green(inst.d, inst.spec, kZs[i]);
    CHECK(rows[i].m2 == g.m2());
    double worst = 0.0;
    for (const auto& [u, v] : probes) worst = std::max(worst, anisotropic_error(g, u, v));
    CHECK(rows[i].anisotropic_error_max == worst);
  }
}
