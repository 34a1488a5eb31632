#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "covsv/core/error.hpp"
#include "covsv/ensembles/cache.hpp"
#include "covsv/ensembles/decomposition.hpp"
#include "covsv/ensembles/sampling.hpp"
#include "covsv/ensembles/spectral_index.hpp"
#include "covsv/law/mp_law.hpp"
#include "doctest.h"

using namespace covsv;
using namespace covsv::ensembles;

namespace {

// E q^{2j} for j = 1..4, from the law definitions.
std::array<double, 4> even_moments(EntryKind kind) {
  switch (kind) {
    case EntryKind::gaussian:
      return {1.0, 3.0, 15.0, 105.0};
    case EntryKind::two_moment:
      return {1.0, 1.0, 1.0, 1.0};
    case EntryKind::four_moment:
      return {1.0, 3.0, 9.0, 27.0};  // (2/6) 3^j
  }
  return {};
}

law::SpectrumStructure two_bulk_counts(int n1, int n2) {
  law::SpectrumStructure st;
  st.p = 2;
  st.bulk_counts = {n1, n2};
  st.edges = {10.0, 8.0, 3.0, 1.0};
  st.bulk_intervals = {{8.0, 10.0}, {1.0, 3.0}};
  st.curvatures = {1.0, 1.0, 1.0, 1.0};
  st.N = n1 + n2;
  st.M = n1 + n2;
  return st;
}

}  // namespace

TEST_CASE("entry law moments and parsing") {
  CHECK(EntryLaw::parse("gaussian").moments() == std::array<double, 4>{0, 1, 0, 3});
  CHECK(EntryLaw::parse("two_moment").moments() == std::array<double, 4>{0, 1, 0, 1});
  CHECK(EntryLaw::parse("four_moment").moments() == std::array<double, 4>{0, 1, 0, 3});
  CHECK_THROWS_AS(EntryLaw::parse("cauchy"), ConfigError);
  const EntryLaw g(EntryKind::gaussian), two(EntryKind::two_moment), four(EntryKind::four_moment);
  CHECK(g.matched_order(two) == 3);
  CHECK(g.matched_order(four) == 4);
  CHECK(g.matched_order(g) == 4);
}

TEST_CASE("Monte-Carlo moments match the declared ones within 5 sigma") {
  for (auto kind : {EntryKind::gaussian, EntryKind::two_moment, EntryKind::four_moment}) {
    const EntryLaw law(kind);
    Rng rng = make_rng(99, static_cast<std::uint64_t>(kind));
    constexpr int n = 1'000'000;
    std::array<double, 4> acc{};
    for (int i = 0; i < n; ++i) {
      const double q = law.draw(rng);
      double p = 1.0;
      for (auto& a : acc) a += (p *= q);
    }
    const auto declared = law.moments();
    const auto even = even_moments(kind);
    for (std::size_t j = 0; j < 4; ++j) {
      // Var q^{j+1} = E q^{2(j+1)} - (E q^{j+1})^2
      const double var = even[j] - declared[j] * declared[j];
      const double se = std::sqrt(var / n);
      CHECK(std::abs(acc[j] / n - declared[j]) <= 5.0 * se + 1e-15);
    }
    if (kind == EntryKind::four_moment) CHECK(std::abs(acc[3] / n - 3.0) < 0.02);
  }
}

TEST_CASE("sample_matrix") {
  const auto X = sample_matrix(EntryLaw(EntryKind::gaussian), 200, 200, 1);
  const double bound = 3.0 / std::sqrt(200.0 * 200.0) / std::sqrt(200.0);
  CHECK(std::abs(X.mean()) <= bound);

  const auto R = sample_matrix(EntryLaw(EntryKind::two_moment), 30, 50, 2);
  CHECK((R.array().abs() - 1.0 / std::sqrt(50.0)).abs().maxCoeff() < 1e-15);

  const auto A = sample_matrix(EntryLaw(EntryKind::four_moment), 40, 60, 3, 5);
  const auto B = sample_matrix(EntryLaw(EntryKind::four_moment), 40, 60, 3, 5);
  const auto C = sample_matrix(EntryLaw(EntryKind::four_moment), 40, 60, 3, 6);
  CHECK(A == B);
  CHECK(A != C);
  CHECK_THROWS_AS(sample_matrix(EntryLaw(), 0, 3, 1), DomainError);
}

TEST_CASE("decompose: identity data") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Identity(6, 6);
  for (auto path : {SvdPath::gram, SvdPath::thin_svd}) {
    const auto d = decompose(X, Eigen::VectorXd::Ones(6), {path});
    CHECK((d.lambdas.array() - 1.0).abs().maxCoeff() < 1e-14);
    for (int k = 0; k < 6; ++k) {
      CHECK(d.zeta.col(k).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
      CHECK(d.xi.col(k).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("decompose against a dense eigensolver oracle") {
  const auto X = sample_matrix(EntryLaw(EntryKind::gaussian), 10, 20, 4);
  Eigen::VectorXd sigma(10);
  sigma << 3, 2.5, 2, 2, 1.5, 1, 1, 0.8, 0.5, 0.2;
  const Eigen::MatrixXd Y = scale_rows(X, sigma);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(Y.transpose() * Y);
  const Eigen::VectorXd ev = oracle.eigenvalues().reverse();  // 20 values, the last 10 zero
  for (auto path : {SvdPath::gram, SvdPath::thin_svd}) {
    const auto d = decompose(X, sigma, {path});
    REQUIRE(d.lambdas.size() == 10);
    CHECK((d.lambdas - ev.head(10)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ev.tail(10).cwiseAbs().maxCoeff() < 1e-10);
  }
  const auto d1 = decompose(X, Eigen::VectorXd::Ones(10));
  const auto d4 = decompose(X, Eigen::VectorXd::Constant(10, 4.0));
  CHECK(((d4.lambdas - 4.0 * d1.lambdas).array().abs() <= 1e-12 * d4.lambdas.array()).all());
}

TEST_CASE("decompose invariants on both paths and several shapes") {
  std::mt19937_64 rng(17);
  const std::vector<std::pair<int, int>> shapes{{5, 5}, {8, 13}, {13, 8}, {40, 40}, {60, 25}, {25, 60}, {1, 9}, {9, 1}};
  for (auto [M, N] : shapes) {
    const auto X = sample_matrix(EntryLaw(EntryKind::gaussian), M, N, 7, static_cast<std::uint64_t>(M * 100 + N));
    Eigen::VectorXd sigma = Eigen::VectorXd::LinSpaced(M, 2.0, 0.5);
    const Eigen::MatrixXd Y = scale_rows(X, sigma);
    const auto g = decompose(X, sigma, {SvdPath::gram});
    const auto s = decompose(X, sigma, {SvdPath::thin_svd});
    for (const auto* d : {&g, &s}) {
      CHECK(orthonormality_error(*d) < 1e-10);
      CHECK(reconstruction_error(*d, Y) < 1e-9);
      for (Eigen::Index k = 1; k < d->lambdas.size(); ++k) CHECK(d->lambdas(k) <= d->lambdas(k - 1));
      for (Eigen::Index k = 0; k < d->zeta.cols(); ++k) {
        Eigen::Index at = 0;
        d->zeta.col(k).cwiseAbs().maxCoeff(&at);
        CHECK(d->zeta(at, k) > 0.0);
      }
    }
    CHECK((g.lambdas - s.lambdas).cwiseAbs().maxCoeff() < 1e-10);
    // Generic random spectra are simple, so the vectors agree once signs are fixed.
    CHECK((g.zeta - s.zeta).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((g.xi - s.xi).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("decompose: rank-deficient input is completed to an orthonormal basis") {
  Eigen::MatrixXd X = sample_matrix(EntryLaw(EntryKind::gaussian), 6, 10, 12);
  X.row(5) = X.row(4);  // rank 5
  const Eigen::MatrixXd Y = X;
  for (auto path : {SvdPath::gram, SvdPath::thin_svd}) {
    const auto d = decompose_y(Y, {path});
    CHECK(d.lambdas(5) < 1e-12);
    CHECK(orthonormality_error(d) < 1e-10);
    CHECK(reconstruction_error(d, Y) < 1e-9);
  }
}

TEST_CASE("eigenvalues only") {
  const auto X = sample_matrix(EntryLaw(EntryKind::gaussian), 30, 40, 8);
  DecomposeOptions opt;
  opt.vectors = false;
  const auto d = decompose(X, Eigen::VectorXd::Ones(30), opt);
  const auto full = decompose(X, Eigen::VectorXd::Ones(30));
  CHECK_FALSE(d.has_vectors());
  CHECK((d.lambdas - full.lambdas).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("first moment of the empirical spectral distribution") {
  // E (1/N) Tr Y^T Y = (M/N) mean(sigma) = mean(sigma) / r
  const int M = 60, N = 120;
  Eigen::VectorXd sigma(M);
  for (int i = 0; i < M; ++i) sigma(i) = i < M / 2 ? 3.0 : 1.0;
  constexpr int reps = 200;
  std::vector<double> values;
  for (int t = 0; t < reps; ++t) {
    DecomposeOptions opt;
    opt.vectors = false;
    values.push_back(decompose(sample_matrix(EntryLaw(EntryKind::gaussian), M, N, 31, t), sigma, opt).lambdas.sum() / N);
  }
  double mean = 0, var = 0;
  for (double v : values) mean += v / reps;
  for (double v : values) var += (v - mean) * (v - mean) / (reps - 1);
  const double expected = sigma.mean() * M / N;
  CHECK(std::abs(mean - expected) <= 4.0 * std::sqrt(var / reps));
}

TEST_CASE("alpha prime bookkeeping") {
  const auto one = law::find_spectrum_structure(law::PopulationSpectrum::scalar(1.0, 100, 100));
  CHECK(alpha_prime(1, 1, EdgeSide::right_edge, one).alpha_prime == 1);
  CHECK(alpha_prime(1, 1, EdgeSide::left_edge, one).alpha_prime == 100);

  const auto st = two_bulk_counts(30, 40);
  CHECK(alpha_prime(2, 2, EdgeSide::right_edge, st).alpha_prime == 32);
  CHECK(alpha_prime(2, 1, EdgeSide::left_edge, st).alpha_prime == 70);
  CHECK(alpha_prime(1, 30, EdgeSide::left_edge, st).alpha_prime == 1);
  CHECK_THROWS_AS(alpha_prime(2, 41, EdgeSide::right_edge, st), IndexError);
  CHECK_THROWS_AS(alpha_prime(3, 1, EdgeSide::right_edge, st), IndexError);
  CHECK_THROWS_AS(alpha_prime(1, 0, EdgeSide::right_edge, st), IndexError);
  for (int a = 1; a <= 70; ++a)
    for (auto side : {EdgeSide::right_edge, EdgeSide::left_edge}) {
      const auto idx = from_alpha_prime(a, side, st);
      CHECK(alpha_prime(idx.k, idx.l, side, st).alpha_prime == a);
    }
}

TEST_CASE("edge rescaling") {
  const auto st = two_bulk_counts(3, 2);
  Eigen::VectorXd lambdas(5);
  lambdas << 10.0, 9.0, 8.5, 3.0, 0.9;
  CHECK(rescale_edge_eigenvalue(lambdas, st, 1, 1, EdgeSide::right_edge) == 0.0);
  CHECK(rescale_edge_eigenvalue(lambdas, st, 2, 1, EdgeSide::left_edge) > 0.0);  // 0.9 < a_4 = 1
  // h = 2 from the left edge of bulk 2 is lambda_{2,1} = 3: q = -5^{2/3} (3 - 1).
  CHECK(rescale_edge_eigenvalue(lambdas, st, 2, 2, EdgeSide::left_edge) == doctest::Approx(-2.0 * std::cbrt(25.0)));
  const auto r1 = law::find_spectrum_structure(law::PopulationSpectrum::scalar(1.0, 20, 20));
  Eigen::VectorXd flat = Eigen::VectorXd::Ones(20);
  CHECK_THROWS_AS(rescale_edge_eigenvalue(flat, r1, 1, 1, EdgeSide::left_edge), DomainError);
}

TEST_CASE("Tracy-Widom mean of the rescaled top eigenvalue") {
  const int N = 200;
  const auto st = law::find_spectrum_structure(law::PopulationSpectrum::scalar(1.0, N, N));
  DecomposeOptions opt;
  opt.vectors = false;
  double sum = 0.0;
  constexpr int reps = 2000;
  for (int t = 0; t < reps; ++t) {
    const auto d = decompose(sample_matrix(EntryLaw(EntryKind::gaussian), N, N, 2024, t), Eigen::VectorXd::Ones(N), opt);
    sum += rescale_edge_eigenvalue(d, st, 1, 1, EdgeSide::right_edge);
  }
  CHECK(std::abs(sum / reps + 1.2) <= 0.3);
}

TEST_CASE("binary cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "covsv_cache_test";
  std::filesystem::create_directories(dir);
  const auto file = dir / "decomp.bin";
  std::vector<SampleDecomposition> records;
  for (int t = 0; t < 3; ++t) {
    auto d = decompose(sample_matrix(EntryLaw(EntryKind::four_moment), 7, 11, 5, t), Eigen::VectorXd::Ones(7));
    d.seed = 5;
    d.replicate = static_cast<std::uint64_t>(t);
    d.law = "four_moment";
    records.push_back(std::move(d));
  }
  DecomposeOptions values_only;
  values_only.vectors = false;
  records.push_back(decompose(sample_matrix(EntryLaw(), 4, 3, 1), Eigen::VectorXd::Ones(4), values_only));
  write_cache(file, records);
  const auto back = read_cache(file);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].M == records[i].M);
    CHECK(back[i].N == records[i].N);
    CHECK(back[i].seed == records[i].seed);
    CHECK(back[i].replicate == records[i].replicate);
    CHECK(back[i].law == records[i].law);
    CHECK(back[i].lambdas == records[i].lambdas);
    CHECK(back[i].xi == records[i].xi);
    CHECK(back[i].zeta == records[i].zeta);
  }
  const auto size = std::filesystem::file_size(file);
  std::filesystem::resize_file(file, size - 5);
  CHECK_THROWS_AS(read_cache(file), DataError);
  {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    os << "not a cache";
  }
  CHECK_THROWS_AS(read_cache(file), DataError);
  std::filesystem::remove_all(dir);
}
