#include "covsv/conftest/conformal_test.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "covsv/core/error.hpp"
#include "covsv/core/parallel.hpp"
#include "covsv/core/rng.hpp"

namespace covsv::conftest {
namespace {

constexpr std::uint64_t kStreamIndexSets = 0;
constexpr std::uint64_t kStreamBootstrap = 1;

// Right singular vectors zeta_k (k in `wanted`, 0-based, descending order of
// singular values) of Q via the eigensystem of the M x M Gram matrix (or the
// N x N one when N < M). Columns of the result follow `wanted`.
Eigen::MatrixXd right_vectors(const Eigen::MatrixXd& Q, const std::vector<int>& wanted) {
  const Eigen::Index M = Q.rows(), N = Q.cols();
  Eigen::MatrixXd out(N, static_cast<Eigen::Index>(wanted.size()));
  if (M <= N) {
    const Eigen::MatrixXd gram = Q * Q.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) throw NumericError("Gram eigensolver failed in the bootstrap");
    for (std::size_t c = 0; c < wanted.size(); ++c) {
      const Eigen::Index col = M - 1 - wanted[c];  // eigenvalues ascend
      Eigen::VectorXd z = Q.transpose() * es.eigenvectors().col(col);
      const double n = z.norm();
      if (!(n > 0.0)) throw DataError("bootstrap sample lost rank");
      out.col(static_cast<Eigen::Index>(c)) = z / n;
    }
  } else {
    const Eigen::MatrixXd gram = Q.transpose() * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    if (es.info() != Eigen::Success) throw NumericError("Gram eigensolver failed in the bootstrap");
    for (std::size_t c = 0; c < wanted.size(); ++c)
      out.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(N - 1 - wanted[c]);
  }
  return out;
}

std::vector<int> draw_without_replacement(int count, int from, Rng& rng) {
  std::vector<int> all(static_cast<std::size_t>(from));
  std::iota(all.begin(), all.end(), 1);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, from - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

void validate(const ConformalTestConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (c.K < 50) throw ConfigError("K must be >= 50, got " + std::to_string(c.K));
  if (static_cast<std::size_t>(c.K) < stats::kNormalityMinSize ||
      static_cast<std::size_t>(c.K) > stats::kNormalityMaxSize)
    throw ConfigError("K = " + std::to_string(c.K) + " is outside the sample sizes of the normality test");
  if (c.R1_size < 2 || c.R2_size < 2) throw ConfigError("R1_size and R2_size must be >= 2");
}

TestDecision conformal_test(const Eigen::MatrixXd& data, const ConformalTestConfig& config) {
  validate(config);
  const Eigen::Index M = data.rows(), N = data.cols();
  if (N < 20 || M < 2)
    throw DataError("conformality test needs N >= 20 columns and M >= 2 rows, got " + std::to_string(M) + " x " +
                    std::to_string(N));
  if (!data.allFinite()) throw DataError("data contains non-finite entries");
  const Eigen::Index rank_cap = std::min(M, N);
  {
    // rank from the Gram spectrum; rounding leaves eigenvalues near eps * top
    const Eigen::VectorXd ev = (M <= N ? Eigen::MatrixXd(data * data.transpose())
                                       : Eigen::MatrixXd(data.transpose() * data))
                                   .selfadjointView<Eigen::Lower>()
                                   .eigenvalues();
    const double top = ev.maxCoeff();
    const auto rank = (ev.array() > top * 1e-10).count();
    if (!(top > 0.0) || rank < 2) throw DataError("data has rank " + std::to_string(rank) + " < 2");
  }
  if (config.R1_size > rank_cap || config.R2_size > N)
    throw ConfigError("index sets larger than the available vectors or coordinates");

  auto rng = make_rng(config.seed, kStreamIndexSets);
  TestDecision out;
  out.R1 = draw_without_replacement(config.R1_size, static_cast<int>(rank_cap), rng);
  out.R2 = draw_without_replacement(config.R2_size, static_cast<int>(N), rng);
  std::vector<int> wanted;
  for (int k : out.R1) wanted.push_back(k - 1);

  const Eigen::MatrixXd original = right_vectors(data, wanted);
  const std::size_t K = static_cast<std::size_t>(config.K);
  const double rootN = std::sqrt(static_cast<double>(N));
  // samples[(k, i)][j]
  std::vector<std::vector<double>> samples(out.R1.size() * out.R2.size(), std::vector<double>(K));
  parallel_for(K, resolve_threads(config.threads), [&](std::size_t j) {
    auto brng = make_rng(config.seed, kStreamBootstrap, j);
    std::uniform_int_distribution<Eigen::Index> pick(0, N - 1);
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(N));
    for (auto& c : cols) c = pick(brng);
    Eigen::MatrixXd Q(M, N);
    for (Eigen::Index c = 0; c < N; ++c) Q.col(c) = data.col(cols[static_cast<std::size_t>(c)]);
    const Eigen::MatrixXd z = right_vectors(Q, wanted);
    for (std::size_t a = 0; a < out.R1.size(); ++a) {
      double dot = 0.0;
      for (Eigen::Index c = 0; c < N; ++c)
        dot += z(c, static_cast<Eigen::Index>(a)) * original(cols[static_cast<std::size_t>(c)], static_cast<Eigen::Index>(a));
      const double sign = dot < 0.0 ? -1.0 : 1.0;
      for (std::size_t b = 0; b < out.R2.size(); ++b)
        samples[a * out.R2.size() + b][j] = sign * rootN * z(out.R2[b] - 1, static_cast<Eigen::Index>(a));
    }
  });

  for (std::size_t a = 0; a < out.R1.size(); ++a)
    for (std::size_t b = 0; b < out.R2.size(); ++b) {
      PairResult pr;
      pr.k = out.R1[a];
      pr.i = out.R2[b];
      pr.p_value = stats::normality_test(samples[a * out.R2.size() + b], config.normality);
      pr.rejected = pr.p_value < config.alpha;
      out.A += pr.rejected ? 0 : 1;
      out.results.push_back(pr);
    }
  out.pairs = static_cast<int>(out.results.size());
  out.fraction = static_cast<double>(out.A) / out.pairs;
  out.reject = out.fraction < 1.0 - config.alpha;
  return out;
}

}  // namespace covsv::conftest
