#include <algorithm>
#include <cmath>

#include "covsv/core/error.hpp"
#include "covsv/ensembles/sampling.hpp"
#include "covsv/stats/distributions.hpp"
#include "covsv/verify/experiments.hpp"
#include "doctest.h"

using namespace covsv;
using namespace covsv::verify;
using ensembles::EntryKind;
using ensembles::EntryLaw;

namespace {

ExperimentConfig small_config(int M, int N, int replicates, std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.spec = law::PopulationSpectrum::scalar(1.0, M, N);
  c.replicates = replicates;
  c.seed = seed;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("theta battery values") {
  CHECK(apply_theta(ThetaId::identity, -1.5) == -1.5);
  CHECK(apply_theta(ThetaId::square, -1.5) == 2.25);
  CHECK(apply_theta(ThetaId::clipped_cube, 2.0) == 8.0);
  CHECK(apply_theta(ThetaId::clipped_cube, -10.0) == -kThetaClip * kThetaClip * kThetaClip);
  CHECK(apply_theta(ThetaId::bump, 0.0) == 1.0);
  CHECK(apply_theta(ThetaId::bump, 2.0) == doctest::Approx(std::exp(-2.0)));
  const std::vector<double> x{2.0, -3.0, 0.5};
  CHECK(coordinate_product(x) == -3.0);
  for (auto id : default_theta_battery()) CHECK(parse_theta(to_string(id)) == id);
  CHECK_THROWS_AS(parse_theta("sine"), ConfigError);
}

TEST_CASE("mean comparison: constant test function gives an exact zero difference") {
  const std::vector<double> a(50, 1.0), b(80, 1.0);
  const auto s = compare_means("one", a, b, 3.0);
  CHECK(s.value == 0.0);
  CHECK(s.p_value == 1.0);
  ExperimentReport rep;
  rep.statistics.push_back(s);
  rep.finalize();
  CHECK(rep.statistics[0].passed);
  CHECK(rep.overall_pass);
}

TEST_CASE("mean comparison and KS against hand values") {
  const std::vector<double> a{0, 1, 2, 3}, b{1, 2, 3, 4};
  const auto s = compare_means("m", a, b, 3.0);
  const double se = std::sqrt(2 * (5.0 / 3.0) / 4.0);
  CHECK(s.value == doctest::Approx(1.0));
  CHECK(s.standard_error == doctest::Approx(se));
  CHECK(s.hi == doctest::Approx(3 * se));
  CHECK(s.p_value == doctest::Approx(2 * (1 - stats::normal_cdf(1.0 / se))));
  const auto k = compare_distributions("k", a, b, 1.63);
  CHECK(k.value == doctest::Approx(0.25));
  CHECK(k.hi == doctest::Approx(1.63 * std::sqrt(0.5)));
}

TEST_CASE("report verdicts: strict vs Bonferroni") {
  ExperimentReport rep;
  rep.config.thresholds.family_alpha = 0.01;
  Statistic a{"a", "mean_difference", 3.5, 0.0, 3.0, 1.0, 0.006};  // fails 3 SE, passes 0.01/2
  Statistic b{"b", "ks_two_sample", 0.01, 0.0, 0.05, kNaN, 0.5};
  rep.statistics = {a, b};
  rep.finalize();
  CHECK_FALSE(rep.strict_pass);
  CHECK(rep.overall_pass);
  CHECK(rep.bonferroni_tests == 2);
  rep.statistics[0].p_value = 0.001;
  rep.finalize();
  CHECK_FALSE(rep.overall_pass);
  rep.in_hypotheses = false;
  rep.finalize();
  CHECK(rep.strict_pass);
  CHECK(rep.overall_pass);
}

TEST_CASE("config validation") {
  auto c = small_config(20, 20, 99);
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.replicates = 100;
  CHECK_NOTHROW(validate(c));
  c.theta_battery.clear();
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("rigidity: degenerate single-entry case") {
  auto c = small_config(1, 1, 100);
  c.sizes = {1};
  const auto rep = rigidity_experiment(c);
  const auto* s = rep.find("s_max[N=1]");
  REQUIRE(s != nullptr);
  CHECK(std::isfinite(s->value));
  CHECK(s->value > 0.0);
  CHECK(rep.find("edge_slope") == nullptr);
}

TEST_CASE("rigidity: deviations shrink with N") {
  auto c = small_config(40, 40, 100);
  c.sizes = {40, 80, 160};
  const auto rep = rigidity_experiment(c);
  const auto* edge = rep.find("edge_slope");
  const auto* mid = rep.find("mid_slope");
  REQUIRE(edge != nullptr);
  REQUIRE(mid != nullptr);
  CHECK(edge->value < -0.3);
  CHECK(mid->value < -0.6);
  CHECK(rep.find("s_q99[N=160]")->value < 10.0);
  CHECK_FALSE(rep.find("s_q99[N=40]")->asserted);
}

TEST_CASE("delocalization passes for both laws at small size") {
  auto c = small_config(60, 60, 100);
  c.law_b = EntryLaw(EntryKind::two_moment);
  const auto rep = delocalization_experiment(c);
  CHECK(rep.observables.size() == 2);
  CHECK(rep.strict_pass);
  CHECK(rep.find("max_N*D[two_moment]") != nullptr);
}

TEST_CASE("delocalization: single-row toy matches the max of squared normals") {
  // M = 1: zeta is the normalized row of X, so N max zeta^2 ~ 2 log N
  auto c = small_config(1, 400, 200);
  const auto rep = delocalization_experiment(c);
  const double med = stats::median(rep.observables[0].column(2));
  const double scale = 2.0 * std::log(400.0);
  CHECK(med > 0.5 * scale);
  CHECK(med < 1.5 * scale);
}

TEST_CASE("edge experiment: A/B self-test, hypothesis flags, moment checks") {
  auto c = small_config(40, 40, 200);
  auto rep = edge_universality_experiment(c);
  CHECK(rep.in_hypotheses);
  CHECK(rep.observables.size() == 2);
  CHECK(rep.observables[0].columns.size() == 4);
  CHECK(rep.statistics.size() == 4 * 5);
  CHECK(rep.overall_pass);

  c.targets[0].l = 20;  // mid-bulk with two moments matched: report only
  c.law_b = EntryLaw(EntryKind::two_moment);
  rep = edge_universality_experiment(c);
  CHECK_FALSE(rep.in_hypotheses);
  CHECK(rep.overall_pass);
  for (const auto& s : rep.statistics) CHECK_FALSE(s.asserted);

  CHECK_THROWS_AS(bulk_universality_experiment(c), ConfigError);
  c.targets[0].zeta_pairs = {{1, 41}};
  c.law_b = c.law_a;
  CHECK_THROWS_AS(edge_universality_experiment(c), ConfigError);
}

TEST_CASE("A/B self-test calibration over seeds") {
  int failures = 0;
  const int runs = 30;
  for (int s = 0; s < runs; ++s) {
    auto c = small_config(24, 24, 100, 500 + s);
    failures += !edge_universality_experiment(c).overall_pass;
  }
  // family level 0.01: more than 3 failures in 30 runs has probability < 0.004
  CHECK(failures <= 3);
}

TEST_CASE("bulk experiment computes p and joint products") {
  auto c = small_config(40, 40, 100);
  c.law_b = EntryLaw(EntryKind::four_moment);
  c.targets[0].l = 20;
  const auto rep = bulk_universality_experiment(c);
  CHECK(rep.in_hypotheses);
  CHECK(rep.observables[0].columns.front() == "p[a'=20]");
  CHECK(rep.find("prod(p[a'=20],N*xi[a'=20](1,1),N*zeta[a'=20](1,1))") != nullptr);
  // sanity: E[N zeta(mu)^2] is close to one
  const auto zz = rep.observables[0].column(3);
  const auto m = stats::sample_moments(zz);
  CHECK(std::abs(m.mean - 1.0) < 4 * m.standard_error);
}

TEST_CASE("joint edge experiment and the hard-edge guard") {
  auto c = small_config(40, 40, 100);
  auto rep = joint_edge_experiment(c);
  CHECK(rep.observables[0].columns.size() == 3);
  CHECK(rep.find("q[k=1,h=1,right_edge]/ks") != nullptr);
  CHECK(rep.overall_pass);
  c.targets[0].side = ensembles::EdgeSide::left_edge;  // r = 1: hard edge at 0
  CHECK_THROWS_AS(joint_edge_experiment(c), ConfigError);
}

TEST_CASE("joint edge experiment over two bulks") {
  ExperimentConfig c;
  c.spec = law::PopulationSpectrum::create({25.0, 1.0}, {0.5, 0.5}, 40, 40);
  c.replicates = 100;
  c.threads = 1;
  Target t2;
  t2.k = 2;
  c.targets.push_back(t2);
  const auto rep = joint_edge_experiment(c);
  CHECK(rep.observables[0].columns.size() == 6);
  CHECK(rep.statistics.back().name.find("prod(q[k=1") == 0);
}

TEST_CASE("normal limit check") {
  auto c = small_config(60, 60, 300);
  const auto rep = normal_limit_check(c);
  CHECK_FALSE(rep.find("ks_normal/sqrtN*zeta[a'=1](1)[gaussian]")->asserted);
  const auto x = rep.observables[0].column(0);
  CHECK(stats::sample_moments(x).variance == doctest::Approx(1.0).epsilon(0.25));
  CHECK(stats::ks_normal(x).statistic < 0.1);
  c.spec = law::PopulationSpectrum::create({2.0, 1.0}, {0.5, 0.5}, 60, 60);
  CHECK_THROWS_AS(normal_limit_check(c), ConfigError);
}

TEST_CASE("exchangeability of coordinates for scalar Sigma") {
  auto c = small_config(40, 40, 400);
  c.targets[0].zeta_pairs = {{1, 1}, {2, 2}, {3, 3}};
  c.targets[0].xi_pairs.clear();
  const auto rep = edge_universality_experiment(c);
  const auto& t = rep.observables[0];
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b) {
      const auto s = compare_means("x", t.column(a), t.column(b), 3.0);
      CHECK(s.value <= s.hi);
    }
}

TEST_CASE("observables are invariant under flipping singular pairs") {
  const auto spec = law::PopulationSpectrum::scalar(1.0, 30, 40);
  const Eigen::VectorXd sigma = Eigen::VectorXd::Ones(30);
  Target t;
  t.xi_pairs = {{1, 2}, {3, 3}};
  t.zeta_pairs = {{1, 2}, {4, 5}};
  for (int r = 0; r < 10; ++r) {
    auto d = ensembles::decompose(ensembles::sample_matrix(EntryLaw{}, 30, 40, 3, r), sigma);
    const auto before = target_products(d, 2, t);
    d.xi.col(1) *= -1.0;
    d.zeta.col(1) *= -1.0;
    const auto after = target_products(d, 2, t);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == before[i]);
  }
}

TEST_CASE("results do not depend on the thread count") {
  auto c = small_config(30, 30, 100);
  const auto one = edge_universality_experiment(c);
  c.threads = 3;
  const auto three = edge_universality_experiment(c);
  REQUIRE(one.observables.size() == three.observables.size());
  for (std::size_t i = 0; i < one.observables.size(); ++i) CHECK(one.observables[i].rows == three.observables[i].rows);
  for (std::size_t i = 0; i < one.statistics.size(); ++i) CHECK(one.statistics[i].value == three.statistics[i].value);
}

TEST_CASE("KS distances shrink as replicates grow") {
  std::vector<double> small, large;
  for (int rep = 0; rep < 5; ++rep) {
    auto c = small_config(20, 20, 500, 900 + rep);
    c.targets[0].xi_pairs.clear();
    c.targets[0].zeta_pairs = {{1, 1}};
    small.push_back(edge_universality_experiment(c).find("N*zeta[a'=1](1,1)/ks")->value);
    c.replicates = 2000;
    large.push_back(edge_universality_experiment(c).find("N*zeta[a'=1](1,1)/ks")->value);
  }
  CHECK(stats::median(large) < stats::median(small));
}

TEST_CASE("run_experiment dispatch") {
  auto c = small_config(20, 20, 100);
  CHECK(run_experiment("edge", c).experiment == "edge");
  CHECK_THROWS_AS(run_experiment("spiked", c), ConfigError);
}
