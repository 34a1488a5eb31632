#include "covsv/verify/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "covsv/core/error.hpp"
#include "covsv/core/parallel.hpp"
#include "covsv/ensembles/decomposition.hpp"
#include "covsv/ensembles/sampling.hpp"
#include "covsv/law/mp_law.hpp"
#include "covsv/stats/distributions.hpp"

namespace covsv::verify {
namespace {

using ensembles::EdgeSide;
using ensembles::EntryLaw;
using ensembles::SampleDecomposition;

constexpr std::uint64_t kStreamA = 0;
constexpr std::uint64_t kStreamB = 1;
constexpr std::uint64_t kStreamSizes = 16;
constexpr std::uint64_t kStreamSigns = 1024;

Eigen::VectorXd sigma_vector(const law::PopulationSpectrum& spec) {
  const auto d = spec.diagonal();
  return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

SampleDecomposition draw(const ExperimentConfig& c, const law::PopulationSpectrum& spec, const Eigen::VectorXd& sigma,
                         const EntryLaw& law, std::uint64_t stream, std::size_t replicate, bool vectors) {
  const auto X = ensembles::sample_matrix(law, spec.M(), spec.N(), c.seed, replicate, stream);
  ensembles::DecomposeOptions opt;
  opt.vectors = vectors;
  auto d = ensembles::decompose(X, sigma, opt);
  d.seed = c.seed;
  d.replicate = replicate;
  d.law = law.name();
  return d;
}

// Runs `row(decomp, replicate)` for every replicate of one ensemble; rows are
// stored by replicate index so the table does not depend on scheduling.
template <class RowFn>
ObservableTable collect(const ExperimentConfig& c, const EntryLaw& law, std::uint64_t stream, std::string label,
                        std::vector<std::string> columns, bool vectors, RowFn row) {
  const auto sigma = sigma_vector(c.spec);
  ObservableTable t{std::move(label), std::move(columns), {}};
  t.rows.resize(static_cast<std::size_t>(c.replicates));
  parallel_for(t.rows.size(), resolve_threads(c.threads), [&](std::size_t r) {
    const auto d = draw(c, c.spec, sigma, law, stream, r, vectors);
    t.rows[r] = row(d, r);
  });
  return t;
}

struct ResolvedTarget {
  Target target;
  ensembles::SpectralIndex index;
  std::string tag;
};

std::vector<ResolvedTarget> resolve_targets(const ExperimentConfig& c, const law::SpectrumStructure& s) {
  if (c.targets.empty()) throw ConfigError("at least one target is required");
  std::vector<ResolvedTarget> out;
  const int rank = std::min(c.spec.M(), c.spec.N());
  for (const auto& t : c.targets) {
    ensembles::SpectralIndex idx;
    try {
      idx = ensembles::alpha_prime(t.k, t.l, t.side, s);
    } catch (const IndexError& e) {
      throw ConfigError(std::string("target: ") + e.what());
    }
    if (idx.alpha_prime > rank) throw ConfigError("target alpha' exceeds the number of singular values");
    if (t.h < 1 || t.h > s.bulk_count(t.k)) throw ConfigError("target h outside 1..N_k");
    for (auto [i, j] : t.xi_pairs)
      if (i < 1 || j < 1 || i > c.spec.M() || j > c.spec.M()) throw ConfigError("xi pair outside 1..M");
    for (auto [i, j] : t.zeta_pairs)
      if (i < 1 || j < 1 || i > c.spec.N() || j > c.spec.N()) throw ConfigError("zeta pair outside 1..N");
    out.push_back({t, idx, "a'=" + std::to_string(idx.alpha_prime)});
  }
  return out;
}

void require_matched(const ExperimentConfig& c, int order, const char* experiment) {
  const int got = c.law_a.matched_order(c.law_b);
  if (got < order)
    throw ConfigError(std::string(experiment) + " comparison needs " + std::to_string(order) +
                      " matched moments; " + c.law_a.name() + " and " + c.law_b.name() + " match " +
                      std::to_string(got));
}

std::string pair_name(const char* vec, const std::string& tag, IndexPair p) {
  return std::string("N*") + vec + "[" + tag + "](" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

// Vector-entry products for one target, in the column order of product_columns.
void push_products(std::vector<double>& row, const SampleDecomposition& d, const ResolvedTarget& t) {
  const auto p = target_products(d, t.index.alpha_prime, t.target);
  row.insert(row.end(), p.begin(), p.end());
}

void push_product_columns(std::vector<std::string>& cols, const ResolvedTarget& t) {
  for (auto p : t.target.xi_pairs) cols.push_back(pair_name("xi", t.tag, p));
  for (auto p : t.target.zeta_pairs) cols.push_back(pair_name("zeta", t.tag, p));
}

ExperimentReport start(std::string name, const ExperimentConfig& c) {
  validate(c);
  ExperimentReport r;
  r.experiment = std::move(name);
  r.config = c;
  return r;
}

void compare_tables(ExperimentReport& rep, const ObservableTable& a, const ObservableTable& b) {
  for (std::size_t col = 0; col < a.columns.size(); ++col)
    compare_observable(rep, a.columns[col], a.column(col), b.column(col));
}

std::vector<double> products_of(const ObservableTable& t, const std::vector<std::size_t>& cols) {
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    double p = 1.0;
    for (auto c : cols) p *= row[c];
    out.push_back(p);
  }
  return out;
}

void compare_product(ExperimentReport& rep, const ObservableTable& a, const ObservableTable& b,
                     const std::vector<std::size_t>& cols) {
  std::string name = "prod(";
  for (std::size_t i = 0; i < cols.size(); ++i) name += (i ? "," : "") + a.columns[cols[i]];
  name += ")";
  rep.statistics.push_back(
      compare_means(name, products_of(a, cols), products_of(b, cols), rep.config.thresholds.mean_sigmas));
}

void finish(ExperimentReport& rep) {
  if (!rep.config.keep_observables)
    for (auto& t : rep.observables) t.rows.clear();
  rep.finalize();
}

Statistic info(std::string name, std::string kind, double value) {
  Statistic s;
  s.name = std::move(name);
  s.kind = std::move(kind);
  s.value = value;
  s.asserted = false;
  return s;
}

Statistic bounded(std::string name, std::string kind, double value, double lo, double hi) {
  Statistic s;
  s.name = std::move(name);
  s.kind = std::move(kind);
  s.value = value;
  s.lo = lo;
  s.hi = hi;
  return s;
}

std::vector<EntryLaw> distinct_laws(const ExperimentConfig& c) {
  std::vector<EntryLaw> laws{c.law_a};
  if (!(c.law_b == c.law_a)) laws.push_back(c.law_b);
  return laws;
}

}  // namespace

std::vector<double> target_products(const SampleDecomposition& d, int alpha_prime, const Target& t) {
  if (!d.has_vectors()) throw DomainError("vector observables need a decomposition with vectors");
  if (alpha_prime < 1 || alpha_prime > d.rank()) throw IndexError("alpha' outside the decomposition");
  const auto a = static_cast<Eigen::Index>(alpha_prime - 1);
  const double N = d.N;
  std::vector<double> row;
  for (auto [i, j] : t.xi_pairs) row.push_back(N * d.xi(i - 1, a) * d.xi(j - 1, a));
  for (auto [m, n] : t.zeta_pairs) row.push_back(N * d.zeta(m - 1, a) * d.zeta(n - 1, a));
  return row;
}

void validate(const ExperimentConfig& c) {
  if (c.replicates < kMinReplicates)
    throw ConfigError("replicates must be >= " + std::to_string(kMinReplicates) + ", got " +
                      std::to_string(c.replicates));
  if (c.theta_battery.empty()) throw ConfigError("theta battery is empty");
  if (c.sizes.empty()) throw ConfigError("sizes list is empty");
  for (int n : c.sizes)
    if (n < 1) throw ConfigError("sizes must be positive");
}

ExperimentReport rigidity_experiment(const ExperimentConfig& config) {
  auto rep = start("rigidity", config);
  const auto& th = config.thresholds;
  std::vector<double> logn, log_edge, log_mid;
  for (std::size_t si = 0; si < config.sizes.size(); ++si) {
    const int n = config.sizes[si];
    const auto spec = n == config.spec.N() ? config.spec : config.spec.resized(n);
    const law::MpLaw law(spec);
    const auto& s = law.structure();
    if (config.bulk < 1 || config.bulk > s.p) throw ConfigError("rigidity bulk index outside 1..p");
    const int k = config.bulk;
    const auto gamma = law.classical_locations(k).gamma;
    const int Nk = static_cast<int>(gamma.size());
    if (Nk == 0) throw ConfigError("bulk has no eigenvalues at N = " + std::to_string(n));
    const int mid = (Nk + 1) / 2;
    const double scale = std::pow(static_cast<double>(n), 2.0 / 3.0);
    const auto sigma = sigma_vector(spec);

    const std::string tag = "[N=" + std::to_string(n) + "]";
    ObservableTable table{"N=" + std::to_string(n), {"edge_deviation", "mid_deviation", "s_max"}, {}};
    table.rows.resize(static_cast<std::size_t>(config.replicates));
    std::vector<std::vector<double>> s_values(table.rows.size());
    parallel_for(table.rows.size(), resolve_threads(config.threads), [&](std::size_t r) {
      const auto d = draw(config, spec, sigma, config.law_a, kStreamSizes + si, r, false);
      auto& sv = s_values[r];
      sv.resize(static_cast<std::size_t>(Nk));
      for (int i = 1; i <= Nk; ++i) {
        const double dev = std::abs(ensembles::bulk_eigenvalue(d.lambdas, s, k, i) - gamma[i - 1]);
        sv[i - 1] = dev * std::cbrt(static_cast<double>(std::min(i, Nk + 1 - i))) * scale;
      }
      table.rows[r] = {std::abs(ensembles::bulk_eigenvalue(d.lambdas, s, k, 1) - gamma[0]),
                       std::abs(ensembles::bulk_eigenvalue(d.lambdas, s, k, mid) - gamma[mid - 1]),
                       *std::max_element(sv.begin(), sv.end())};
    });
    std::vector<double> all;
    for (const auto& sv : s_values) all.insert(all.end(), sv.begin(), sv.end());
    rep.statistics.push_back(info("s_median" + tag, "quantile", stats::median(all)));
    auto q99 = bounded("s_q99" + tag, "quantile", stats::quantile(all, 0.99), 0.0, th.rigidity_constant);
    q99.asserted = n >= th.rigidity_min_n;
    rep.statistics.push_back(q99);
    rep.statistics.push_back(info("s_max" + tag, "quantile", *std::max_element(all.begin(), all.end())));
    const double med_edge = stats::median(table.column(0)), med_mid = stats::median(table.column(1));
    rep.statistics.push_back(info("median_edge_deviation" + tag, "quantile", med_edge));
    rep.statistics.push_back(info("median_mid_deviation" + tag, "quantile", med_mid));
    logn.push_back(std::log(static_cast<double>(n)));
    log_edge.push_back(std::log(med_edge));
    log_mid.push_back(std::log(med_mid));
    rep.observables.push_back(std::move(table));
  }
  if (logn.size() >= 2) {
    rep.statistics.push_back(
        bounded("edge_slope", "slope", stats::ols_slope(logn, log_edge), th.edge_slope_lo, th.edge_slope_hi));
    rep.statistics.push_back(
        bounded("mid_slope", "slope", stats::ols_slope(logn, log_mid), th.bulk_slope_lo, th.bulk_slope_hi));
  } else {
    rep.notes.push_back("single size: slopes not fitted");
  }
  finish(rep);
  return rep;
}

ExperimentReport delocalization_experiment(const ExperimentConfig& config) {
  auto rep = start("deloc", config);
  const law::MpLaw law(config.spec);
  const auto& s = law.structure();
  // vector indices alpha (0-based) whose classical location is >= tau
  std::vector<Eigen::Index> indexed;
  for (int k = 1; k <= s.p; ++k) {
    const auto gamma = law.classical_locations(k).gamma;
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (gamma[i] >= config.tau) indexed.push_back(s.offset(k) + static_cast<Eigen::Index>(i));
  }
  const int rank = std::min(config.spec.M(), config.spec.N());
  std::erase_if(indexed, [&](Eigen::Index a) { return a >= rank; });
  if (indexed.empty()) throw ConfigError("no singular vector has classical location >= tau");
  rep.notes.push_back("indexed vectors: " + std::to_string(indexed.size()));

  const double N = config.spec.N();
  const double bound = config.thresholds.deloc_constant * std::log(N) * std::log(N);
  std::uint64_t stream = kStreamA;
  for (const auto& lw : distinct_laws(config)) {
    auto t = collect(config, lw, stream++, lw.name(), {"N*D", "N*max_xi2", "N*max_zeta2"}, true,
                     [&](const SampleDecomposition& d, std::size_t) {
                       double mx = 0.0, mz = 0.0;
                       for (auto a : indexed) {
                         mx = std::max(mx, d.xi.col(a).cwiseAbs2().maxCoeff());
                         mz = std::max(mz, d.zeta.col(a).cwiseAbs2().maxCoeff());
                       }
                       return std::vector<double>{N * (mx + mz), N * mx, N * mz};
                     });
    const auto nd = t.column(0);
    rep.statistics.push_back(
        bounded("max_N*D[" + lw.name() + "]", "max_ratio", *std::max_element(nd.begin(), nd.end()), 0.0, bound));
    rep.statistics.push_back(info("median_N*D[" + lw.name() + "]", "quantile", stats::median(nd)));
    rep.observables.push_back(std::move(t));
  }
  finish(rep);
  return rep;
}

ExperimentReport edge_universality_experiment(const ExperimentConfig& config) {
  auto rep = start("edge", config);
  require_matched(config, 2, "edge");
  const law::MpLaw law(config.spec);
  const auto targets = resolve_targets(config, law.structure());
  for (const auto& t : targets) {
    const double limit = std::pow(static_cast<double>(law.structure().bulk_count(t.target.k)),
                                  config.thresholds.edge_exponent);
    if (t.target.l > limit) {
      rep.in_hypotheses = false;
      rep.notes.push_back("target " + t.tag + " has l = " + std::to_string(t.target.l) + " > N_k^" +
                          std::to_string(config.thresholds.edge_exponent) + "; report only");
    }
  }
  std::vector<std::string> cols;
  for (const auto& t : targets) push_product_columns(cols, t);
  auto row = [&](const SampleDecomposition& d, std::size_t) {
    std::vector<double> out;
    for (const auto& t : targets) push_products(out, d, t);
    return out;
  };
  auto a = collect(config, config.law_a, kStreamA, "A", cols, true, row);
  auto b = collect(config, config.law_b, kStreamB, "B", cols, true, row);
  compare_tables(rep, a, b);
  rep.observables.push_back(std::move(a));
  rep.observables.push_back(std::move(b));
  finish(rep);
  return rep;
}

ExperimentReport bulk_universality_experiment(const ExperimentConfig& config) {
  auto rep = start("bulk", config);
  require_matched(config, 4, "bulk");
  const law::MpLaw law(config.spec);
  const auto& s = law.structure();
  const auto targets = resolve_targets(config, s);
  const double delta = config.thresholds.bulk_delta;
  std::vector<double> gamma, rho;
  for (const auto& t : targets) {
    const int Nk = s.bulk_count(t.target.k);
    const int i = t.index.alpha_prime - s.offset(t.target.k);  // position from the top of bulk k
    if (t.target.l < delta * Nk || t.target.l > (1.0 - delta) * Nk) {
      rep.in_hypotheses = false;
      rep.notes.push_back("target " + t.tag + " outside [delta N_k, (1 - delta) N_k]; report only");
    }
    const double g = law.classical_locations(t.target.k).gamma.at(static_cast<std::size_t>(i - 1));
    gamma.push_back(g);
    rho.push_back(law.density(g));
  }
  // columns per target: p, the products, so the first three of each block form the joint tuple
  std::vector<std::string> cols;
  std::vector<std::size_t> starts;
  for (const auto& t : targets) {
    starts.push_back(cols.size());
    cols.push_back("p[" + t.tag + "]");
    push_product_columns(cols, t);
  }
  const double N = config.spec.N();
  auto row = [&](const SampleDecomposition& d, std::size_t) {
    std::vector<double> out;
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      const double lam = d.lambdas(targets[ti].index.alpha_prime - 1);
      out.push_back(rho[ti] * N * (lam - gamma[ti]));
      push_products(out, d, targets[ti]);
    }
    return out;
  };
  auto a = collect(config, config.law_a, kStreamA, "A", cols, true, row);
  auto b = collect(config, config.law_b, kStreamB, "B", cols, true, row);
  compare_tables(rep, a, b);
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const auto& t = targets[ti].target;
    if (t.xi_pairs.empty() || t.zeta_pairs.empty()) continue;
    const std::size_t p = starts[ti], x = p + 1, z = p + 1 + t.xi_pairs.size();
    compare_product(rep, a, b, {p, x});
    compare_product(rep, a, b, {p, z});
    compare_product(rep, a, b, {x, z});
    compare_product(rep, a, b, {p, x, z});
  }
  rep.observables.push_back(std::move(a));
  rep.observables.push_back(std::move(b));
  finish(rep);
  return rep;
}

ExperimentReport joint_edge_experiment(const ExperimentConfig& config) {
  auto rep = start("joint", config);
  require_matched(config, 2, "joint edge");
  const law::MpLaw law(config.spec);
  const auto& s = law.structure();
  const auto targets = resolve_targets(config, s);
  for (const auto& t : targets) {
    const std::size_t edge = static_cast<std::size_t>(t.target.side == EdgeSide::right_edge ? 2 * t.target.k - 2
                                                                                            : 2 * t.target.k - 1);
    if (!s.curvatures.at(edge))
      throw ConfigError("target " + t.tag + " sits at an edge without curvature (hard edge)");
    if (t.target.xi_pairs.empty() || t.target.zeta_pairs.empty())
      throw ConfigError("joint targets need one xi pair and one zeta pair");
    const double limit = std::pow(static_cast<double>(s.bulk_count(t.target.k)), config.thresholds.edge_exponent);
    if (t.target.l > limit || t.target.h > limit) {
      rep.in_hypotheses = false;
      rep.notes.push_back("target " + t.tag + " beyond N_k^" + std::to_string(config.thresholds.edge_exponent) +
                          "; report only");
    }
  }
  // per target: q, the first xi product, the first zeta product
  std::vector<std::string> cols;
  for (const auto& t : targets) {
    cols.push_back("q[k=" + std::to_string(t.target.k) + ",h=" + std::to_string(t.target.h) + "," +
                   ensembles::to_string(t.target.side) + "]");
    cols.push_back(pair_name("xi", t.tag, t.target.xi_pairs.front()));
    cols.push_back(pair_name("zeta", t.tag, t.target.zeta_pairs.front()));
  }
  auto row = [&](const SampleDecomposition& d, std::size_t) {
    std::vector<double> out;
    const double N = d.N;
    for (const auto& t : targets) {
      const auto a = static_cast<Eigen::Index>(t.index.alpha_prime - 1);
      const auto [i, j] = t.target.xi_pairs.front();
      const auto [m, n] = t.target.zeta_pairs.front();
      out.push_back(ensembles::rescale_edge_eigenvalue(d.lambdas, s, t.target.k, t.target.h, t.target.side));
      out.push_back(N * d.xi(i - 1, a) * d.xi(j - 1, a));
      out.push_back(N * d.zeta(m - 1, a) * d.zeta(n - 1, a));
    }
    return out;
  };
  auto a = collect(config, config.law_a, kStreamA, "A", cols, true, row);
  auto b = collect(config, config.law_b, kStreamB, "B", cols, true, row);
  compare_tables(rep, a, b);
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    const std::size_t q = 3 * ti;
    compare_product(rep, a, b, {q, q + 1});
    compare_product(rep, a, b, {q, q + 2});
    compare_product(rep, a, b, {q + 1, q + 2});
    compare_product(rep, a, b, {q, q + 1, q + 2});
  }
  if (targets.size() > 1) {
    std::vector<std::size_t> all(cols.size());
    for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
    compare_product(rep, a, b, all);
  }
  rep.observables.push_back(std::move(a));
  rep.observables.push_back(std::move(b));
  finish(rep);
  return rep;
}

ExperimentReport normal_limit_check(const ExperimentConfig& config) {
  auto rep = start("normal", config);
  if (!config.spec.is_scalar()) throw ConfigError("normal limit check needs Sigma = c I");
  const law::MpLaw law(config.spec);
  const auto targets = resolve_targets(config, law.structure());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> coords;  // (vector, coordinate), 0-based
  std::vector<std::string> cols;
  for (const auto& t : targets) {
    std::set<int> mus;
    for (auto [m, n] : t.target.zeta_pairs) mus.insert(m);
    for (int m : mus) {
      coords.emplace_back(t.index.alpha_prime - 1, m - 1);
      cols.push_back("sqrtN*zeta[" + t.tag + "](" + std::to_string(m) + ")");
    }
  }
  if (coords.empty()) throw ConfigError("normal limit check needs at least one zeta coordinate");
  const bool asserted = config.replicates >= 2000 && config.spec.N() >= 300;
  if (!asserted) rep.notes.push_back("fewer than 2000 replicates or N < 300: statistics reported only");
  const double rootN = std::sqrt(static_cast<double>(config.spec.N()));
  const auto& th = config.thresholds;
  std::uint64_t stream = kStreamA;
  for (const auto& lw : distinct_laws(config)) {
    const std::uint64_t sign_stream = kStreamSigns + stream;
    auto t = collect(config, lw, stream++, lw.name(), cols, true, [&](const SampleDecomposition& d, std::size_t r) {
      // the sign of a singular pair is not identifiable; draw it independently
      auto rng = make_rng(config.seed, sign_stream, r);
      std::vector<double> out;
      for (auto [a, mu] : coords) {
        const double sign = (rng() >> 63) ? 1.0 : -1.0;
        out.push_back(sign * rootN * d.zeta(mu, a));
      }
      return out;
    });
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto x = t.column(c);
      const std::string tag = cols[c] + "[" + lw.name() + "]";
      auto ks = bounded("ks_normal/" + tag, "ks_normal", stats::ks_normal(x).statistic, 0.0, th.normal_ks);
      ks.asserted = asserted;
      auto var = bounded("variance/" + tag, "variance", stats::sample_moments(x).variance, th.variance_lo,
                         th.variance_hi);
      var.asserted = asserted;
      rep.statistics.push_back(ks);
      rep.statistics.push_back(var);
    }
    rep.observables.push_back(std::move(t));
  }
  finish(rep);
  return rep;
}

ExperimentReport run_experiment(std::string_view name, const ExperimentConfig& config) {
  if (name == "rigidity") return rigidity_experiment(config);
  if (name == "deloc") return delocalization_experiment(config);
  if (name == "edge") return edge_universality_experiment(config);
  if (name == "bulk") return bulk_universality_experiment(config);
  if (name == "joint") return joint_edge_experiment(config);
  if (name == "normal") return normal_limit_check(config);
  throw ConfigError("unknown experiment '" + std::string(name) + "' (rigidity, deloc, edge, bulk, joint, normal)");
}

}  // namespace covsv::verify
