#include "covsv/cli/run.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "covsv/conftest/conformal_test.hpp"
#include "covsv/core/error.hpp"
#include "covsv/core/parallel.hpp"
#include "covsv/ensembles/cache.hpp"
#include "covsv/ensembles/decomposition.hpp"
#include "covsv/ensembles/sampling.hpp"
#include "covsv/io/config.hpp"
#include "covsv/io/csv.hpp"
#include "covsv/law/mp_law.hpp"
#include "covsv/verify/experiments.hpp"
#include "covsv/version.hpp"

namespace covsv::cli {
namespace {

using io::Json;
using Clock = std::chrono::steady_clock;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string threads = "auto";
  std::string output;
  std::string format;  // empty: the subcommand default
};

struct SpecFlags {
  std::vector<double> sigma;
  std::vector<double> weights;
  double r = 0.0;
  int N = 0;
  int M = 0;
  double tau = law::kDefaultTau;
};

void add_common(CLI::App* app, Common& c, bool needs_config = false) {
  auto* opt = app->add_option("--config", c.config, "JSON config file (schema_version 1)");
  if (needs_config) opt->required();
  app->add_option("--seed", c.seed, "64-bit seed; overrides the config file");
  app->add_option("--threads", c.threads, "worker threads or 'auto' (COVSV_THREADS is used for auto)");
  app->add_option("--output", c.output, "output path (default: standard output)");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv", "text"}));
}

void add_spec_flags(CLI::App* app, SpecFlags& s) {
  app->add_option("--sigma", s.sigma, "distinct population eigenvalues, descending")->delimiter(',');
  app->add_option("--weights", s.weights, "matching weights (default: equal)")->delimiter(',');
  app->add_option("--r", s.r, "aspect ratio N/M (M = round(N/r))");
  app->add_option("--N", s.N, "number of columns N (default 1000)");
  app->add_option("--M", s.M, "number of rows M");
  app->add_option("--tau", s.tau, "spectrum validation tolerance");
}

int parse_threads(const std::string& t) {
  if (t == "auto") return 0;
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used == t.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("--threads expects a positive integer or 'auto', got '" + t + "'");
}

// Spectrum from --config's "spec" object, overridden field by field by flags.
law::PopulationSpectrum build_spectrum(const SpecFlags& f, const Json* config) {
  std::vector<double> sigma, weights;
  int M = 0, N = 0;
  double tau = f.tau;
  if (config && config->contains("spec")) {
    const auto spec = io::parse_spectrum(config->at("spec"), "spec");
    sigma = spec.sigma();
    weights = spec.weights();
    M = spec.M();
    N = spec.N();
  }
  if (!f.sigma.empty()) {
    sigma = f.sigma;
    weights.clear();
  }
  if (!f.weights.empty()) weights = f.weights;
  if (sigma.empty()) throw ConfigError("missing required field 'spec.sigma' (or --sigma)");
  if (weights.empty()) weights.assign(sigma.size(), 1.0 / static_cast<double>(sigma.size()));
  if (f.N > 0) N = f.N;
  if (N == 0) N = 1000;
  if (f.M > 0) M = f.M;
  if (f.r > 0.0) M = std::max(1, static_cast<int>(std::lround(N / f.r)));
  if (M == 0) M = N;
  return law::PopulationSpectrum::create(sigma, weights, M, N, tau);
}

std::string fixed6(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

class Emitter {
 public:
  Emitter(const Common& c, std::ostream& out, std::string command, std::uint64_t seed)
      : c_(c), out_(out), command_(std::move(command)), seed_(seed), start_(Clock::now()) {}

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  void json(Json body, const Json& config) {
    body["command"] = command_;
    body["seed"] = seed_;
    body["software"] = {{"name", "covsv"}, {"version", kVersion}};
    body["config_echo"] = config;
    body["wall_time_seconds"] = elapsed();
    write(body.dump(2) + "\n");
  }

  void csv(const std::string& body, const Json& config) {
    std::ostringstream os;
    os << "# covsv " << kVersion << "\n# command: " << command_ << "\n# seed: " << seed_
       << "\n# config: " << config.dump() << "\n# wall_time_seconds: " << io::format_double(elapsed()) << '\n'
       << body;
    write(os.str());
  }

  void text(const std::string& body) { write(body); }

 private:
  void write(const std::string& s) {
    if (c_.output.empty()) {
      out_ << s;
      return;
    }
    std::ofstream f(c_.output, std::ios::binary);
    if (!f) throw DataError("cannot write " + c_.output);
    f << s;
  }

  const Common& c_;
  std::ostream& out_;
  std::string command_;
  std::uint64_t seed_;
  Clock::time_point start_;
};

std::optional<Json> load_config(const Common& c) {
  if (c.config.empty()) return std::nullopt;
  auto j = io::read_json_file(c.config);
  io::check_schema_version(j);
  return j;
}

// ---- law ---------------------------------------------------------------

struct LawArgs {
  Common common;
  SpecFlags spec;
  double from = NAN, to = NAN;
  int points = 200;
  int bulk = 0;
  double tau = 0.05, tau_prime = NAN, tau_gamma = NAN;
};

Json structure_json(const law::MpLaw& law) {
  const auto& s = law.structure();
  Json cps = Json::array(), curv = Json::array();
  for (const auto& cp : s.critical_points)
    cps.push_back(cp.at_infinity ? Json("infinity") : Json(cp.x));
  for (const auto& c : s.curvatures) curv.push_back(c ? Json(*c) : Json(nullptr));
  return {{"p", s.p},
          {"critical_points", cps},
          {"edges", s.edges},
          {"curvatures", curv},
          {"bulk_counts", s.bulk_counts},
          {"bulk_masses", s.bulk_masses},
          {"zero_atom_mass", s.zero_atom_mass}};
}

int run_law(const std::string& what, const LawArgs& a, std::ostream& out) {
  const auto config = load_config(a.common);
  const auto spec = build_spectrum(a.spec, config ? &*config : nullptr);
  const std::uint64_t seed = a.common.seed.value_or(0);
  Emitter emit(a.common, out, "law " + what, seed);
  const law::MpLaw law(spec);
  const auto& s = law.structure();
  Json echo = {{"spec", io::to_json(spec)}};

  if (what == "edges") {
    const std::string fmt = a.common.format.empty() ? "text" : a.common.format;
    if (fmt == "text") {
      emit.text("a=" + fixed6(s.edges) + "\n");
    } else if (fmt == "json") {
      emit.json(structure_json(law), echo);
    } else {
      std::ostringstream os;
      os << "index,edge,curvature\n";
      for (std::size_t i = 0; i < s.edges.size(); ++i)
        os << i + 1 << ',' << io::format_double(s.edges[i]) << ','
           << (s.curvatures[i] ? io::format_double(*s.curvatures[i]) : "") << '\n';
      emit.csv(os.str(), echo);
    }
    return kExitOk;
  }
  if (what == "density") {
    const double lo = std::isnan(a.from) ? 0.0 : a.from;
    const double hi = std::isnan(a.to) ? 1.05 * s.edges.front() : a.to;
    if (!(hi > lo) || a.points < 2) throw ConfigError("density grid needs --to > --from and --points >= 2");
    echo["grid"] = {{"from", lo}, {"to", hi}, {"points", a.points}};
    std::vector<double> E, rho;
    for (int i = 0; i < a.points; ++i) {
      E.push_back(lo + (hi - lo) * i / (a.points - 1));
      rho.push_back(E.back() > 0.0 ? law.density(E.back()) : 0.0);
    }
    if (a.common.format == "json") {
      emit.json({{"E", E}, {"rho", rho}, {"zero_atom_mass", s.zero_atom_mass}}, echo);
    } else {
      std::ostringstream os;
      os << "E,rho\n";
      for (std::size_t i = 0; i < E.size(); ++i) os << io::format_double(E[i]) << ',' << io::format_double(rho[i]) << '\n';
      emit.csv(os.str(), echo);
    }
    return kExitOk;
  }
  if (what == "gamma") {
    std::vector<int> bulks;
    if (a.bulk > 0)
      bulks.push_back(a.bulk);
    else
      for (int k = 1; k <= s.p; ++k) bulks.push_back(k);
    echo["bulks"] = bulks;
    std::vector<law::ClassicalLocations> locs;
    for (int k : bulks) locs.push_back(law.classical_locations(k));
    if (a.common.format == "json") {
      Json arr = Json::array();
      for (const auto& l : locs) arr.push_back({{"k", l.bulk}, {"gamma", l.gamma}});
      emit.json({{"classical_locations", arr}}, echo);
    } else {
      std::ostringstream os;
      os << "k,i,gamma\n";
      for (const auto& l : locs)
        for (std::size_t i = 0; i < l.gamma.size(); ++i)
          os << l.bulk << ',' << i + 1 << ',' << io::format_double(l.gamma[i]) << '\n';
      emit.csv(os.str(), echo);
    }
    return kExitOk;
  }
  // regularity
  const double tp = std::isnan(a.tau_prime) ? a.tau : a.tau_prime;
  const double tg = std::isnan(a.tau_gamma) ? a.tau : a.tau_gamma;
  const auto rep = law.check_regularity(a.tau, tp, tg);
  Json edges = Json::array(), bulks = Json::array();
  for (const auto& e : rep.edges)
    edges.push_back({{"edge", e.edge},
                     {"gap_margin", e.gap_margin},
                     {"pole_margin", std::isfinite(e.pole_margin) ? Json(e.pole_margin) : Json(nullptr)},
                     {"edge_ok", e.edge_ok},
                     {"gap_ok", e.gap_ok},
                     {"pole_ok", e.pole_ok}});
  for (const auto& b : rep.bulks) bulks.push_back({{"min_density", b.min_density}, {"ok", b.ok}});
  echo["tau"] = a.tau;
  echo["tau_prime"] = tp;
  echo["tau_gamma"] = tg;
  Json body = {{"p", s.p},
               {"edges", edges},
               {"bulks", bulks},
               {"min_gamma", rep.min_gamma},
               {"gamma_ok", rep.gamma_ok},
               {"all_ok", rep.all_ok()}};
  Json sqrt_fits = Json::array();
  for (int k = 1; k <= s.p; ++k) {
    Json fit = {{"k", k}, {"right", law.square_root_fit(k, true)}};
    if (s.curvatures[static_cast<std::size_t>(2 * k - 1)]) fit["left"] = law.square_root_fit(k, false);
    sqrt_fits.push_back(fit);
  }
  body["square_root_fits"] = sqrt_fits;
  emit.json(body, echo);
  return rep.all_ok() ? kExitOk : kExitVerdictFailed;
}

// ---- sample ------------------------------------------------------------

struct SampleArgs {
  Common common;
  SpecFlags spec;
  std::string law = "gaussian";
  int replicates = 1;
  bool values_only = false;
};

int run_sample(const SampleArgs& a, std::ostream& out) {
  const auto config = load_config(a.common);
  const auto spec = build_spectrum(a.spec, config ? &*config : nullptr);
  std::string law_name = a.law;
  std::uint64_t seed = 0;
  if (config) {
    if (config->contains("law_a")) law_name = config->at("law_a").get<std::string>();
    if (config->contains("seed")) seed = config->at("seed").get<std::uint64_t>();
  }
  seed = a.common.seed.value_or(seed);
  const auto law = ensembles::EntryLaw::parse(law_name);
  if (a.replicates < 1) throw ConfigError("--replicates must be >= 1");
  const auto diag = spec.diagonal();
  const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(diag.data(), static_cast<Eigen::Index>(diag.size()));
  Json echo = {{"spec", io::to_json(spec)}, {"law", law.name()}, {"replicates", a.replicates}};
  Emitter emit(a.common, out, "sample", seed);

  if (a.common.format == "csv") {
    // data matrix Y of replicate 0, for the conformality test
    const auto X = ensembles::sample_matrix(law, spec.M(), spec.N(), seed, 0);
    std::ostringstream os;
    io::write_matrix_csv(os, ensembles::scale_rows(X, sigma));
    emit.csv(os.str(), echo);
    return kExitOk;
  }
  if (a.common.output.empty()) throw ConfigError("sample needs --output for the binary cache");
  std::vector<ensembles::SampleDecomposition> records(static_cast<std::size_t>(a.replicates));
  ensembles::DecomposeOptions opt;
  opt.vectors = !a.values_only;
  parallel_for(records.size(), resolve_threads(parse_threads(a.common.threads)), [&](std::size_t r) {
    const auto X = ensembles::sample_matrix(law, spec.M(), spec.N(), seed, r);
    auto d = ensembles::decompose(X, sigma, opt);
    d.seed = seed;
    d.replicate = r;
    d.law = law.name();
    records[r] = std::move(d);
  });
  ensembles::write_cache(a.common.output, records);
  Json summary = {{"cache", a.common.output}, {"records", records.size()}, {"has_vectors", opt.vectors}};
  summary["command"] = "sample";
  summary["seed"] = seed;
  summary["software"] = {{"name", "covsv"}, {"version", kVersion}};
  summary["config_echo"] = echo;
  summary["wall_time_seconds"] = emit.elapsed();
  out << summary.dump(2) << '\n';
  return kExitOk;
}

// ---- verify ------------------------------------------------------------

int run_verify(const std::string& name, const Common& c, std::ostream& out) {
  auto j = io::read_json_file(c.config);
  auto config = io::parse_experiment_config(j);
  if (c.seed) config.seed = *c.seed;
  if (c.threads != "auto" || config.threads == 0) config.threads = parse_threads(c.threads);
  Emitter emit(c, out, "verify " + name, config.seed);
  const auto report = verify::run_experiment(name, config);
  if (c.format == "csv") {
    std::ostringstream os;
    io::write_observables_csv(os, report);
    emit.csv(os.str(), io::to_json(config));
  } else {
    emit.json(io::to_json(report), io::to_json(config));
  }
  return report.in_hypotheses && !report.overall_pass ? kExitVerdictFailed : kExitOk;
}

// ---- conftest ----------------------------------------------------------

struct ConftestArgs {
  Common common;
  std::string data;
  std::size_t record = 0;
  std::optional<double> alpha;
  std::optional<int> K;
  std::string normality;
};

Eigen::MatrixXd load_data(const std::string& path, std::size_t record) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open data file " + path);
  char head[7] = {};
  probe.read(head, 7);
  if (probe.gcount() == 7 && std::string(head, 7) == "COVSVDC") {
    const auto recs = ensembles::read_cache(path);
    if (record >= recs.size()) throw DataError("cache holds " + std::to_string(recs.size()) + " records");
    const auto& d = recs[record];
    if (!d.has_vectors()) throw DataError("cache record has no singular vectors; cannot rebuild the data");
    return d.xi * d.lambdas.cwiseSqrt().asDiagonal() * d.zeta.transpose();
  }
  return io::read_matrix_csv(path);
}

int run_conftest(const ConftestArgs& a, std::ostream& out) {
  conftest::ConformalTestConfig config;
  if (!a.common.config.empty()) config = io::parse_conftest_config(io::read_json_file(a.common.config));
  if (a.common.seed) config.seed = *a.common.seed;
  if (a.alpha) config.alpha = *a.alpha;
  if (a.K) config.K = *a.K;
  if (!a.normality.empty()) config.normality = stats::parse_normality_kind(a.normality);
  if (a.common.threads != "auto" || config.threads == 0) config.threads = parse_threads(a.common.threads);
  conftest::validate(config);
  Emitter emit(a.common, out, "conftest", config.seed);
  const auto data = load_data(a.data, a.record);
  const auto decision = conftest::conformal_test(data, config);
  Json echo = io::to_json(config);
  echo["data"] = a.data;
  if (a.common.format == "csv") {
    std::ostringstream os;
    os << "k,i,p_value,rejected\n";
    for (const auto& r : decision.results)
      os << r.k << ',' << r.i << ',' << io::format_double(r.p_value) << ',' << (r.rejected ? 1 : 0) << '\n';
    os << "# decision: " << (decision.reject ? "reject" : "accept") << ", A = " << decision.A << '\n';
    emit.csv(os.str(), echo);
  } else {
    Json body = io::to_json(decision);
    body["config"] = echo;
    emit.json(body, echo);
  }
  return decision.reject ? kExitVerdictFailed : kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"covsv: deformed Marchenko-Pastur law, sample covariance singular vectors, Monte-Carlo checks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 2 a verdict failed (or H0 rejected), 1 error.\n"
      "Environment: COVSV_THREADS sets the worker count used by --threads auto.");

  auto* law_cmd = app.add_subcommand("law", "deterministic law: edges, density, classical locations, regularity");
  law_cmd->require_subcommand(1);
  LawArgs law_args;
  std::string law_what;
  for (const char* what : {"edges", "density", "gamma", "regularity"}) {
    auto* sub = law_cmd->add_subcommand(what);
    add_common(sub, law_args.common);
    add_spec_flags(sub, law_args.spec);
    sub->callback([&law_what, what] { law_what = what; });
    if (std::string(what) == "density") {
      sub->description("density grid: CSV columns E,rho");
      sub->add_option("--from", law_args.from, "grid start (default 0)");
      sub->add_option("--to", law_args.to, "grid end (default 1.05 a_1)");
      sub->add_option("--points", law_args.points, "grid size (default 200)");
    } else if (std::string(what) == "gamma") {
      sub->description("classical locations: CSV columns k,i,gamma");
      sub->add_option("--bulk", law_args.bulk, "bulk index (default: all)");
    } else if (std::string(what) == "regularity") {
      sub->description("regularity report; exit 2 if a check fails");
      sub->add_option("--tau-edge", law_args.tau, "edge, gap and pole margin tau (default 0.05)");
      sub->add_option("--tau-prime", law_args.tau_prime, "bulk trim tau' (default tau)");
      sub->add_option("--tau-gamma", law_args.tau_gamma, "classical-location floor (default tau)");
    } else {
      sub->description("spectral edges a_1 >= ... >= a_2p");
    }
  }

  auto* sample_cmd = app.add_subcommand("sample", "sample Y = Sigma^{1/2} X and write the decomposition cache");
  SampleArgs sample_args;
  add_common(sample_cmd, sample_args.common);
  add_spec_flags(sample_cmd, sample_args.spec);
  sample_cmd->add_option("--law", sample_args.law, "gaussian, two_moment or four_moment");
  sample_cmd->add_option("--replicates", sample_args.replicates, "number of matrices (default 1)");
  sample_cmd->add_flag("--values-only", sample_args.values_only, "store singular values only");

  auto* verify_cmd = app.add_subcommand("verify", "Monte-Carlo experiment reports");
  verify_cmd->require_subcommand(1);
  Common verify_common;
  std::string verify_what;
  const std::pair<const char*, const char*> verify_subs[] = {
      {"rigidity", "eigenvalue rigidity scaling over config sizes"},
      {"deloc", "maximal singular-vector entry bound"},
      {"edge", "A/B comparison of edge singular-vector products"},
      {"bulk", "A/B comparison of bulk singular-vector products"},
      {"joint", "joint edge eigenvalue and vector statistics"},
      {"normal", "Gaussian limit of rescaled vector entries"}};
  for (const auto& [what, help] : verify_subs) {
    auto* sub = verify_cmd->add_subcommand(what, help);
    add_common(sub, verify_common, true);
    sub->callback([&verify_what, what] { verify_what = what; });
  }

  auto* conf_cmd = app.add_subcommand("conftest", "bootstrap test of H0: the transform is conformal");
  ConftestArgs conf_args;
  add_common(conf_cmd, conf_args.common);
  conf_cmd->add_option("--data", conf_args.data, "CSV matrix (rows x columns) or decomposition cache")->required();
  conf_cmd->add_option("--record", conf_args.record, "record index when --data is a cache");
  conf_cmd->add_option("--alpha", conf_args.alpha, "significance level");
  conf_cmd->add_option("--K", conf_args.K, "bootstrap replicates");
  conf_cmd->add_option("--normality", conf_args.normality, "anderson_darling or shapiro_wilk");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (law_cmd->parsed()) return run_law(law_what, law_args, out);
    if (sample_cmd->parsed()) return run_sample(sample_args, out);
    if (verify_cmd->parsed()) return run_verify(verify_what, verify_common, out);
    if (conf_cmd->parsed()) return run_conftest(conf_args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace covsv::cli
