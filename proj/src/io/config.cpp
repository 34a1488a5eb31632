#include "covsv/io/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "covsv/core/error.hpp"

namespace covsv::io {
namespace {

// Typed access to one JSON object with dotted-path error messages.
class Fields {
 public:
  Fields(const Json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("field '" + display() + "': expected an object");
    for (const auto& [key, _] : j_.items())
      if (!allowed.count(key)) throw ConfigError("unknown field '" + name(key) + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const Json& require(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required field '" + name(key) + "'");
    return j_.at(key);
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_number()) throw ConfigError("field '" + name(key) + "': expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long long integer(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_number_integer()) throw ConfigError("field '" + name(key) + "': expected an integer");
    return v.get<long long>();
  }
  int integer(const std::string& key, int fallback) const {
    return has(key) ? static_cast<int>(integer(key)) : fallback;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    throw ConfigError("field '" + name(key) + "': expected a non-negative 64-bit integer");
  }

  std::string string(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_string()) throw ConfigError("field '" + name(key) + "': expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError("field '" + name(key) + "': expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_array()) throw ConfigError("field '" + name(key) + "': expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError("field '" + name(key) + "[" + std::to_string(i) + "]': expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  const Json& array(const std::string& key) const {
    const auto& v = require(key);
    if (!v.is_array()) throw ConfigError("field '" + name(key) + "': expected an array");
    return v;
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }
  const Json& j_;
  std::string path_;
};

template <class F>
auto wrap(const std::string& field, F f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.find("field '") != std::string::npos) throw;
    throw ConfigError("field '" + field + "': " + what);
  }
}

std::vector<verify::IndexPair> parse_pairs(const Json& a, const std::string& where) {
  std::vector<verify::IndexPair> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
      throw ConfigError("field '" + where + "[" + std::to_string(i) + "]': expected a pair of integers");
    out.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  return out;
}

Json pairs_json(const std::vector<verify::IndexPair>& pairs) {
  Json a = Json::array();
  for (auto [i, j] : pairs) a.push_back({i, j});
  return a;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error: " +
                      e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

void check_schema_version(const Json& j) {
  if (!j.is_object() || !j.contains("schema_version")) return;
  const auto& v = j.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw ConfigError("field 'schema_version': expected " + std::to_string(kSchemaVersion));
}

law::PopulationSpectrum parse_spectrum(const Json& j, const std::string& where) {
  Fields f(j, where, {"sigma", "weights", "M", "N", "tau"});
  const auto sigma = f.numbers("sigma");
  const auto weights = f.has("weights") ? f.numbers("weights") : std::vector<double>(sigma.size(), 1.0 / sigma.size());
  const auto M = f.integer("M"), N = f.integer("N");
  const double tau = f.number("tau", law::kDefaultTau);
  return wrap(where, [&] { return law::PopulationSpectrum::create(sigma, weights, static_cast<int>(M), static_cast<int>(N), tau); });
}

Json to_json(const law::PopulationSpectrum& spec) {
  return {{"sigma", spec.sigma()}, {"weights", spec.weights()}, {"M", spec.M()}, {"N", spec.N()}};
}

verify::ExperimentConfig parse_experiment_config(const Json& j) {
  check_schema_version(j);
  Fields f(j, "", {"schema_version", "experiment", "law_a", "law_b", "spec", "replicates", "seed", "targets",
                   "theta_battery", "thresholds", "sizes", "bulk", "tau", "threads", "keep_observables"});
  verify::ExperimentConfig c;
  c.law_a = wrap("law_a", [&] { return ensembles::EntryLaw::parse(f.string("law_a")); });
  c.law_b = f.has("law_b") ? wrap("law_b", [&] { return ensembles::EntryLaw::parse(f.string("law_b")); }) : c.law_a;
  c.spec = parse_spectrum(f.require("spec"), "spec");
  c.replicates = static_cast<int>(f.integer("replicates"));
  c.seed = f.seed("seed", 0);
  if (f.has("targets")) {
    const auto& a = f.array("targets");
    c.targets.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string where = "targets[" + std::to_string(i) + "]";
      Fields t(a[i], where, {"k", "l", "side", "h", "xi_pairs", "zeta_pairs"});
      verify::Target target;
      target.k = t.integer("k", 1);
      target.l = t.integer("l", 1);
      target.h = t.integer("h", 1);
      if (t.has("side"))
        target.side = wrap(t.name("side"), [&] { return ensembles::parse_edge_side(t.string("side")); });
      if (t.has("xi_pairs")) target.xi_pairs = parse_pairs(t.array("xi_pairs"), t.name("xi_pairs"));
      if (t.has("zeta_pairs")) target.zeta_pairs = parse_pairs(t.array("zeta_pairs"), t.name("zeta_pairs"));
      c.targets.push_back(std::move(target));
    }
  }
  if (f.has("theta_battery")) {
    const auto& a = f.array("theta_battery");
    c.theta_battery.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string where = "theta_battery[" + std::to_string(i) + "]";
      if (!a[i].is_string()) throw ConfigError("field '" + where + "': expected a string");
      c.theta_battery.push_back(wrap(where, [&] { return verify::parse_theta(a[i].get<std::string>()); }));
    }
  }
  if (f.has("thresholds")) {
    Fields t(f.require("thresholds"), "thresholds",
             {"mean_sigmas", "ks_constant", "family_alpha", "rigidity_constant", "rigidity_min_n", "edge_slope",
              "bulk_slope", "deloc_constant", "normal_ks", "variance", "edge_exponent", "bulk_delta"});
    auto& th = c.thresholds;
    th.mean_sigmas = t.number("mean_sigmas", th.mean_sigmas);
    th.ks_constant = t.number("ks_constant", th.ks_constant);
    th.family_alpha = t.number("family_alpha", th.family_alpha);
    th.rigidity_constant = t.number("rigidity_constant", th.rigidity_constant);
    th.rigidity_min_n = t.integer("rigidity_min_n", th.rigidity_min_n);
    th.deloc_constant = t.number("deloc_constant", th.deloc_constant);
    th.normal_ks = t.number("normal_ks", th.normal_ks);
    th.edge_exponent = t.number("edge_exponent", th.edge_exponent);
    th.bulk_delta = t.number("bulk_delta", th.bulk_delta);
    auto range = [&](const char* key, double& lo, double& hi) {
      if (!t.has(key)) return;
      const auto v = t.numbers(key);
      if (v.size() != 2 || v[0] > v[1]) throw ConfigError("field '" + t.name(key) + "': expected [lo, hi]");
      lo = v[0];
      hi = v[1];
    };
    range("edge_slope", th.edge_slope_lo, th.edge_slope_hi);
    range("bulk_slope", th.bulk_slope_lo, th.bulk_slope_hi);
    range("variance", th.variance_lo, th.variance_hi);
  }
  if (f.has("sizes")) {
    c.sizes.clear();
    for (double v : f.numbers("sizes")) {
      if (v != std::floor(v)) throw ConfigError("field 'sizes': expected integers");
      c.sizes.push_back(static_cast<int>(v));
    }
  }
  c.bulk = f.integer("bulk", c.bulk);
  c.tau = f.number("tau", c.tau);
  c.threads = f.integer("threads", c.threads);
  c.keep_observables = f.boolean("keep_observables", c.keep_observables);
  verify::validate(c);
  return c;
}

Json to_json(const verify::ExperimentConfig& c) {
  Json targets = Json::array();
  for (const auto& t : c.targets)
    targets.push_back({{"k", t.k},
                       {"l", t.l},
                       {"side", ensembles::to_string(t.side)},
                       {"h", t.h},
                       {"xi_pairs", pairs_json(t.xi_pairs)},
                       {"zeta_pairs", pairs_json(t.zeta_pairs)}});
  Json battery = Json::array();
  for (auto id : c.theta_battery) battery.push_back(verify::to_string(id));
  const auto& th = c.thresholds;
  return {{"schema_version", kSchemaVersion},
          {"law_a", c.law_a.name()},
          {"law_b", c.law_b.name()},
          {"spec", to_json(c.spec)},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"targets", targets},
          {"theta_battery", battery},
          {"thresholds",
           {{"mean_sigmas", th.mean_sigmas},
            {"ks_constant", th.ks_constant},
            {"family_alpha", th.family_alpha},
            {"rigidity_constant", th.rigidity_constant},
            {"rigidity_min_n", th.rigidity_min_n},
            {"edge_slope", {th.edge_slope_lo, th.edge_slope_hi}},
            {"bulk_slope", {th.bulk_slope_lo, th.bulk_slope_hi}},
            {"deloc_constant", th.deloc_constant},
            {"normal_ks", th.normal_ks},
            {"variance", {th.variance_lo, th.variance_hi}},
            {"edge_exponent", th.edge_exponent},
            {"bulk_delta", th.bulk_delta}}},
          {"sizes", c.sizes},
          {"bulk", c.bulk},
          {"tau", c.tau}};
}

Json to_json(const verify::ExperimentReport& r) {
  Json stats = Json::array();
  for (const auto& s : r.statistics)
    stats.push_back({{"name", s.name},
                     {"kind", s.kind},
                     {"value", number_or_null(s.value)},
                     {"lo", number_or_null(s.lo)},
                     {"hi", number_or_null(s.hi)},
                     {"standard_error", number_or_null(s.standard_error)},
                     {"p_value", number_or_null(s.p_value)},
                     {"asserted", s.asserted},
                     {"passed", s.passed}});
  Json tables = Json::array();
  for (const auto& t : r.observables)
    tables.push_back({{"ensemble", t.ensemble}, {"columns", t.columns}, {"replicates", t.rows.size()}});
  return {{"experiment", r.experiment},
          {"config", to_json(r.config)},
          {"in_hypotheses", r.in_hypotheses},
          {"notes", r.notes},
          {"observables", tables},
          {"statistics", stats},
          {"verdict",
           {{"strict", r.strict_pass},
            {"overall", r.overall_pass},
            {"bonferroni_tests", r.bonferroni_tests},
            {"family_alpha", r.config.thresholds.family_alpha},
            {"asserted", r.in_hypotheses}}}};
}

conftest::ConformalTestConfig parse_conftest_config(const Json& j) {
  check_schema_version(j);
  Fields f(j, "", {"schema_version", "alpha", "K", "R1_size", "R2_size", "seed", "normality_test", "threads"});
  conftest::ConformalTestConfig c;
  c.alpha = f.number("alpha", c.alpha);
  c.K = f.integer("K", c.K);
  c.R1_size = f.integer("R1_size", c.R1_size);
  c.R2_size = f.integer("R2_size", c.R2_size);
  c.seed = f.seed("seed", c.seed);
  if (f.has("normality_test"))
    c.normality = wrap("normality_test", [&] { return stats::parse_normality_kind(f.string("normality_test")); });
  c.threads = f.integer("threads", c.threads);
  conftest::validate(c);
  return c;
}

Json to_json(const conftest::ConformalTestConfig& c) {
  return {{"schema_version", kSchemaVersion},
          {"alpha", c.alpha},
          {"K", c.K},
          {"R1_size", c.R1_size},
          {"R2_size", c.R2_size},
          {"seed", c.seed},
          {"normality_test", stats::to_string(c.normality)}};
}

Json to_json(const conftest::TestDecision& d) {
  Json pairs = Json::array(), p_values = Json::array();
  for (const auto& r : d.results) {
    pairs.push_back({r.k, r.i});
    p_values.push_back(r.p_value);
  }
  return {{"decision", d.reject ? "reject" : "accept"},
          {"A", d.A},
          {"pair_count", d.pairs},
          {"fraction", d.fraction},
          {"R1", d.R1},
          {"R2", d.R2},
          {"pairs", pairs},
          {"p_values", p_values}};
}

}  // namespace covsv::io
