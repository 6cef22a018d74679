#include "skewfbm/mc/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>

#include "skewfbm/core/csv.hpp"
#include "skewfbm/fbm/covariance_study.hpp"
#include "skewfbm/fbm/nondeterminism.hpp"
#include "skewfbm/girsanov/girsanov.hpp"
#include "skewfbm/lt/local_time.hpp"
#include "skewfbm/mc/parallel.hpp"
#include "skewfbm/sde/malliavin.hpp"
#include "skewfbm/verify/suite.hpp"

namespace skewfbm::mc {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& v, const std::string& key, const char* expected) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "': expected " + expected);
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("config key '" + key + "': expected a non-negative integer");
  return v.get<std::size_t>();
}

double get_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "': expected a number");
  return v.get<double>();
}

std::vector<double> get_reals(const json& v, const std::string& key) {
  if (!v.is_array()) throw ConfigError("config key '" + key + "': expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(get_real(e, key));
  return out;
}

}  // namespace

RunConfig RunConfig::defaults(const std::string& command) {
  RunConfig c;
  if (command.empty() || command == "simulate-fbm" || command == "verify") return c;
  if (command == "local-time") {
    // the ladder and the exponent fit need a fine grid and a narrow kernel
    c.n = 2048;
    c.method = "cholesky";
    c.epsilon = 1.0 / 256;
  } else if (command == "solve-sde" || command == "girsanov") {
    c.H = 0.1;
    if (command == "solve-sde") c.n = 1024;
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return c;
}

const std::vector<std::string>& default_studies(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> m{
      {"simulate-fbm", {"fbm_paths", "fbm_covariance"}},
      {"local-time", {"local_time_ladder", "local_time_self_similarity", "local_time_moments", "local_time_exponent"}},
      {"solve-sde", {"sde_paths", "sde_ladder", "sde_holder", "sde_compactness"}},
      {"girsanov", {"girsanov_mean_one", "girsanov_exp_moments", "girsanov_covariance"}},
      {"verify", {"identity_audits"}},
  };
  const auto it = m.find(command);
  if (it == m.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

json RunConfig::schema(const std::string& command) {
  const RunConfig c = defaults(command);
  auto e = [](json def, const char* what) { return json{{"default", std::move(def)}, {"description", what}}; };
  return {
      {"H", e(c.H, "Hurst index, 0 < H < 1/2")},
      {"d", e(c.d, "dimension of the fBm")},
      {"T", e(c.T, "time horizon")},
      {"n", e(c.n, "uniform time steps on [0, T]")},
      {"N", e(c.N, "Monte Carlo sample size (paths)")},
      {"seed", e(c.seed, "master seed")},
      {"workers", e(c.workers, "worker threads; results do not depend on it")},
      {"out", e(c.out, "output directory")},
      {"method", e(c.method, "fBm sampler: volterra or cholesky")},
      {"ladder", e(json::array(), "mollifier bandwidths eps_k, strictly decreasing; empty means 2^-1 .. 2^-8")},
      {"epsilon", e(c.epsilon, "bandwidth for single-bandwidth studies")},
      {"x", e(c.x, "local-time level, applied to every component")},
      {"alpha", e(c.alpha, "drift weight of the mollified SDE and of the Girsanov drift")},
      {"x0", e(c.x0, "SDE initial value, applied to every component")},
      {"scheme", e(c.scheme, "SDE scheme: segment or euler")},
      {"t", e(c.t, "self-similarity time, 0 < t <= T")},
      {"times", e(c.times, "exponent regression times, increasing in (0, T]")},
      {"moment_orders", e(c.moment_orders, "local-time moment orders m")},
      {"K", e(nullptr, "local non-determinism constant; null means calibrated from the conditional variances")},
      {"holder_m", e(c.holder_m, "Holder moment order")},
      {"holder_lags", e(c.holder_lags, "Holder lags in grid steps")},
      {"beta", e(c.beta, "compactness exponent, 0 < beta < 1/2")},
      {"cells", e(c.cells, "differentiation-time cells of the compactness diagnostic")},
      {"mu", e(c.mu, "exponential-moment weight")},
      {"path_files", e(c.path_files, "number of path CSV files written, at most N")},
      {"studies", e(json::array(), "studies to run; empty means the command's default set")},
      {"only", e(c.only, "verify group filter; empty runs every group")},
  };
}

RunConfig RunConfig::from_json(const json& j, RunConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c = std::move(base);
  for (const auto& [key, v] : j.items()) {
    if (key == "H") c.H = get_real(v, key);
    else if (key == "d") c.d = get_count(v, key);
    else if (key == "T") c.T = get_real(v, key);
    else if (key == "n") c.n = get_count(v, key);
    else if (key == "N") c.N = get_count(v, key);
    else if (key == "seed") c.seed = get_count(v, key);
    else if (key == "workers") c.workers = static_cast<unsigned>(get_count(v, key));
    else if (key == "out") c.out = get_as<std::string>(v, key, "a string");
    else if (key == "method") c.method = get_as<std::string>(v, key, "a string");
    else if (key == "ladder") c.ladder = get_reals(v, key);
    else if (key == "epsilon") c.epsilon = get_real(v, key);
    else if (key == "x") c.x = get_real(v, key);
    else if (key == "alpha") c.alpha = get_real(v, key);
    else if (key == "x0") c.x0 = get_real(v, key);
    else if (key == "scheme") c.scheme = get_as<std::string>(v, key, "a string");
    else if (key == "t") c.t = get_real(v, key);
    else if (key == "times") c.times = get_reals(v, key);
    else if (key == "moment_orders") c.moment_orders = get_as<std::vector<int>>(v, key, "an array of integers");
    else if (key == "K") c.K = v.is_null() ? std::nullopt : std::optional<double>(get_real(v, key));
    else if (key == "holder_m") c.holder_m = get_as<int>(v, key, "an integer");
    else if (key == "holder_lags") {
      if (!v.is_array()) throw ConfigError("config key 'holder_lags': expected an array of integers");
      c.holder_lags.clear();
      for (const auto& e : v) c.holder_lags.push_back(get_count(e, key));
    } else if (key == "beta") c.beta = get_real(v, key);
    else if (key == "cells") c.cells = get_count(v, key);
    else if (key == "mu") c.mu = get_real(v, key);
    else if (key == "path_files") c.path_files = get_count(v, key);
    else if (key == "studies") c.studies = get_as<std::vector<std::string>>(v, key, "an array of strings");
    else if (key == "only") c.only = get_as<std::string>(v, key, "a string");
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

json RunConfig::to_json() const {
  return {{"H", H},
          {"d", d},
          {"T", T},
          {"n", n},
          {"N", N},
          {"seed", seed},
          {"workers", workers},
          {"out", out},
          {"method", method},
          {"ladder", ladder},
          {"epsilon", epsilon},
          {"x", x},
          {"alpha", alpha},
          {"x0", x0},
          {"scheme", scheme},
          {"t", t},
          {"times", times},
          {"moment_orders", moment_orders},
          {"K", K ? json(*K) : json(nullptr)},
          {"holder_m", holder_m},
          {"holder_lags", holder_lags},
          {"beta", beta},
          {"cells", cells},
          {"mu", mu},
          {"path_files", path_files},
          {"studies", studies},
          {"only", only}};
}

void RunConfig::validate() const {
  try {
    fbm().validate();
    sampler();
    sde::parse_scheme(scheme);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (sampler() == fbm::SamplerMethod::cholesky && n > fbm::CholeskySampler::kMaxSteps)
    throw ConfigError("cholesky sampler is limited to n <= 4096");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  const auto lad = effective_ladder();
  if (lad.size() < 2) throw ConfigError("ladder needs at least two bandwidths");
  for (std::size_t k = 0; k < lad.size(); ++k) {
    if (!(lad[k] > 0.0) || !std::isfinite(lad[k])) throw ConfigError("ladder bandwidths must be > 0");
    if (k > 0 && !(lad[k] < lad[k - 1])) throw ConfigError("ladder must be strictly decreasing");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
  if (!std::isfinite(x) || !std::isfinite(alpha) || !std::isfinite(x0)) throw ConfigError("x, alpha and x0 must be finite");
  if (!(t > 0.0 && t <= T)) throw ConfigError("t must lie in (0, T]");
  if (times.size() < 2) throw ConfigError("times needs at least two entries");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0 && times[k] <= T)) throw ConfigError("times must lie in (0, T]");
    if (k > 0 && !(times[k] > times[k - 1])) throw ConfigError("times must be increasing");
  }
  if (moment_orders.empty()) throw ConfigError("moment_orders must not be empty");
  for (int m : moment_orders)
    if (m < 1) throw ConfigError("moment orders must be >= 1");
  if (K && !(*K > 0.0)) throw ConfigError("K must be > 0");
  if (holder_m < 1) throw ConfigError("holder_m must be >= 1");
  if (holder_lags.size() < 2) throw ConfigError("holder_lags needs at least two lags");
  for (auto l : holder_lags)
    if (l < 1) throw ConfigError("holder lags must be >= 1");
  if (!(beta > 0.0 && beta < 0.5)) throw ConfigError("beta must lie in (0, 1/2)");
  if (cells < 2) throw ConfigError("cells must be >= 2");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be >= 0");
  for (const auto& s : studies)
    if (std::find(registered_studies().begin(), registered_studies().end(), s) == registered_studies().end())
      throw ConfigError("unknown study '" + s + "'");
  if (!only.empty()) {
    const auto& g = verify::suite_groups();
    if (std::find(g.begin(), g.end(), only) == g.end()) throw ConfigError("unknown verify group '" + only + "'");
  }
}

fbm::FbmSpec RunConfig::fbm() const { return {H, d, T, n}; }

sde::SdeSpec RunConfig::sde() const {
  sde::SdeSpec s;
  s.x0.assign(d, x0);
  s.alpha = alpha;
  s.fbm = fbm();
  s.epsilon = epsilon;
  s.scheme = sde::parse_scheme(scheme);
  return s;
}

fbm::SamplerMethod RunConfig::sampler() const { return fbm::parse_sampler_method(method); }

std::vector<double> RunConfig::effective_ladder() const { return ladder.empty() ? lt::default_ladder() : ladder; }

namespace {

struct SeedLedger {
  std::mutex mutex;
  // (seed, tag) -> (path law, first study)
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<std::string, std::string>> used;
};

SeedLedger& ledger() {
  static SeedLedger l;
  return l;
}

std::string path_law(const RunConfig& c, fbm::SamplerMethod m) {
  return "H=" + format_double(c.H) + " d=" + std::to_string(c.d) + " T=" + format_double(c.T) + " n=" + std::to_string(c.n) +
         " method=" + fbm::to_string(m);
}

void record_seed_use(const std::string& study, const RunConfig& c, std::uint64_t tag, fbm::SamplerMethod m,
                     std::vector<std::string>& warnings) {
  auto& l = ledger();
  std::lock_guard<std::mutex> lock(l.mutex);
  const auto law = path_law(c, m);
  auto [it, inserted] = l.used.try_emplace({c.seed, tag}, law, study);
  if (!inserted && it->second.first != law)
    warnings.push_back("seed " + std::to_string(c.seed) + " was already used by study '" + it->second.second +
                       "' on the same substreams with different path settings (" + it->second.first + " vs " + law + ")");
}

std::string path_file_name(const char* prefix, std::size_t p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05zu.csv", prefix, p);
  return buf;
}

std::vector<double> level(const RunConfig& c) { return std::vector<double>(c.d, c.x); }

void fbm_paths(const RunConfig& c, StudyResult& r) {
  const auto method = c.sampler();
  record_seed_use(r.study, c, tags::fbm_paths, method, r.warnings);
  const auto spec = c.fbm();
  const std::size_t count = std::min(c.N, c.path_files);
  auto files = parallel_map(count, c.workers, [&](std::size_t p) {
    return fbm::path_csv(fbm::simulate_fbm(spec, c.mc().substream(tags::fbm_paths, p), method));
  });
  for (std::size_t p = 0; p < count; ++p) r.tables.push_back({path_file_name("fbm_path", p), std::move(files[p])});
  r.summary["paths_written"] = count;
  r.summary["method"] = c.method;
}

void fbm_covariance(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::fbm_paths, fbm::SamplerMethod::volterra, r.warnings);
  record_seed_use(r.study, c, tags::cholesky_oracle, fbm::SamplerMethod::cholesky, r.warnings);
  const auto s = fbm::fbm_covariance_study(c.fbm(), c.mc());
  CsvTable t({"t", "s", "exact", "implied", "volterra_cov", "volterra_se", "cholesky_cov", "cholesky_se", "z_exact",
              "z_methods", "within"});
  for (const auto& row : s.rows) {
    t.row() << row.t << row.s << row.exact << row.implied << row.volterra.mean << row.volterra.std_error << row.cholesky.mean
            << row.cholesky.std_error << row.z_exact << row.z_methods << (row.within ? "true" : "false");
    r.estimates.push_back(row.volterra);
  }
  r.tables.push_back({"fbm_covariance.csv", t.str()});
  r.summary["max_abs_z"] = s.max_abs_z;
  r.passed = s.passed;
}

void local_time_ladder(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::local_time, c.sampler(), r.warnings);
  const auto lad = c.effective_ladder();
  const auto x = level(c);
  const auto s = lt::local_time_cauchy_study(c.fbm(), x, lad, c.mc(), c.sampler());
  CsvTable t({"k", "eps_hi", "eps_lo", "mean_L_hi", "mean_L_hi_se", "mean_L_lo", "mean_L_lo_se", "gap", "gap_se", "N"});
  for (std::size_t k = 0; k < s.rungs.size(); ++k) {
    const auto& g = s.rungs[k];
    t.row() << (k + 1) << g.eps_hi << g.eps_lo << s.level[k].mean << s.level[k].std_error << s.level[k + 1].mean
            << s.level[k + 1].std_error << g.gap.mean << g.gap.std_error << g.gap.count;
    r.estimates.push_back(g.gap);
  }
  r.tables.push_back({"lt_ladder.csv", t.str()});
  r.summary["decreasing"] = s.decreasing;
  if (s.hd_warning) r.warnings.push_back("Hd >= 1: the local time does not exist and the ladder need not converge");
  r.passed = s.decreasing;
}

void local_time_self_similarity(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::self_similarity_a, c.sampler(), r.warnings);
  record_seed_use(r.study, c, tags::self_similarity_b, c.sampler(), r.warnings);
  const auto s = lt::self_similarity_test(c.fbm(), c.t, c.epsilon, c.mc(), c.sampler());
  CsvTable t({"t", "epsilon", "N_a", "N_b", "ks_statistic", "p_value", "exact_p", "passed"});
  t.row() << s.t << s.epsilon << s.ks.n << s.ks.m << s.ks.statistic << s.ks.p_value << (s.ks.exact ? "true" : "false")
          << (s.passed ? "true" : "false");
  r.tables.push_back({"lt_self_similarity.csv", t.str()});
  r.summary["p_value"] = s.ks.p_value;
  if (s.insufficient_sample) r.warnings.push_back("self-similarity sample too small for a meaningful KS test");
  r.passed = s.passed;
}

void local_time_moments(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::local_time, c.sampler(), r.warnings);
  const double K = c.K ? *c.K : fbm::calibrated_nondeterminism_constant(c.fbm());
  const auto s = lt::moment_bound_check(c.fbm(), c.epsilon, c.moment_orders, K, c.mc(), c.sampler());
  CsvTable t({"m", "epsilon", "K", "moment", "std_error", "bound", "ok"});
  for (const auto& row : s.rows) {
    t.row() << row.m << s.epsilon << s.K << row.moment.mean << row.moment.std_error << row.bound << (row.ok ? "true" : "false");
    r.estimates.push_back(row.moment);
  }
  r.tables.push_back({"lt_moments.csv", t.str()});
  r.summary["K"] = K;
  r.summary["K_calibrated"] = !c.K.has_value();
  r.passed = s.ok;
}

void local_time_exponent(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::local_time, c.sampler(), r.warnings);
  const auto s = lt::exponent_regression(c.fbm(), c.times, c.epsilon, c.mc(), c.sampler());
  CsvTable t({"t", "log_t", "mean_local_time", "std_error", "log_mean", "fitted_log_mean"});
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double lt_ = std::log(s.times[k]);
    t.row() << s.times[k] << lt_ << s.mean_local_time[k].mean << s.mean_local_time[k].std_error
            << std::log(s.mean_local_time[k].mean) << (s.fit.intercept + s.fit.slope * lt_);
    r.estimates.push_back(s.mean_local_time[k]);
  }
  r.tables.push_back({"lt_exponent.csv", t.str()});
  r.summary["slope"] = s.fit.slope;
  r.summary["slope_se"] = s.fit.slope_se;
  r.summary["expected_slope"] = s.expected_slope;
  r.passed = std::abs(s.fit.slope - s.expected_slope) <= 0.05;
}

void regime_note(const RunConfig& c, StudyResult& r) {
  if (sde::in_proven_regime(c.H, c.d)) return;
  r.summary["outside_proven_regime"] = true;
  r.warnings.push_back("H >= 1/(2(2+d)): outside the regime where the ladder is known to converge");
}

void sde_paths(const RunConfig& c, StudyResult& r) {
  const auto method = c.sampler();
  record_seed_use(r.study, c, tags::fbm_paths, method, r.warnings);
  const auto spec = c.sde();
  const std::size_t count = std::min(c.N, c.path_files);
  auto files = parallel_map(count, c.workers, [&](std::size_t p) {
    const auto B = fbm::simulate_fbm(spec.fbm, c.mc().substream(tags::fbm_paths, p), method);
    return fbm::path_csv(sde::solve_mollified(spec, B));
  });
  for (std::size_t p = 0; p < count; ++p) r.tables.push_back({path_file_name("sde_path", p), std::move(files[p])});
  r.summary["paths_written"] = count;
  regime_note(c, r);
}

void sde_ladder(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::sde, c.sampler(), r.warnings);
  const auto lad = c.effective_ladder();
  const auto s = sde::convergence_ladder(c.sde(), lad, c.mc(), c.sampler());
  CsvTable t({"k", "eps_hi", "eps_lo", "gap", "std_error", "N"});
  for (std::size_t k = 0; k < s.rungs.size(); ++k) {
    const auto& g = s.rungs[k];
    t.row() << (k + 1) << g.eps_hi << g.eps_lo << g.gap.mean << g.gap.std_error << g.gap.count;
    r.estimates.push_back(g.gap);
  }
  r.tables.push_back({"sde_ladder.csv", t.str()});
  r.summary["decreasing"] = s.decreasing;
  r.summary["regime_warning"] = s.regime_warning;
  regime_note(c, r);
  if (s.regime_warning) r.warnings.push_back("a ladder gap exceeds its predecessor by more than 3 standard errors");
  r.passed = s.decreasing;
}

void sde_holder(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::holder, c.sampler(), r.warnings);
  if (c.N < 2) throw std::invalid_argument("Holder check needs at least two paths");
  for (auto l : c.holder_lags)
    if (l > c.n) throw ConfigError("holder lags must lie in [1, n]");
  const auto spec = c.sde();
  const auto method = c.sampler();
  struct Pair {
    fbm::PathMatrix solution, control;
  };
  auto ens = parallel_map(c.N, c.workers, [&](std::size_t p) {
    auto B = fbm::simulate_fbm(spec.fbm, c.mc().substream(tags::holder, p), method);
    B.driver.reset();
    auto X = sde::solve_mollified(spec, B);
    return Pair{std::move(X), std::move(B)};
  });
  std::vector<fbm::PathMatrix> sol, ctl;
  for (auto& e : ens) {
    sol.push_back(std::move(e.solution));
    ctl.push_back(std::move(e.control));
  }
  ens.clear();
  const auto a = sde::holder_moment_check(sol, c.holder_m, c.holder_lags, c.H);
  const auto b = sde::holder_moment_check(ctl, c.holder_m, c.holder_lags, c.H);
  CsvTable t({"lag_steps", "lag", "moment", "std_error", "control_moment", "control_std_error"});
  for (std::size_t k = 0; k < a.lags.size(); ++k) {
    t.row() << c.holder_lags[k] << a.lags[k] << a.moment[k].mean << a.moment[k].std_error << b.moment[k].mean
            << b.moment[k].std_error;
    r.estimates.push_back(a.moment[k]);
  }
  r.tables.push_back({"sde_holder.csv", t.str()});
  const double control_expected = c.holder_m * c.H;
  r.summary["slope"] = a.fit.slope;
  r.summary["expected_min_slope"] = a.expected_min_slope;
  r.summary["fitted_C"] = a.fitted_C;
  r.summary["control_slope"] = b.fit.slope;
  r.summary["control_expected_slope"] = control_expected;
  regime_note(c, r);
  r.passed = std::isfinite(a.fitted_C) && std::abs(b.fit.slope - control_expected) <= 0.05;
}

void sde_compactness(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::compactness, c.sampler(), r.warnings);
  const auto lad = c.effective_ladder();
  const auto s = sde::compactness_diagnostic(c.sde(), lad, c.mc(), c.beta, c.cells, c.sampler());
  CsvTable t({"epsilon", "double_integral", "std_error", "l2_norm", "l2_std_error"});
  for (const auto& row : s.rows) {
    t.row() << row.epsilon << row.double_integral.mean << row.double_integral.std_error << row.l2_norm.mean
            << row.l2_norm.std_error;
    r.estimates.push_back(row.double_integral);
  }
  r.tables.push_back({"sde_compactness.csv", t.str()});
  r.summary["beta"] = s.beta;
  r.summary["band"] = s.band;
  r.summary["deterministic_reference"] = s.deterministic_reference;
  r.summary["max_over_min"] = s.max_over_min;
  regime_note(c, r);
  const bool stable = s.max_over_min < 2.0;
  if (!sde::in_proven_regime(c.H, c.d)) {
    if (!stable) r.warnings.push_back("compactness diagnostic varies by more than a factor 2 along the ladder");
  } else {
    r.passed = stable;
  }
}

void girsanov_mean_one(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::girsanov, fbm::SamplerMethod::volterra, r.warnings);
  const lt::MollifierSpec ms{c.epsilon, level(c)};
  auto zero_mc = c.mc();
  zero_mc.paths = std::min<std::size_t>(c.N, 200);
  const auto z = girsanov::mean_one_test(c.fbm(), ms, 0.0, zero_mc);
  const auto a = girsanov::mean_one_test(c.fbm(), ms, c.alpha, c.mc());
  CsvTable t({"alpha", "epsilon", "N", "xi_mean", "std_error", "z", "ess", "ess_fraction", "min_xi", "max_xi", "within"});
  for (const auto* m : {&z, &a}) {
    t.row() << m->alpha << m->epsilon << m->xi.count << m->xi.mean << m->xi.std_error << m->z << *m->xi.ess
            << (*m->xi.ess / static_cast<double>(m->xi.count)) << m->min_xi << m->max_xi << (m->within ? "true" : "false");
    r.estimates.push_back(m->xi);
  }
  r.tables.push_back({"girsanov_mean_one.csv", t.str()});
  r.summary["zero_drift_exact"] = z.all_exactly_one;
  r.summary["z"] = a.z;
  r.passed = z.all_exactly_one && a.within;
}

void girsanov_exp_moments(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::girsanov, fbm::SamplerMethod::volterra, r.warnings);
  const auto lad = c.effective_ladder();
  const auto s = girsanov::exponential_moment_estimate(c.fbm(), lad, c.mu, c.mc(), level(c));
  CsvTable t({"epsilon", "estimate", "std_error", "log_estimate", "ess", "heavy_tail"});
  bool heavy = false, finite = true;
  for (const auto& row : s.rows) {
    t.row() << row.epsilon << row.estimate << row.std_error << row.log_estimate << row.ess << (row.heavy_tail ? "true" : "false");
    r.estimates.push_back({row.estimate, row.std_error, c.N, row.ess});
    heavy = heavy || row.heavy_tail;
    finite = finite && std::isfinite(row.estimate);
  }
  r.tables.push_back({"girsanov_exp_moments.csv", t.str()});
  const double growth = s.sup_estimate / s.rows.front().estimate;
  const bool bounded = finite && growth < 2.0 && !heavy;
  r.summary["mu"] = s.mu;
  r.summary["sup_estimate"] = s.sup_estimate;
  r.summary["sup_over_first"] = growth;
  r.summary["bounded"] = bounded;
  r.summary["outside_regime"] = s.outside_regime;
  if (s.outside_regime) {
    r.warnings.push_back("H >= 1/(2(1+d)): exponential moments are not expected to stay bounded");
    if (!bounded) r.warnings.push_back("exponential moments grow along the ladder");
  } else {
    r.passed = bounded;
  }
}

void girsanov_covariance(const RunConfig& c, StudyResult& r) {
  record_seed_use(r.study, c, tags::girsanov, fbm::SamplerMethod::volterra, r.warnings);
  const lt::MollifierSpec ms{c.epsilon, level(c)};
  const auto s = girsanov::measure_change_covariance_test(c.fbm(), ms, c.alpha, c.mc());
  CsvTable t({"kind", "t", "s", "target", "weighted", "weighted_se", "unweighted", "unweighted_se", "within"});
  for (const auto& row : s.covariance) {
    t.row() << "covariance" << row.t << row.s << row.target << row.weighted.mean << row.weighted.std_error
            << row.unweighted.mean << row.unweighted.std_error << (row.within ? "true" : "false");
    r.estimates.push_back(row.weighted);
  }
  for (const auto& row : s.mean) {
    t.row() << "mean" << row.t << row.t << 0.0 << row.weighted.mean << row.weighted.std_error << "" << ""
            << (row.within ? "true" : "false");
    r.estimates.push_back(row.weighted);
  }
  r.tables.push_back({"girsanov_covariance.csv", t.str()});
  r.summary["verdict"] = girsanov::to_string(s.verdict);
  r.summary["reason"] = s.reason;
  r.summary["ess"] = s.ess;
  r.summary["ess_fraction"] = s.ess_fraction;
  if (s.verdict == girsanov::Verdict::inconclusive) r.warnings.push_back("measure-change test inconclusive: " + s.reason);
  r.passed = s.verdict != girsanov::Verdict::fail;
}

void identity_audits(const RunConfig& c, StudyResult& r) {
  verify::SuiteOptions opt;
  opt.only = c.only;
  opt.seed = c.seed;
  opt.workers = c.workers;
  const auto rows = verify::run_verify_suite(opt);
  r.tables.push_back({"verify.csv", verify::suite_csv(rows)});
  std::size_t failed = 0;
  for (const auto& row : rows) failed += row.passed ? 0 : 1;
  r.summary["checks"] = rows.size();
  r.summary["failed"] = failed;
  r.passed = verify::all_passed(rows);
}

using StudyFn = std::function<void(const RunConfig&, StudyResult&)>;

const std::vector<std::pair<std::string, StudyFn>>& registry() {
  static const std::vector<std::pair<std::string, StudyFn>> r{
      {"fbm_paths", fbm_paths},
      {"fbm_covariance", fbm_covariance},
      {"local_time_ladder", local_time_ladder},
      {"local_time_self_similarity", local_time_self_similarity},
      {"local_time_moments", local_time_moments},
      {"local_time_exponent", local_time_exponent},
      {"sde_paths", sde_paths},
      {"sde_ladder", sde_ladder},
      {"sde_holder", sde_holder},
      {"sde_compactness", sde_compactness},
      {"girsanov_mean_one", girsanov_mean_one},
      {"girsanov_exp_moments", girsanov_exp_moments},
      {"girsanov_covariance", girsanov_covariance},
      {"identity_audits", identity_audits},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& registered_studies() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

StudyResult run_study(const std::string& name, const RunConfig& cfg) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == name; });
  if (it == reg.end()) throw ConfigError("unknown study '" + name + "'");
  cfg.validate();
  if (cfg.N == 0) throw std::invalid_argument("empty study");
  StudyResult r;
  r.study = name;
  r.manifest.command = "study:" + name;
  r.manifest.config = cfg.to_json();
  r.manifest.config["studies"] = nlohmann::json::array({name});
  r.manifest.master_seed = cfg.seed;
  r.manifest.workers = cfg.workers;
  r.manifest.started_utc = utc_timestamp();
  it->second(cfg, r);
  r.manifest.finished_utc = utc_timestamp();
  for (const auto& t : r.tables) r.manifest.outputs.push_back(t.name);
  r.summary["passed"] = r.passed;
  r.summary["warnings"] = r.warnings;
  r.manifest.summary = r.summary;
  return r;
}

StudyResult run_study(const std::string& name, RunConfig cfg, const McConfig& mc) {
  cfg.N = mc.paths;
  cfg.seed = mc.seed;
  cfg.workers = mc.workers;
  return run_study(name, cfg);
}

StudyResult rerun_from_manifest(const RunManifest& manifest) {
  const std::string prefix = "study:";
  if (manifest.command.rfind(prefix, 0) != 0) throw ConfigError("manifest was not written by a study run");
  auto cfg = RunConfig::from_json(manifest.config);
  cfg.workers = 1;
  return run_study(manifest.command.substr(prefix.size()), cfg);
}

void reset_seed_ledger() {
  auto& l = ledger();
  std::lock_guard<std::mutex> lock(l.mutex);
  l.used.clear();
}

}  // namespace skewfbm::mc
