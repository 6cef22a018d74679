#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewfbm/fbm/sampler.hpp"
#include "skewfbm/mc/estimator.hpp"
#include "skewfbm/mc/manifest.hpp"
#include "skewfbm/mc/study_config.hpp"
#include "skewfbm/sde/mollified_sde.hpp"

namespace skewfbm::mc {

/// Invalid or unknown configuration. Commands map it to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Every setting a study can read. The JSON keys are the field names; see
/// RunConfig::schema() for the defaults and meaning of each key.
struct RunConfig {
  double H = 0.2;
  std::size_t d = 1;
  double T = 1.0;
  std::size_t n = 256;
  std::size_t N = 1000;
  std::uint64_t seed = 7;
  unsigned workers = 1;
  std::string out = "out";
  std::string method = "volterra";
  std::vector<double> ladder;  // empty means 2^{-1}, ..., 2^{-8}
  double epsilon = 0.5;
  double x = 0.0;
  double alpha = 1.0;
  double x0 = 0.0;
  std::string scheme = "segment";
  double t = 0.5;
  std::vector<double> times{0.0625, 0.125, 0.25, 0.5, 1.0};
  std::vector<int> moment_orders{1, 2, 3};
  std::optional<double> K;
  int holder_m = 2;
  std::vector<std::size_t> holder_lags{1, 2, 4, 8, 16, 32, 64};
  double beta = 0.1;
  std::size_t cells = 32;
  double mu = 0.5;
  std::size_t path_files = 10;
  std::vector<std::string> studies;  // empty means the command's default set
  std::string only;                  // verify group filter

  /// Defaults of one command (simulate-fbm, local-time, solve-sde, girsanov,
  /// verify); they differ from the field initialisers in H, n, method and
  /// epsilon. An empty name gives the field initialisers.
  static RunConfig defaults(const std::string& command = "");
  /// Strict parse over `base`: unknown keys and wrong types throw ConfigError.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j) { return from_json(j, defaults()); }
  /// Complete document including defaults.
  nlohmann::json to_json() const;
  /// Key -> {default, description} for the given command.
  static nlohmann::json schema(const std::string& command = "");
  /// Domain checks; throws ConfigError.
  void validate() const;

  fbm::FbmSpec fbm() const;
  sde::SdeSpec sde() const;
  McConfig mc() const { return {N, seed, workers}; }
  fbm::SamplerMethod sampler() const;
  std::vector<double> effective_ladder() const;
};

struct StudyTable {
  std::string name;  // file name, e.g. "lt_ladder.csv"
  std::string csv;
};

struct StudyResult {
  std::string study;
  /// Headline estimates, in table order.
  std::vector<EstimatorResult> estimates;
  std::vector<StudyTable> tables;
  nlohmann::json summary = nlohmann::json::object();
  bool passed = true;
  std::vector<std::string> warnings;
  RunManifest manifest;
};

/// fbm_paths, fbm_covariance, local_time_ladder, local_time_self_similarity,
/// local_time_moments, local_time_exponent, sde_paths, sde_ladder,
/// sde_holder, sde_compactness, girsanov_mean_one, girsanov_exp_moments,
/// girsanov_covariance, identity_audits.
const std::vector<std::string>& registered_studies();

/// Studies a command runs when the config does not select any.
const std::vector<std::string>& default_studies(const std::string& command);

/// Runs one registered study. Throws ConfigError for an unknown study,
/// std::invalid_argument("empty study") for N = 0.
StudyResult run_study(const std::string& name, const RunConfig& cfg);

/// Same, with the sample size, seed and worker count taken from `mc`.
StudyResult run_study(const std::string& name, RunConfig cfg, const McConfig& mc);

/// Regenerates a study from a manifest written by run_study.
StudyResult rerun_from_manifest(const RunManifest& manifest);

/// Clears the process-wide record of (seed, substream tag) use that backs
/// the seed-reuse warning.
void reset_seed_ledger();

}  // namespace skewfbm::mc
