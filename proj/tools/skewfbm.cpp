// Command-line front end: one subcommand per family of studies.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewfbm/mc/study.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using skewfbm::mc::ConfigError;
using skewfbm::mc::RunConfig;

namespace {

constexpr int kOk = 0;
constexpr int kStudyFailure = 1;
constexpr int kConfigError = 2;

// Flag values, applied on top of the config file. Only flags that were
// given end up in the overlay.
struct Flags {
  std::string config;
  json overlay = json::object();
};

template <class T>
void add_flag(CLI::App& app, Flags& f, const std::string& flag, const std::string& key, const std::string& help) {
  app.add_option_function<T>(flag, [&f, key](const T& v) { f.overlay[key] = v; }, help);
}

template <class T>
void add_list(CLI::App& app, Flags& f, const std::string& flag, const std::string& key, const std::string& help) {
  app.add_option_function<std::vector<T>>(flag, [&f, key](const std::vector<T>& v) { f.overlay[key] = v; }, help)
      ->delimiter(',');
}

void add_common_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON config file, or a manifest written by an earlier run");
  add_flag<std::uint64_t>(app, f, "--seed", "seed", "master seed");
  add_flag<unsigned>(app, f, "--workers", "workers", "worker threads");
  add_flag<std::string>(app, f, "--out", "out", "output directory");
  add_flag<double>(app, f, "--H", "H", "Hurst index in (0, 1/2)");
  add_flag<std::size_t>(app, f, "--d", "d", "dimension");
  add_flag<double>(app, f, "--T", "T", "time horizon");
  add_flag<std::size_t>(app, f, "--n", "n", "time steps");
  add_flag<std::size_t>(app, f, "--N", "N", "Monte Carlo paths");
  add_flag<std::string>(app, f, "--method", "method", "volterra or cholesky");
  add_list<double>(app, f, "--ladder", "ladder", "comma-separated decreasing bandwidths");
  add_flag<double>(app, f, "--epsilon", "epsilon", "bandwidth of single-bandwidth studies");
  add_flag<double>(app, f, "--x", "x", "local-time level");
  add_flag<double>(app, f, "--alpha", "alpha", "drift weight");
  add_flag<double>(app, f, "--x0", "x0", "SDE initial value");
  add_flag<std::string>(app, f, "--scheme", "scheme", "segment or euler");
  add_flag<double>(app, f, "--t", "t", "self-similarity time");
  add_list<double>(app, f, "--times", "times", "exponent regression times");
  add_list<int>(app, f, "--moment-orders", "moment_orders", "local-time moment orders");
  add_flag<double>(app, f, "--K", "K", "local non-determinism constant");
  add_flag<int>(app, f, "--holder-m", "holder_m", "Holder moment order");
  add_list<std::size_t>(app, f, "--holder-lags", "holder_lags", "Holder lags in grid steps");
  add_flag<double>(app, f, "--beta", "beta", "compactness exponent");
  add_flag<std::size_t>(app, f, "--cells", "cells", "compactness cells");
  add_flag<double>(app, f, "--mu", "mu", "exponential-moment weight");
  add_flag<std::size_t>(app, f, "--path-files", "path_files", "path CSV files to write");
  add_list<std::string>(app, f, "--studies", "studies", "studies to run");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

RunConfig resolve_config(const std::string& command, const Flags& f) {
  RunConfig cfg = RunConfig::defaults(command);
  if (!f.config.empty()) {
    json doc = read_json(f.config);
    // a run manifest carries the complete config of the run
    if (doc.is_object() && doc.contains("schema_version") && doc.contains("config")) doc = doc["config"];
    cfg = RunConfig::from_json(doc, cfg);
  }
  return RunConfig::from_json(f.overlay, cfg);
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

int run_command(const std::string& command, const Flags& f) {
  RunConfig cfg = resolve_config(command, f);
  if (command == "local-time" && cfg.H * static_cast<double>(cfg.d) >= 1.0)
    std::cerr << "warning: Hd >= 1, the local time does not exist for these parameters\n";
  cfg.validate();

  const auto& studies = cfg.studies.empty() ? skewfbm::mc::default_studies(command) : cfg.studies;
  const fs::path out(cfg.out);
  fs::create_directories(out);

  skewfbm::mc::RunManifest manifest;
  manifest.command = command;
  manifest.config = cfg.to_json();
  manifest.master_seed = cfg.seed;
  manifest.workers = cfg.workers;
  manifest.started_utc = skewfbm::mc::utc_timestamp();

  bool all_passed = true;
  for (const auto& name : studies) {
    const auto r = skewfbm::mc::run_study(name, cfg);
    for (const auto& t : r.tables) {
      write_text(out / t.name, t.csv);
      manifest.outputs.push_back(t.name);
    }
    const std::string manifest_name = name + ".manifest.json";
    r.manifest.write(out / manifest_name);
    manifest.outputs.push_back(manifest_name);
    manifest.summary[name] = r.summary;
    for (const auto& w : r.warnings) std::cerr << "warning: " << name << ": " << w << '\n';
    if (name == "identity_audits") std::cout << r.tables.front().csv;
    std::cout << (r.passed ? "PASS " : "FAIL ") << name << '\n';
    all_passed = all_passed && r.passed;
  }
  manifest.finished_utc = skewfbm::mc::utc_timestamp();
  manifest.write(out / "manifest.json");
  return all_passed ? kOk : kStudyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skew fractional Brownian motion studies"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  std::string command;

  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs{
      {"simulate-fbm", "fBm paths and the Volterra/Cholesky covariance table"},
      {"local-time", "smoothed local-time ladder, self-similarity, moments and exponent"},
      {"solve-sde", "mollified SDE paths, ladder, Holder check and compactness diagnostic"},
      {"girsanov", "mean-one, exponential moments and the measure-change covariance test"},
      {"verify", "identity and bound verifier suite"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->callback([&command, name = std::string(s.name)] { command = name; });
  }
  add_common_flags(app, flags);
  app.add_option_function<std::string>("--only", [&flags](const std::string& g) { flags.overlay["only"] = g; },
                                       "verify group filter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    return run_command(command, flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStudyFailure;
  }
}
