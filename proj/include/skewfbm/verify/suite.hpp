#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace skewfbm::verify {

struct SuiteRow {
  std::string name;
  std::string group;
  bool passed = false;
  std::string detail;
};

struct SuiteOptions {
  std::string only;            // one group name, empty for all
  std::uint64_t seed = 7;
  unsigned workers = 1;
  std::size_t permanent_audits = 1000;
  std::size_t li_wei_matrices = 100;
  std::size_t li_wei_paths = 100000;
  std::size_t ibp_paths = 20000;
  std::size_t iterated_draws = 40;
};

/// shuffles, permanents, gaussian, iterated, simplex, ibp, frac.
const std::vector<std::string>& suite_groups();

/// Throws std::invalid_argument for an unknown group in `only`.
std::vector<SuiteRow> run_verify_suite(const SuiteOptions& opt);

bool all_passed(const std::vector<SuiteRow>& rows);

/// name,group,passed,detail
std::string suite_csv(const std::vector<SuiteRow>& rows);

}  // namespace skewfbm::verify
