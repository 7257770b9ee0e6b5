#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace heatlab::harness {

/// Scenario names in execution order.
const std::vector<std::string>& all_scenarios();
const std::vector<std::string>& all_domains();

struct RunConfig {
  std::vector<std::string> domains = all_domains();
  int level_min = 3;
  int level_max = 5;
  int r = 1;
  std::vector<std::string> scenarios = all_scenarios();
  double C_star = 16.0;
  std::uint64_t seed = 42;
  double T = 1.0;
  std::string output = "heatlab.csv";
  std::size_t eigen_cap = 5000;
  std::string cache_dir;  ///< empty disables the eigendecomposition cache

  std::vector<int> levels() const;
  bool has_scenario(std::string_view name) const;
};

/// "a..b" (or a single integer) into an inclusive range.
std::pair<int, int> parse_level_range(std::string_view text);

/// [section] headers and key = value lines; '#' and ';' start comments.
/// Unknown keys raise parse-error with the line number; bad values raise validation-error.
RunConfig parse_config(std::string_view text);

/// Raises validation-error for out-of-range fields or unknown names.
void validate(const RunConfig& config);

}  // namespace heatlab::harness
