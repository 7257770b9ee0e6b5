#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "heatlab/config.hpp"
#include "heatlab/estimators.hpp"
#include "heatlab/report.hpp"

namespace heatlab::harness {

struct RunResult {
  std::vector<EstimateRecord> records;
  std::vector<std::string> hard_failures;  ///< invariant violations; nonzero exit
  std::vector<std::string> warnings;       ///< stability-threshold breaches
};

/// Runs the configured scenarios in fixed order. Progress goes to `log` when given.
RunResult run(const RunConfig& config, std::ostream* log = nullptr);

/// Per-level growth allowed before a stability warning (0.3, or 0.5 for the
/// best-approximation ratio and L-shape projection ratios).
double growth_limit(const ClaimSeries& s);

/// Appends warnings for stability breaches in the grouped series.
void check_stability(const std::vector<ClaimSeries>& series, std::vector<std::string>& warnings);

/// Oracle errors of the reference-triangle P1 element matrices: {mass, stiffness}.
std::pair<double, double> reference_element_errors();

}  // namespace heatlab::harness
