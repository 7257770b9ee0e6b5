#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "heatlab/estimators.hpp"

namespace heatlab::harness {

using estimators::EstimateRecord;

inline constexpr std::string_view kCsvHeader = "scenario,domain,level,h,r,p,q,value,aux,K_quasi";

std::string csv_row(const EstimateRecord& r);
/// Header, an optional "# ..." comment line first, then one row per record.
void write_csv(std::ostream& out, const std::vector<EstimateRecord>& records, std::string_view comment = {});
/// The CSV text without '#' lines.
std::string csv_body(std::string_view csv);

/// Level-wise values of one measured quantity.
struct ClaimSeries {
  std::string scenario;
  std::string domain;
  std::string claim;
  double p = 0.0;
  double q = 0.0;
  std::vector<int> levels;
  std::vector<double> h;
  std::vector<double> values;
  bool skipped = false;  ///< every level was skipped
};

std::vector<ClaimSeries> group_claims(const std::vector<EstimateRecord>& records);

enum class VerdictKind { bounded, growing, skipped };

struct Verdict {
  VerdictKind kind = VerdictKind::bounded;
  double rate = 0.0;        ///< -slope of log value against log h
  double max_growth = 0.0;  ///< largest v_{l+1}/v_l - 1 over consecutive levels
};

/// GROWING when the log-log slope against h is below -slope_limit.
Verdict verdict(const ClaimSeries& s, double slope_limit = 0.3);
std::string to_string(const Verdict& v);

void write_summary(std::ostream& out, const std::vector<ClaimSeries>& series);

}  // namespace heatlab::harness
