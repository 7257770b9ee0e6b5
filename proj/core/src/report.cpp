#include "heatlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

namespace heatlab::harness {

using estimators::format_number;

namespace {

std::string exponent(double v) { return std::isnan(v) ? std::string() : format_number(v); }

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ' ');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string csv_row(const EstimateRecord& r) {
  std::string aux = r.claim;
  if (!r.aux.empty()) aux += (aux.empty() ? "" : ";") + r.aux;
  std::string row;
  row += r.scenario + ',' + r.domain + ',' + std::to_string(r.level) + ',' + format_number(r.h) + ',' +
         std::to_string(r.r) + ',' + exponent(r.p) + ',' + exponent(r.q) + ',' + format_number(r.value) + ',' +
         sanitize(aux) + ',' + format_number(r.K_quasi);
  return row;
}

void write_csv(std::ostream& out, const std::vector<EstimateRecord>& records, std::string_view comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << csv_row(r) << '\n';
}

std::string csv_body(std::string_view csv) {
  std::string out;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    const auto line = csv.substr(0, nl == std::string_view::npos ? csv.size() : nl + 1);
    if (line.empty() || line.front() != '#') out += line;
    csv.remove_prefix(line.size());
  }
  return out;
}

std::vector<ClaimSeries> group_claims(const std::vector<EstimateRecord>& records) {
  std::vector<ClaimSeries> out;
  std::map<std::tuple<std::string, std::string, std::string, std::string, std::string>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.scenario, r.domain, r.claim, exponent(r.p), exponent(r.q));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      ClaimSeries s;
      s.scenario = r.scenario;
      s.domain = r.domain;
      s.claim = r.claim;
      s.p = r.p;
      s.q = r.q;
      s.skipped = true;
      out.push_back(std::move(s));
    }
    auto& s = out[it->second];
    if (r.skipped) continue;
    s.skipped = false;
    s.levels.push_back(r.level);
    s.h.push_back(r.h);
    s.values.push_back(r.value);
  }
  return out;
}

Verdict verdict(const ClaimSeries& s, double slope_limit) {
  Verdict v;
  if (s.skipped || s.values.empty()) {
    v.kind = VerdictKind::skipped;
    return v;
  }
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    if (s.values[i - 1] > 0.0) v.max_growth = std::max(v.max_growth, s.values[i] / s.values[i - 1] - 1.0);
  }
  // Round-off level diagnostics carry no growth signal.
  const bool roundoff = std::all_of(s.values.begin(), s.values.end(), [](double x) { return std::abs(x) < 1e-10; });
  const bool positive = std::all_of(s.values.begin(), s.values.end(), [](double x) { return x > 0.0; });
  if (s.values.size() >= 2 && positive && !roundoff) {
    v.rate = -estimators::loglog_slope(s.h, s.values);
    if (v.rate > slope_limit) v.kind = VerdictKind::growing;
  }
  return v;
}

std::string to_string(const Verdict& v) {
  switch (v.kind) {
    case VerdictKind::bounded:
      return "BOUNDED";
    case VerdictKind::growing:
      return "GROWING(" + format_number(v.rate) + ")";
    case VerdictKind::skipped:
      return "SKIPPED";
  }
  return "?";
}

void write_summary(std::ostream& out, const std::vector<ClaimSeries>& series) {
  for (const auto& s : series) {
    out << s.scenario << " / " << s.domain << " / " << s.claim;
    if (!std::isnan(s.p) || !std::isnan(s.q)) out << " (p=" << exponent(s.p) << ", q=" << exponent(s.q) << ")";
    out << ':';
    for (std::size_t i = 0; i < s.values.size(); ++i) out << " L" << s.levels[i] << '=' << format_number(s.values[i]);
    out << "  -> " << to_string(verdict(s)) << '\n';
  }
}

}  // namespace heatlab::harness
