#include "heatlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "heatlab/error.hpp"

namespace heatlab::harness {

const std::vector<std::string>& all_scenarios() {
  static const std::vector<std::string> names{"assembly-check", "spectrum", "analyticity", "maximal-function",
                                              "maxreg",         "kernels",  "dyadic",      "best-approx",
                                              "projections",    "deltainv", "corollary23"};
  return names;
}

const std::vector<std::string>& all_domains() {
  static const std::vector<std::string> names{"square", "lshape"};
  return names;
}

std::vector<int> RunConfig::levels() const {
  std::vector<int> out;
  for (int l = level_min; l <= level_max; ++l) out.push_back(l);
  return out;
}

bool RunConfig::has_scenario(std::string_view name) const {
  return std::find(scenarios.begin(), scenarios.end(), name) != scenarios.end();
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto c = s.find(',');
    const auto item = trim(s.substr(0, c));
    if (!item.empty()) out.emplace_back(item);
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& key) {
  s = trim(s);
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    raise(ErrorCode::validation_error, "invalid value '" + std::string(s) + "' for " + key);
  }
  return v;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

std::pair<int, int> parse_level_range(std::string_view text) {
  text = trim(text);
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    const int l = parse_number<int>(text, "levels");
    return {l, l};
  }
  const int a = parse_number<int>(text.substr(0, dots), "levels");
  const int b = parse_number<int>(text.substr(dots + 2), "levels");
  if (a > b) raise(ErrorCode::validation_error, "invalid level range " + std::string(text) + ": start exceeds end");
  return {a, b};
}

RunConfig parse_config(std::string_view text) {
  static const std::map<std::string, std::set<std::string>> allowed{
      {"run", {"domain", "levels", "r", "seed", "T", "output", "eigen_cap", "cache", "scenarios", "C_star"}},
      {"scenarios", {"enabled"}},
      {"dyadic", {"C_star"}},
  };
  RunConfig cfg;
  std::string section = "run";
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') raise(ErrorCode::parse_error, where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!allowed.contains(section)) raise(ErrorCode::parse_error, where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) raise(ErrorCode::parse_error, where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!allowed.at(section).contains(key)) {
      raise(ErrorCode::parse_error, where + ": unknown key '" + key + "' in [" + section + "]");
    }
    if (key == "domain") {
      cfg.domains = split_list(value);
    } else if (key == "levels") {
      std::tie(cfg.level_min, cfg.level_max) = parse_level_range(value);
    } else if (key == "r") {
      cfg.r = parse_number<int>(value, key);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, key);
    } else if (key == "T") {
      cfg.T = parse_number<double>(value, key);
    } else if (key == "output") {
      cfg.output = std::string(value);
    } else if (key == "eigen_cap") {
      cfg.eigen_cap = parse_number<std::size_t>(value, key);
    } else if (key == "cache") {
      cfg.cache_dir = std::string(value);
    } else if (key == "enabled" || key == "scenarios") {
      cfg.scenarios = split_list(value);
    } else if (key == "C_star") {
      cfg.C_star = parse_number<double>(value, key);
    }
  }
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.domains.empty()) raise(ErrorCode::validation_error, "no domain selected");
  for (const auto& d : cfg.domains) {
    if (std::find(all_domains().begin(), all_domains().end(), d) == all_domains().end()) {
      raise(ErrorCode::validation_error, "unknown domain '" + d + "' (allowed: " + join(all_domains()) + ")");
    }
  }
  for (const auto& s : cfg.scenarios) {
    if (std::find(all_scenarios().begin(), all_scenarios().end(), s) == all_scenarios().end()) {
      raise(ErrorCode::validation_error, "unknown scenario '" + s + "' (allowed: " + join(all_scenarios()) + ")");
    }
  }
  if (cfg.level_min < 1 || cfg.level_max > 9 || cfg.level_min > cfg.level_max) {
    raise(ErrorCode::validation_error, "levels must satisfy 1 <= a <= b <= 9");
  }
  if (cfg.r != 1 && cfg.r != 2) raise(ErrorCode::validation_error, "r must be 1 or 2");
  if (!(cfg.C_star >= 16.0)) raise(ErrorCode::validation_error, "C_star must be at least 16");
  if (!(cfg.T > 0.0)) raise(ErrorCode::validation_error, "T must be positive");
  if (cfg.eigen_cap == 0) raise(ErrorCode::validation_error, "eigen_cap must be positive");
  if (cfg.output.empty()) raise(ErrorCode::validation_error, "output path is empty");
}

}  // namespace heatlab::harness
