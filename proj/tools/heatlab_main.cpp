#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heatlab/config.hpp"
#include "heatlab/error.hpp"
#include "heatlab/harness.hpp"
#include "heatlab/report.hpp"

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw heatlab::Error(heatlab::ErrorCode::invalid_input, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heatlab: h-uniform constants for the semi-discrete heat equation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a refinement study and write the CSV");
  std::string config_path;
  std::string out_path;
  std::vector<std::string> scenarios;
  std::string levels;
  std::vector<std::string> domains;
  std::uint64_t seed = 0;
  std::string cache_dir;
  bool quiet = false;
  run->add_option("--config", config_path, "Config file ([section] and key = value lines)")->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "CSV output path");
  run->add_option("--scenario", scenarios, "Scenario to run (repeatable; overrides the config)");
  run->add_option("--levels", levels, "Inclusive level range a..b");
  run->add_option("--domain", domains, "square or lshape (repeatable)");
  auto* seed_opt = run->add_option("--seed", seed, "Probe seed");
  run->add_option("--cache", cache_dir, "Directory for cached eigendecompositions");
  run->add_flag("--quiet", quiet, "Suppress progress output");

  CLI11_PARSE(app, argc, argv);

  heatlab::harness::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = heatlab::harness::parse_config(read_file(config_path));
    if (!out_path.empty()) cfg.output = out_path;
    if (!scenarios.empty()) cfg.scenarios = scenarios;
    if (!levels.empty()) std::tie(cfg.level_min, cfg.level_max) = heatlab::harness::parse_level_range(levels);
    if (!domains.empty()) cfg.domains = domains;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
    heatlab::harness::validate(cfg);
  } catch (const heatlab::Error& e) {
    std::cerr << "error [" << heatlab::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  }

  heatlab::harness::RunResult result;
  try {
    result = heatlab::harness::run(cfg, quiet ? nullptr : &std::cerr);
  } catch (const heatlab::Error& e) {
    std::cerr << "error [" << heatlab::to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  }

  std::ofstream csv(cfg.output);
  if (!csv) {
    std::cerr << "error: cannot write " << cfg.output << '\n';
    return 2;
  }
  heatlab::harness::write_csv(csv, result.records, "heatlab run " + utc_timestamp());
  std::cout << "wrote " << result.records.size() << " rows to " << cfg.output << "\n\n";
  heatlab::harness::write_summary(std::cout, heatlab::harness::group_claims(result.records));
  for (const auto& w : result.warnings) std::cout << "WARN: " << w << '\n';
  for (const auto& f : result.hard_failures) std::cout << "FAIL: " << f << '\n';
  return result.hard_failures.empty() ? 0 : 1;
}
