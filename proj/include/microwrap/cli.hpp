#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "microwrap/bench.hpp"

// The `bench` command behind the microwrap executable, kept separate from
// argument parsing so it can be driven in-process.

namespace microwrap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

struct BenchOptions {
  std::string config_path;
  bool checked = false;
  int repeat = 1;
};

using Runner = std::function<RunReport(const ChainConfig&, bool checked)>;

inline RunReport default_runner(const ChainConfig& cfg, bool checked) { return run_benchmark(cfg, checked); }

/// Summary line for --repeat: {"repeat":N,"min_steps_per_second":..,"median_steps_per_second":..}.
inline std::string repeat_summary(std::vector<double> rates) {
  std::sort(rates.begin(), rates.end());
  const std::size_t n = rates.size();
  const double median = n % 2 ? rates[n / 2] : 0.5 * (rates[n / 2 - 1] + rates[n / 2]);
  nlohmann::ordered_json summary;
  summary["repeat"] = n;
  summary["min_steps_per_second"] = rates.front();
  summary["median_steps_per_second"] = median;
  return summary.dump();
}

/// Loads, validates and builds the chain (exit 1 on failure), then runs it
/// `repeat` times in sequence printing one report line each (exit 2 if a run
/// throws).
inline int bench(const BenchOptions& opt, std::ostream& out, std::ostream& err, const Runner& runner = default_runner) {
  std::ifstream in(opt.config_path);
  if (!in) {
    err << "error: cannot read config '" << opt.config_path << "'\n";
    return kExitInvalid;
  }
  std::stringstream text;
  text << in.rdbuf();

  ChainConfig cfg;
  try {
    cfg = parse_config(text.str());
    build_chain(cfg, opt.checked);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalid;
  }

  std::vector<double> rates;
  for (int i = 0; i < opt.repeat; ++i) {
    try {
      const RunReport report = runner(cfg, opt.checked);
      out << to_json(report) << std::endl;
      rates.push_back(report.steps_per_second);
    } catch (const std::exception& e) {
      err << "runtime failure: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  if (opt.repeat > 1) out << repeat_summary(rates) << std::endl;
  return kExitOk;
}

}  // namespace microwrap::cli
