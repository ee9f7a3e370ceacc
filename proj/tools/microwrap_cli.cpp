// Command-line front end: `microwrap bench --config <path> [--checked] [--repeat N]`.
//
// Exit codes: 0 success, 1 invalid config or chain, 2 failure while running.

#include <iostream>

#include "CLI11.hpp"
#include "microwrap/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Composable RL environment wrappers: benchmark runner"};
  app.require_subcommand(1);

  microwrap::cli::BenchOptions opt;
  auto* bench = app.add_subcommand("bench", "Run a wrapper chain over a reference env and report throughput");
  bench->add_option("--config", opt.config_path, "JSON chain config")->required();
  bench->add_flag("--checked", opt.checked, "Assert space containment at every layer on every step");
  bench->add_option("--repeat", opt.repeat, "Number of runs; prints min/median steps per second when > 1")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : microwrap::cli::kExitInvalid;
  }
  return microwrap::cli::bench(opt, std::cout, std::cerr);
}
