#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "microwrap/cli.hpp"

namespace fs = std::filesystem;
using namespace microwrap;

namespace {

struct Outcome {
  int code = -1;
  std::vector<std::string> lines;  // stdout
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(MICROWRAP_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  Outcome out;
  if (!pipe) return out;
  char buf[4096];
  std::string text;
  while (std::fgets(buf, sizeof buf, pipe)) text += buf;
  const int status = pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.lines.push_back(line);
  return out;
}

class TempConfig {
 public:
  explicit TempConfig(const std::string& body) {
    path_ = fs::temp_directory_path() /
            ("microwrap_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++) + ".json");
    std::ofstream(path_) << body;
  }
  ~TempConfig() { fs::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

const char* kSmall = R"({"env":{"name":"counter","T":10},"steps":10,"policy":"zeros"})";

}  // namespace

TEST(Cli, SuccessPrintsOneJsonLine) {
  TempConfig cfg(kSmall);
  const Outcome o = run_cli("bench --config " + cfg.path());
  EXPECT_EQ(o.code, 0);
  ASSERT_EQ(o.lines.size(), 1u);
  const auto j = nlohmann::json::parse(o.lines[0]);
  EXPECT_EQ(j["total_steps"], 10);
  EXPECT_EQ(j["reward_sum"], 10.0);
  EXPECT_GT(j["steps_per_second"].get<double>(), 0.0);
  const std::string sum = j["obs_checksum"];
  EXPECT_EQ(sum.size(), 18u);
  EXPECT_EQ(sum.substr(0, 2), "0x");
}

TEST(Cli, RepeatAddsSummary) {
  TempConfig cfg(kSmall);
  const Outcome o = run_cli("bench --config " + cfg.path() + " --repeat 3 --checked");
  EXPECT_EQ(o.code, 0);
  ASSERT_EQ(o.lines.size(), 4u);
  const auto first = nlohmann::json::parse(o.lines[0]);
  for (int i = 1; i < 3; ++i) EXPECT_EQ(nlohmann::json::parse(o.lines[i])["obs_checksum"], first["obs_checksum"]);
  const auto summary = nlohmann::json::parse(o.lines[3]);
  EXPECT_EQ(summary["repeat"], 3);
  EXPECT_LE(summary["min_steps_per_second"].get<double>(), summary["median_steps_per_second"].get<double>());
}

TEST(Cli, ValidationErrorsExitOne) {
  TempConfig unknown(R"({"env":{"name":"counter"},"wrappers":[{"name":"fame_stack","N":3}],"steps":10})");
  TempConfig zero_steps(R"({"env":{"name":"counter"},"steps":0})");
  TempConfig malformed(R"({"env":{"name":"counter"},"steps":)");
  TempConfig precondition(R"({"env":{"name":"counter"},"wrappers":[{"name":"color_reduction"}],"steps":10})");
  for (const TempConfig* c : {&unknown, &zero_steps, &malformed, &precondition}) {
    const Outcome o = run_cli("bench --config " + c->path());
    EXPECT_EQ(o.code, 1) << c->path();
    EXPECT_TRUE(o.lines.empty());
  }
  EXPECT_EQ(run_cli("bench --config /nonexistent/microwrap.json").code, 1);
}

TEST(Cli, BadArgumentsExitOne) {
  EXPECT_EQ(run_cli("").code, 1);
  EXPECT_EQ(run_cli("bench").code, 1);
  TempConfig cfg(kSmall);
  EXPECT_EQ(run_cli("bench --config " + cfg.path() + " --repeat 0").code, 1);
  EXPECT_EQ(run_cli("bench --config " + cfg.path() + " --bogus").code, 1);
}

TEST(Cli, PinnedConfigsRun) {
  for (const auto& entry : fs::directory_iterator(MICROWRAP_CONFIG_DIR)) {
    const Outcome o = run_cli("bench --checked --config " + entry.path().string());
    EXPECT_EQ(o.code, 0) << entry.path();
  }
}

TEST(CliInProcess, RunnerFailureExitsTwo) {
  TempConfig cfg(kSmall);
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::bench({cfg.path(), false, 2}, out, err, [](const ChainConfig&, bool) -> RunReport {
    throw ContainmentViolation("layer 1: observation outside Box");
  });
  EXPECT_EQ(code, cli::kExitRuntime);
  EXPECT_TRUE(out.str().empty());
  EXPECT_NE(err.str().find("observation outside"), std::string::npos);
}

TEST(CliInProcess, FailureOnLaterRepeatStillExitsTwo) {
  TempConfig cfg(kSmall);
  std::ostringstream out;
  std::ostringstream err;
  int calls = 0;
  const int code = cli::bench({cfg.path(), false, 3}, out, err, [&](const ChainConfig& c, bool checked) {
    if (++calls == 2) throw std::runtime_error("boom");
    return run_benchmark(c, checked);
  });
  EXPECT_EQ(code, cli::kExitRuntime);
  const std::string printed = out.str();
  EXPECT_EQ(std::count(printed.begin(), printed.end(), '\n'), 1);
}

TEST(CliInProcess, RepeatSummaryMedian) {
  const auto j = nlohmann::json::parse(cli::repeat_summary({4.0, 1.0, 3.0, 2.0}));
  EXPECT_EQ(j["repeat"], 4);
  EXPECT_EQ(j["min_steps_per_second"], 1.0);
  EXPECT_EQ(j["median_steps_per_second"], 2.5);
}
