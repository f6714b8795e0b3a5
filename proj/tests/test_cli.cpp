#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "faris/config.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(FARIS_CLI_PATH) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return out;
  char buf[4096];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) out.output += buf;
  const int status = pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("faris_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = dir_ / "small.yaml";
    std::ofstream(config_) << R"(geometry: {m_x: 4}
m_o: 4
saa_samples: 8
outer: {max_iters: 10}
bfs: {phase_bits: 1, gain_levels: 3, trials: 2}
scenarios:
  - {name: power, mode: faris, sweep_var: tx_power_dbm, sweep_values: [5, 10, 15], trials: 2}
  - {name: single, mode: aris_mode}
)";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string base() const { return "--config " + config_.string(); }
  std::string out(const std::string& sub) const { return " --out-dir " + (dir_ / sub).string(); }

  fs::path dir_;
  fs::path config_;
};

}  // namespace

TEST_F(CliTest, RunWritesResult) {
  const auto r = cli("run " + base() + " --set m_o=9" + out("run"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = nlohmann::json::parse(slurp(dir_ / "run" / "result.json"));
  EXPECT_EQ(j["selection"].size(), 9u);
  EXPECT_EQ(j["v"].size(), 9u);
  EXPECT_LE(j["v"][0]["magnitude"].get<double>(), 100.0 + 1e-9);
  const auto trace = lines(slurp(dir_ / "run" / "trace.csv"));
  EXPECT_EQ(trace[0], "iteration,rate_bps_hz,selection");
  EXPECT_EQ(trace.size(), j["outer_trace"].size() + 1);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "inner_trace.csv"));
}

TEST_F(CliTest, RunIsDeterministic) {
  ASSERT_EQ(cli("run " + base() + " --seed 7" + out("a")).code, 0);
  ASSERT_EQ(cli("run " + base() + " --seed 7" + out("b")).code, 0);
  ASSERT_EQ(cli("run " + base() + " --seed 8" + out("c")).code, 0);
  for (const char* f : {"result.json", "trace.csv", "inner_trace.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_NE(slurp(dir_ / "a" / "result.json"), slurp(dir_ / "c" / "result.json"));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli("run --config " + (dir_ / "missing.yaml").string() + out("x")).code, 2);
  const auto bad_key = cli("run " + base() + " --set inner.colour=1" + out("x"));
  EXPECT_EQ(bad_key.code, 2);
  EXPECT_NE(bad_key.output.find("inner.colour"), std::string::npos);
  std::ofstream(dir_ / "bad.yaml") << "geometry:\n  m_x: 4\n  tilt: 3\n";
  const auto bad_file = cli("run --config " + (dir_ / "bad.yaml").string() + out("x"));
  EXPECT_EQ(bad_file.code, 2);
  EXPECT_NE(bad_file.output.find("line 3"), std::string::npos) << bad_file.output;
  EXPECT_EQ(cli("run --frobnicate").code, 2);
}

TEST_F(CliTest, SweepRowsAndHeader) {
  const auto r = cli("sweep " + base() + " --scenario power" + out("sw"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto csv = lines(slurp(dir_ / "sw" / "power.csv"));
  ASSERT_EQ(csv.size(), 7u);
  EXPECT_EQ(csv[0], "scenario,mode,sweep_var,sweep_value,trial,seed,rate_bps_hz,outer_iters,wall_time_s");
  const auto j = nlohmann::json::parse(slurp(dir_ / "sw" / "power_summary.json"));
  EXPECT_EQ(j["points"].size(), 3u);
}

TEST_F(CliTest, SweepDeterministicExceptWallTime) {
  ASSERT_EQ(cli("sweep " + base() + " --scenario power --threads 2" + out("a")).code, 0);
  ASSERT_EQ(cli("sweep " + base() + " --scenario power" + out("b")).code, 0);
  const auto a = lines(slurp(dir_ / "a" / "power.csv"));
  const auto b = lines(slurp(dir_ / "b" / "power.csv"));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].substr(0, a[i].rfind(',')), b[i].substr(0, b[i].rfind(',')));
  EXPECT_EQ(slurp(dir_ / "a" / "power_summary.json"), slurp(dir_ / "b" / "power_summary.json"));
}

TEST_F(CliTest, UnknownScenarioListsNames) {
  const auto r = cli("sweep " + base() + " --scenario nope" + out("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("power, single"), std::string::npos) << r.output;
}

TEST_F(CliTest, BfsCompareSmall) {
  const std::string args = "bfs-compare " + base() + " --set geometry.m_x=2 --set m_o=2";
  const auto start = std::chrono::steady_clock::now();
  const auto r = cli(args + out("a"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 20.0);
  ASSERT_EQ(cli(args + out("b")).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "gap_cdf.csv"), slurp(dir_ / "b" / "gap_cdf.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "bfs_compare.csv"), slurp(dir_ / "b" / "bfs_compare.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "bfs_compare_summary.json"), slurp(dir_ / "b" / "bfs_compare_summary.json"));
  EXPECT_EQ(lines(slurp(dir_ / "a" / "bfs_compare.csv")).size(), 3u);
  const auto j = nlohmann::json::parse(slurp(dir_ / "a" / "bfs_compare_summary.json"));
  EXPECT_EQ(j["gap_sign"], "ao_minus_bfs");
}

TEST_F(CliTest, BfsOverflowExitTwo) {
  const auto r = cli("bfs-compare " + base() + " --max-configs 100" + out("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("configurations"), std::string::npos) << r.output;
}

TEST_F(CliTest, DefaultsParse) {
  const auto r = cli("defaults");
  ASSERT_EQ(r.code, 0);
  EXPECT_NO_THROW(faris::parse_config(r.output));
}

TEST_F(CliTest, Selfcheck) {
  const auto r = cli("selfcheck");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
}
