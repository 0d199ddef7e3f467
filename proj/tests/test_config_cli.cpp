#include <gtest/gtest.h>

#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "mmtc/sweep.hpp"
#include "mmtc_presets.hpp"

using namespace mmtc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[scenario]
name = tiny
horizon_ttis = 200
seeds = 2
batches = 10

[traffic]
lambda = 0,5

[scheme:sa]
type = sa
plan = sa-50
)";

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    ScenarioConfig c = load_config_text(text, "t.ini", overrides);
    auto errs = validate_config(c);
    return errs.empty() ? "" : errs.front();
  } catch (const ConfigError& e) {
    return e.what();
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) { return std::system((std::string(MMTCSIM_EXE) + " " + args + " >/dev/null 2>&1").c_str()); }

fs::path temp_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("mmtc_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Config, MinimalParses) {
  ScenarioConfig c = load_config_text(kMinimal, "t.ini");
  EXPECT_EQ(c.name, "tiny");
  EXPECT_EQ(c.lambdas, (std::vector<double>{0, 5}));
  ASSERT_EQ(c.schemes.size(), 1u);
  EXPECT_EQ(c.schemes[0].type, "sa");
  EXPECT_TRUE(validate_config(c).empty());
}

TEST(Config, RangeSyntaxExpands) {
  ScenarioConfig c = load_config_text(kMinimal, "t.ini", {"traffic.lambda=10:10:50"});
  EXPECT_EQ(c.lambdas, (std::vector<double>{10, 20, 30, 40, 50}));
}

TEST(Config, ParseErrorCarriesLineNumber) {
  std::string e = error_of("[scenario]\nname = x\nthis line has no equals\n");
  EXPECT_NE(e.find("t.ini:3"), std::string::npos) << e;
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_NE(error_of(std::string(kMinimal) + "horizn = 5\n").find("unknown key 'horizn'"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"scenario.sedes=3"}).find("unknown key 'sedes'"), std::string::npos);
  EXPECT_NE(error_of(std::string(kMinimal) + "[extra]\na = 1\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"nosuch.key=1"}).find("no section"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"garbage"}).find("expected section.key=value"), std::string::npos);
}

TEST(Config, BadValuesRejected) {
  EXPECT_NE(error_of(kMinimal, {"scenario.seeds=two"}).find("cannot parse"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"traffic.lambda=-1"}).find(">= 0"), std::string::npos);
  EXPECT_NE(error_of(kMinimal, {"scenario.seeds=0"}).find("seeds"), std::string::npos);
  EXPECT_FALSE(error_of(kMinimal, {"sa.type=warp"}).empty());
}

TEST(Config, ErrorsAreAggregated) {
  std::string e = error_of(kMinimal, {"scenario.seeds=0", "scenario.horizon_ttis=0"});
  EXPECT_NE(e.find("seeds"), std::string::npos);
  EXPECT_NE(e.find("horizon_ttis"), std::string::npos);
}

TEST(Config, PartitionViolationReported) {
  std::string e = error_of(kMinimal, {"scheme:sa.control_prbs=10"});
  EXPECT_FALSE(e.empty());
  EXPECT_NE(e.find("50"), std::string::npos) << e;
}

TEST(Config, FrameReplicasAboveSlotsRejected) {
  const std::string text = std::string(kMinimal) + "\n[scheme:c]\ntype = craplnc\nslots_per_frame = 2\nreplicas = 3\n";
  EXPECT_FALSE(error_of(text).empty());
  EXPECT_TRUE(error_of(std::string(kMinimal) + "\n[scheme:c]\ntype = craplnc\n").empty());
}

TEST(Config, EveryPresetValidates) {
  for (const auto& [name, text] : mmtc_presets::kPresets) {
    ScenarioConfig c = load_config_text(text, std::string(name) + ".ini");
    EXPECT_EQ(c.name, name);
    EXPECT_TRUE(validate_config(c).empty()) << name;
  }
}

TEST(Config, CanonicalTextReparsesToSameHash) {
  ScenarioConfig a = load_config_text(kMinimal, "t.ini", {"traffic.lambda=3"});
  ScenarioConfig b = load_config_text(a.canonical, "canon.ini");
  EXPECT_EQ(fnv1a(a.canonical), fnv1a(b.canonical));
  EXPECT_EQ(b.lambdas, std::vector<double>{3});
}

TEST(Sweep, ZeroLambdaRowsAreAllZero) {
  ScenarioConfig c = load_config_text(kMinimal, "t.ini", {"traffic.lambda=0"});
  auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].throughput_mean, 0.0);
  EXPECT_EQ(rows[0].successes, 0);
  EXPECT_TRUE(rows[0].latency.empty());
}

TEST(Sweep, JobsDoNotChangeOutput) {
  ScenarioConfig c = load_config_text(kMinimal, "t.ini", {"traffic.lambda=5,20,40", "scenario.seeds=3"});
  std::ostringstream a, b;
  write_kpi_csv(a, run_sweep(c, 1));
  write_kpi_csv(b, run_sweep(c, 3));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Cli, RunWritesCsvManifestAndIsDeterministic) {
  fs::path d = temp_dir("run");
  fs::path cfg = d / "tiny.ini";
  std::ofstream(cfg) << kMinimal;
  ASSERT_EQ(run_cli("run " + cfg.string() + " --out " + (d / "a").string() + " -j 1"), 0);
  ASSERT_EQ(run_cli("run " + cfg.string() + " --out " + (d / "b").string() + " -j 2"), 0);
  const std::string a = slurp(d / "a" / "tiny.csv"), b = slurp(d / "b" / "tiny.csv");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), kpi_csv_header());
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 3);
  const std::string m = slurp(d / "a" / "tiny.manifest");
  EXPECT_NE(m.find("config_hash=fnv1a64:"), std::string::npos);
  EXPECT_NE(m.find("\nseeds="), std::string::npos);

  // The effective config alone reproduces the CSV.
  ASSERT_EQ(run_cli("run " + (d / "a" / "tiny.effective.ini").string() + " --out " + (d / "c").string()), 0);
  EXPECT_EQ(slurp(d / "c" / "tiny.csv"), a);
  fs::remove_all(d);
}

TEST(Cli, LambdaZeroGivesZeroThroughputRows) {
  fs::path d = temp_dir("zero");
  ASSERT_EQ(run_cli("run fig3-ostsap --lambda 0 -o scenario.seeds=1 -o scenario.horizon_ttis=100 --out " + d.string()), 0);
  std::ifstream is(d / "fig3-ostsap.csv");
  std::string line;
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string scheme, lambda, seeds, thr;
    std::getline(ss, scheme, ',');
    std::getline(ss, lambda, ',');
    std::getline(ss, seeds, ',');
    std::getline(ss, thr, ',');
    EXPECT_EQ(std::stod(lambda), 0.0);
    EXPECT_EQ(std::stod(thr), 0.0) << line;
  }
  EXPECT_EQ(rows, 6);
  fs::remove_all(d);
}

TEST(Cli, ValidateExitCodes) {
  fs::path d = temp_dir("validate");
  EXPECT_EQ(run_cli("validate fig6-sbaia"), 0);
  EXPECT_NE(run_cli("validate fig6-sbaia -o scenario.bogus=1"), 0);
  EXPECT_NE(run_cli("validate no-such-preset"), 0);
  fs::path bad = d / "bad.ini";
  std::ofstream(bad) << kMinimal << "control_prbs = 10\n";
  EXPECT_NE(run_cli("validate " + bad.string()), 0);
  EXPECT_EQ(run_cli("list-presets"), 0);
  fs::remove_all(d);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  fs::path d = temp_dir("env");
  fs::path cfg = d / "tiny.ini";
  std::ofstream(cfg) << kMinimal;
  const std::string cmd = "MMTCSIM_OUT_DIR=" + (d / "envout").string() + " " + MMTCSIM_EXE + " run " + cfg.string() +
                          " >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(d / "envout" / "tiny.csv"));
  fs::remove_all(d);
}
