#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "henon_dim/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HENON_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("henon_dim_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

const std::string h1_map = std::string(HENON_DATA_DIR) + "/h1.json";

}  // namespace

TEST(Cli, SelftestPasses) { EXPECT_EQ(run_cli("selftest"), 0); }

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("classify --bogus-flag"), 2);
  EXPECT_EQ(run_cli("classify"), 2);
  EXPECT_EQ(run_cli("classify --map /nonexistent.json"), 2);
  EXPECT_EQ(run_cli("periodic-orbits --map " + h1_map + " --periods 3..1"), 2);
  EXPECT_EQ(run_cli("pressure-curve --map " + h1_map + " --tgrid 0:2"), 2);
}

TEST(Cli, StageFailureExitsOne) {
  const auto dir = scratch("fail");
  // a separation wider than J leaves a single point
  EXPECT_EQ(run_cli("dimension-report --map " + h1_map + " --periods 1..2 --eps 100 --out " + dir.string()), 1);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, ReportHasCantorFlagAndIsDeterministic) {
  const auto a = scratch("report_a"), b = scratch("report_b");
  ASSERT_EQ(run_cli("dimension-report --map " + h1_map + " --threads 1 --out " + a.string()), 0);
  ASSERT_EQ(run_cli("dimension-report --map " + h1_map + " --threads 3 --out " + b.string()), 0);
  const auto text = slurp(a / "dimension-report.json");
  const auto doc = henon::json::parse(text);
  EXPECT_TRUE(doc["cantor_flag"].get<bool>());
  EXPECT_EQ(doc["header"]["seed"].get<int>(), 1);
  EXPECT_EQ(doc["header"]["tool_version"].get<std::string>(), henon::kToolVersion);
  for (const auto& f : fs::directory_iterator(a)) EXPECT_EQ(slurp(f.path()), slurp(b / f.path().filename())) << f.path();
}

TEST(Cli, CsvCarriesHeader) {
  const auto dir = scratch("csv");
  ASSERT_EQ(run_cli("pressure-curve --map " + h1_map + " --periods 1..3 --out " + dir.string()), 0);
  const auto text = slurp(dir / "pressure-curve.csv");
  for (const char* key : {"# map_hash: ", "# config_hash: ", "# tool_version: ", "# seed: "})
    EXPECT_NE(text.find(key), std::string::npos) << key;
  EXPECT_FALSE(fs::exists(dir / "pressure-curve.csv.tmp"));
}

TEST(Cli, EnvironmentOverridesOutputDir) {
  const auto env_dir = scratch("env"), flag_dir = scratch("flag");
  const std::string cmd = "HENON_DIM_OUT_DIR=" + env_dir.string() + " " + HENON_CLI_PATH + " box-dim --map " + h1_map +
                          " --depth 5 --out " + flag_dir.string() + " > /dev/null 2>&1";
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_TRUE(fs::exists(env_dir / "box-dim.json"));
  EXPECT_FALSE(fs::exists(flag_dir));
}

TEST(Io, MapJsonRoundTrip) {
  const auto g = henon::load_map(h1_map);
  const auto again = henon::map_from_json(henon::map_to_json(g));
  EXPECT_EQ(henon::map_hash(g), henon::map_hash(again));
  EXPECT_EQ(g.degree(), 2);
  EXPECT_THROW(henon::map_from_json(henon::json::parse(R"({"factors":[{"coeffs":[[1,0]],"a":[1,0]}]})")),
               henon::MapFileError);
  EXPECT_THROW(henon::map_from_json(henon::json::parse(R"({"factors":[{"coeffs":[[0,0],[0,0],[1,0]],"a":[0,0]}]})")),
               henon::MapFileError);
}

TEST(Io, FnvKnownValues) {
  EXPECT_EQ(henon::fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(henon::fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Io, ShortestRoundTripFormat) {
  for (double x : {0.1, 1.0 / 3.0, -6.0, 1e-300, 0.3})
    EXPECT_EQ(std::strtod(henon::fmt(x).c_str(), nullptr), x);
  EXPECT_EQ(henon::fmt(0.1), "0.1");
}

TEST(Cli, ParseIntList) {
  EXPECT_EQ(henon::cli::parse_int_list("1..4", "x"), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(henon::cli::parse_int_list("4,6,8", "x"), (std::vector<int>{4, 6, 8}));
  EXPECT_THROW(henon::cli::parse_int_list("8,4", "x"), henon::cli::UsageError);
  EXPECT_THROW(henon::cli::parse_int_list("a", "x"), henon::cli::UsageError);
}
