#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "scenario_config.hpp"

namespace fs = std::filesystem;
using namespace covrage;
using namespace covrage::cli;

namespace {

const std::string kSource = COVRAGE_SOURCE_DIR;
const std::string kCli = COVRAGE_CLI_PATH;

std::string config(const std::string& name) { return kSource + "/configs/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("covrage_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

CliRun run(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = env + " \"" + kCli + "\" " + args + " > \"" + out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

LoadedConfig parse(const std::string& yaml) { return parse_config(yaml, "inline.yaml"); }

}  // namespace

TEST(Config, SampleConfigsLoad) {
  for (const char* name : {"static.yaml", "trajectory_a.yaml", "trajectory_b.yaml", "explicit_rotation.yaml"}) {
    const LoadedConfig c = load_config(config(name));
    EXPECT_NO_THROW(c.scenario.validate()) << name;
  }
  const LoadedConfig a = load_config(config("trajectory_a.yaml"));
  EXPECT_EQ(a.rotation_source, "reference:A");
  EXPECT_EQ(a.scenario.seed, 7u);
  EXPECT_EQ(a.table.entries().size(), 13u);
  EXPECT_NE(a.table_source.find("mcs_80211ad.tsv"), std::string::npos);
}

TEST(Config, AnglesAreDegrees) {
  const LoadedConfig c = parse(
      "rotation:\n"
      "  q1: {euler_deg: [10, -5, 0]}\n"
      "  q2: {quaternion: [1, 0, 0, 0]}\n"
      "  ap_euler_deg: [20, 10]\n");
  EXPECT_TRUE(same_rotation(c.scenario.q1, euler_to_quat({deg_to_rad(10.0), deg_to_rad(-5.0), 0.0})));
  EXPECT_NEAR(c.scenario.ap_dir.u, std::cos(deg_to_rad(10.0)) * std::sin(deg_to_rad(20.0)), 1e-15);
  EXPECT_NEAR(c.scenario.ap_dir.v, std::sin(deg_to_rad(10.0)), 1e-15);
}

TEST(Config, DiagnosticsNameTheFieldAndLine) {
  try {
    load_config(config("malformed.yaml"));
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("array.spacing"), std::string::npos) << msg;
    EXPECT_NE(msg.find("malformed.yaml:4"), std::string::npos) << msg;
  }
  auto message = [](const std::string& yaml) {
    try {
      parse(yaml);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("rotation: {reference: A}\nstrategy: fastest\n").find("'strategy'"), std::string::npos);
  EXPECT_NE(message("rotation: {reference: A}\narray: {nx: many}\n").find("array.nx"), std::string::npos);
  EXPECT_NE(message("rotation:\n  q1: {quaternion: [1, 1, 0, 0]}\n  q2: {euler_deg: [0, 0, 0]}\n  ap_uv: [0, 0]\n")
                .find("not unit length"),
            std::string::npos);
  EXPECT_NE(message("array: {nx: 32}\n").find("'rotation' is required"), std::string::npos);
  EXPECT_NE(message("rotation: {reference: A, random: {seed: 1, length: 0.2}}\n").find("exactly one"), std::string::npos);
  EXPECT_NE(message("rotation: {reference: A}\nstrategy: baseline-mid\nablation: no-sync\n").find("ablations"),
            std::string::npos);
  EXPECT_NE(message("rotation: {reference: A}\nlink: {eirp_dbm: 40}\n").find("limit"), std::string::npos);
  EXPECT_NE(message("rotation: [\n").find("inline.yaml:"), std::string::npos);
}

TEST(Config, InvalidApDirectionIsADomainError) {
  EXPECT_THROW(parse("rotation:\n  q1: {euler_deg: [0, 0, 0]}\n  q2: {euler_deg: [0, 0, 0]}\n  ap_uv: [0.9, 0.9]\n"),
               DomainError);
}

TEST(Config, RandomRotationIsReproducible) {
  const LoadedConfig a = parse("rotation: {random: {seed: 5, length: 0.2}}\n");
  const LoadedConfig b = parse("rotation: {random: {seed: 5, length: 0.2}}\n");
  EXPECT_EQ(a.scenario.q2.x, b.scenario.q2.x);
  EXPECT_EQ(a.rotation_source, "random:5:0.2");
}

TEST(Cli, PlanStaticHeadIsOneReinforcedBeam) {
  const fs::path dir = scratch("plan_static");
  const CliRun r = run("plan --config \"" + config("static.yaml") + "\" --out-dir \"" + (dir / "out").string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("beams: 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("sub-arrays 0 3 1 2"), std::string::npos) << r.out;
  const auto awv = lines(slurp(dir / "out" / "awv.csv"));
  EXPECT_EQ(awv.front(), "# schema: covrage-awv/1");
  EXPECT_EQ(awv[1], "x,y,phase_rad");
  EXPECT_EQ(awv.size(), 2u + 1024u);
  const std::string plan = slurp(dir / "out" / "plan.json");
  EXPECT_EQ(plan.rfind("{\n  \"schema\": \"covrage-plan/1\"", 0), 0u);
}

TEST(Cli, PlanReferenceTrajectoryHasFourBeams) {
  const fs::path dir = scratch("plan_a");
  const CliRun r = run("plan --config \"" + config("trajectory_a.yaml") + "\" --out-dir \"" + (dir / "out").string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("beams: 4"), std::string::npos) << r.out;
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "plan.json"));
  EXPECT_EQ(j["beam_count"], 4);
  EXPECT_EQ(j["overlap_points"].size(), 3u);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  const std::string out = " --out-dir \"" + (dir / "out").string() + "\"";
  CliRun r = run("plan --config \"" + config("malformed.yaml") + "\"" + out, dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("array.spacing"), std::string::npos) << r.err;

  r = run("sweep --config \"" + config("trajectory_a.yaml") + "\" --strategy nope" + out, dir);
  EXPECT_EQ(r.code, 2);
  r = run("sweep --config \"" + config("trajectory_a.yaml") + "\" --strategy baseline-mid --ablation no-sync" + out, dir);
  EXPECT_EQ(r.code, 2);
  r = run("gainmap --config \"" + config("static.yaml") + "\" --resolution 8" + out, dir);
  EXPECT_EQ(r.code, 2);
  r = run("frobnicate", dir);
  EXPECT_EQ(r.code, 2);

  // A 100 degree head turn carries the AP behind the array.
  const fs::path behind = dir / "behind.yaml";
  std::ofstream(behind) << "rotation:\n  q1: {euler_deg: [0, 0, 0]}\n  q2: {euler_deg: [-100, 0, 0]}\n"
                           "  ap_euler_deg: [30, 0]\n";
  r = run("sweep --config \"" + behind.string() + "\"" + out, dir);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("(sample "), std::string::npos) << r.err;

  const fs::path bad_uv = dir / "bad_uv.yaml";
  std::ofstream(bad_uv) << "rotation:\n  q1: {euler_deg: [0, 0, 0]}\n  q2: {euler_deg: [0, 0, 0]}\n  ap_uv: [0.9, 0.9]\n";
  r = run("plan --config \"" + bad_uv.string() + "\"" + out, dir);
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, SweepOutputsAndMetrics) {
  const fs::path dir = scratch("sweep");
  const CliRun r = run("sweep --config \"" + config("trajectory_a.yaml") + "\" --out-dir \"" + (dir / "cov").string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = lines(slurp(dir / "cov" / "sweep.csv"));
  EXPECT_EQ(csv[0], "# schema: covrage-sweep/1");
  EXPECT_EQ(csv[1], "index,u,v,azimuth_deg,elevation_deg,gain_dbi,noise_penalty_db,rx_power_dbm,mcs,datarate_mbps");
  const auto summary = nlohmann::ordered_json::parse(slurp(dir / "cov" / "summary.json"));
  EXPECT_EQ(summary.begin().key(), "schema");
  EXPECT_EQ(csv.size(), 2u + summary["samples"].get<std::size_t>());
  for (std::size_t i = 2; i < csv.size(); ++i) EXPECT_EQ(split(csv[i]).size(), 10u);
  EXPECT_LE(summary["summary"]["range_db"].get<double>(), 6.0);
  EXPECT_NE(summary["absolute_levels"].get<std::string>().find("model-relative"), std::string::npos);

  const CliRun b = run("sweep --config \"" + config("trajectory_b.yaml") + "\" --strategy baseline-start --out-dir \"" +
                        (dir / "base").string() + "\"",
                    dir);
  ASSERT_EQ(b.code, 0) << b.err;
  const auto base = nlohmann::json::parse(slurp(dir / "base" / "summary.json"));
  EXPECT_GE(base["summary"]["range_db"].get<double>(), 15.0);
  EXPECT_EQ(base["strategy"], "baseline-start");
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const fs::path dir = scratch("env");
  const CliRun r = run("sweep --config \"" + config("static.yaml") + "\"", dir,
                    "COVRAGE_OUT_DIR=\"" + (dir / "from_env").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "from_env" / "sweep.csv"));
  const auto manifest = nlohmann::ordered_json::parse(slurp(dir / "from_env" / "manifest.json"));
  EXPECT_EQ(manifest.begin().key(), "schema");
  EXPECT_EQ(manifest["command"], "sweep");
  EXPECT_EQ(manifest["scenario"]["rotation"]["source"], "explicit");
}

TEST(Cli, GainMapShapeAndSentinel) {
  const fs::path dir = scratch("gainmap");
  const CliRun r = run("gainmap --config \"" + config("static.yaml") + "\" --resolution 32 --out-dir \"" +
                        (dir / "out").string() + "\"",
                    dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = lines(slurp(dir / "out" / "gainmap.csv"));
  ASSERT_EQ(csv.size(), 3u + 32u * 32u);
  EXPECT_EQ(csv[0], "# schema: covrage-gainmap/1");
  EXPECT_NE(csv[1].find("clamp_dbi=30.0"), std::string::npos);
  EXPECT_EQ(csv[2], "row,col,u,v,gain_dbi");
  EXPECT_EQ(split(csv[3]).back(), "out");  // corner cell
  // Peak cell within one cell of the (single) beam centre.
  const LoadedConfig cfg = load_config(config("static.yaml"));
  double best = -1e9;
  double bu = 0, bv = 0;
  for (std::size_t i = 3; i < csv.size(); ++i) {
    const auto f = split(csv[i]);
    if (f[4] == "out") continue;
    if (std::stod(f[4]) > best) {
      best = std::stod(f[4]);
      bu = std::stod(f[2]);
      bv = std::stod(f[3]);
    }
  }
  EXPECT_LE(std::abs(bu - cfg.scenario.ap_dir.u), 2.0 / 32);
  EXPECT_LE(std::abs(bv - cfg.scenario.ap_dir.v), 2.0 / 32);
}

TEST(Cli, CompareTable) {
  const fs::path dir = scratch("compare");
  const CliRun r = run("compare --config \"" + config("trajectory_b.yaml") + "\" --out-dir \"" + (dir / "out").string() + "\"", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = lines(slurp(dir / "out" / "compare.csv"));
  ASSERT_EQ(csv.size(), 2u + 6u);
  EXPECT_EQ(csv[0], "# schema: covrage-compare/1");
  const auto covrage_row = split(csv[2]);
  EXPECT_EQ(covrage_row[0], "covrage");
  EXPECT_EQ(covrage_row[1], "none");
  for (std::size_t i = 3; i < csv.size(); ++i) EXPECT_GT(std::stod(covrage_row[2]), std::stod(split(csv[i])[2])) << csv[i];
  // Headroom 6 dB exceeds the worst noise penalty on this trajectory.
  EXPECT_EQ(covrage_row[7], "4620.00");
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const fs::path dir = scratch("determinism");
  const fs::path out = dir / "out";
  for (const std::string cmd : {"sweep", "compare"}) {
    const std::string args = cmd + " --config \"" + config("trajectory_a.yaml") + "\" --ablation " +
                             (cmd == "sweep" ? "no-sync" : "none") + " --seed 11 --out-dir \"" + out.string() + "\"";
    const std::string args_fixed = cmd == "compare" ? cmd + " --config \"" + config("trajectory_a.yaml") +
                                                          "\" --seed 11 --out-dir \"" + out.string() + "\""
                                                    : args;
    ASSERT_EQ(run(args_fixed, dir).code, 0);
    std::vector<std::pair<std::string, std::string>> first;
    for (const auto& e : fs::directory_iterator(out)) first.emplace_back(e.path().filename().string(), slurp(e.path()));
    ASSERT_EQ(run(args_fixed, dir).code, 0);
    for (const auto& [name, bytes] : first) EXPECT_EQ(slurp(out / name), bytes) << cmd << ": " << name;
    fs::remove_all(out);
  }
}
