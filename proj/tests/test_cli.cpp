#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fbcom/cli.hpp"
#include "fbcom/errors.hpp"
#include "fbcom/io.hpp"

using namespace fbcom;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fbcom_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, HelpAndUsage) {
  const CliRun help = cli_run({"--help"});
  EXPECT_EQ(help.code, cli::kSuccess);
  EXPECT_NE(help.out.find("figure"), std::string::npos);
  EXPECT_NE(help.out.find(cli::kOutRootEnv), std::string::npos);
  EXPECT_EQ(cli_run({}).code, cli::kSpecError);
  EXPECT_EQ(cli_run({"simulate", "--bogus"}).code, cli::kSpecError);
}

TEST(Cli, BadPathFailsBeforeAnyOutput) {
  const fs::path dir = scratch("badpath");
  const CliRun r = cli_run({"sweep", "--axis1", "kappa_z=0:1:3", "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kSpecError);
  EXPECT_FALSE(fs::exists(dir));
  const CliRun s = cli_run({"sweep", "--axis1", "r_b=0:1.5:3", "--out", dir.string()});
  EXPECT_EQ(s.code, cli::kSpecError);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Cli, ValidateFlagsGainRegime) {
  const CliRun r = cli_run({"validate", "--set", "r_b=0.6"});
  EXPECT_EQ(r.code, cli::kSuccess);
  EXPECT_NE(r.out.find("gain regime"), std::string::npos);
  EXPECT_NE(r.err.find("override r_b = 0.6"), std::string::npos);
  const CliRun t = cli_run({"validate", "--set", "temperature_k=0"});
  EXPECT_NE(t.out.find("N_b 0 "), std::string::npos);
  const CliRun d = cli_run({"validate"});
  EXPECT_NE(d.out.find("N_b 416.2"), std::string::npos);
  EXPECT_NE(d.out.find("valid"), std::string::npos);
}

TEST(Cli, SimulateExitCodesFollowVerdicts) {
  const fs::path dir = scratch("simulate");
  const CliRun ok = cli_run({"simulate", "--set", "G_c_over_omega_b=0.02", "--set",
                          "G_m_over_omega_b=0.03", "--set", "r_b=0.1", "--out", dir.string()});
  EXPECT_EQ(ok.code, cli::kSuccess) << ok.err;
  EXPECT_TRUE(fs::exists(dir / "cycle.csv"));
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
  std::ifstream traj(dir / "trajectory.csv");
  EXPECT_NO_THROW(check_schema_header(traj));
  const auto manifest = Json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["schema_version"], kSchemaVersion);
  EXPECT_EQ(manifest["result"]["verdict"], "ok");

  const CliRun bad = cli_run({"simulate", "--set", "r_b=0.7", "--out", dir.string()});
  EXPECT_EQ(bad.code, cli::kUnstable);
  EXPECT_EQ(Json::parse(slurp(dir / "manifest.json"))["result"]["verdict"], "unstable");
  fs::remove_all(dir);
}

TEST(Cli, SweepArtifactsAndResume) {
  const fs::path dir = scratch("sweep");
  const std::vector<std::string> base = {
      "sweep", "--axis1", "r_b=0:0.3:4", "--axis2", "G_m/G_c=1,2", "--measures", "E_N,G_ab,G_ba",
      "--set", "G_c_over_omega_b=0.02", "--set", "G_m_over_omega_b=0.03", "--out", dir.string()};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return cli_run(a);
  };
  EXPECT_EQ(with({"--stop-after", "3"}).code, cli::kSuccess);
  EXPECT_FALSE(fs::exists(dir / "E_N.csv"));
  EXPECT_EQ(with({"--resume", "--workers", "2"}).code, cli::kSuccess);
  const std::string resumed = slurp(dir / "G_ba.csv");
  EXPECT_EQ(with({"--workers", "1"}).code, cli::kSuccess);
  EXPECT_EQ(slurp(dir / "G_ba.csv"), resumed);

  for (const char* f : {"E_N.csv", "G_ab.csv", "diagnostics.csv", "contours.csv", "timing.csv"}) {
    std::ifstream in(dir / f);
    EXPECT_NO_THROW(check_schema_header(in)) << f;
  }
  const auto m = Json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["schema_version"], kSchemaVersion);
  EXPECT_EQ(m["grid"]["axis1"]["path"], "r_b");
  EXPECT_EQ(m["run"]["overrides"].size(), 2u);
  fs::remove_all(dir);
}

TEST(Cli, FigureUsesOutputRootAndRunsDataOnly) {
  const fs::path root = scratch("root");
  ::setenv(cli::kOutRootEnv, root.c_str(), 1);
  ::unsetenv(cli::kPlotterEnv);
  const CliRun r = cli_run({"figure", "fig2", "--grid", "3"});
  ::unsetenv(cli::kOutRootEnv);
  EXPECT_EQ(r.code, cli::kSuccess) << r.err;
  EXPECT_TRUE(fs::exists(root / "fig2" / "E_N.csv"));
  EXPECT_NE(r.out.find("data only"), std::string::npos);
  EXPECT_EQ(cli_run({"figure", "fig99"}).code, cli::kSpecError);
  fs::remove_all(root);
}

TEST(Schema, ForeignVersionIsRejected) {
  std::istringstream good("# fbcom schema_version=1 kind=measure\n");
  EXPECT_NO_THROW(check_schema_header(good));
  std::istringstream bad("# fbcom schema_version=2 kind=measure\n");
  EXPECT_THROW(check_schema_header(bad), SpecError);
  std::istringstream none("axis1,axis2\n");
  EXPECT_THROW(check_schema_header(none), SpecError);
}
