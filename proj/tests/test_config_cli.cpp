#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "runner.hpp"

using namespace hom4;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hom4_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

cli::RunOptions options(const std::string& command, const fs::path& dir, bool zoom = false) {
  cli::RunOptions o;
  o.command = command;
  o.out_dir = dir;
  o.zoom = zoom;
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HOM4_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* small_scenario = R"(# tiny source for fast runs
[scenario]
name = tiny
threads = 2

[grid]
n_points = 64

[sweep]
start_nm = -766
stop_nm = 766
step_nm = 191.5

[zoom]
start_nm = -766
stop_nm = 766
step_nm = 95.75

[entanglement]
phi1_points = 3
phase_points = 3
)";

}  // namespace

TEST(Config, DefaultsAndDerivedWindows) {
  const auto c = parse_config_string("[pump]\nwavelength_nm = 800\n");
  EXPECT_DOUBLE_EQ(c.pump.wavelength_nm, 800.0);
  EXPECT_DOUBLE_EQ(c.zoom_start_nm, -2400.0);
  EXPECT_DOUBLE_EQ(c.zoom_step_nm, 20.0);
  EXPECT_DOUBLE_EQ(c.dispersion.signal_wavelength_nm, 1600.0);
  EXPECT_DOUBLE_EQ(c.phi1_deg, 45.0);
  EXPECT_NEAR(c.setup().phi1, pi / 4, 1e-15);
}

TEST(Config, UnknownKeyReportsItsLine) {
  try {
    parse_config_string("[pump]\ntau_ps = 0.3\n\nbogus = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "pump.bogus");
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Config, RejectsMalformedInput) {
  for (const char* text : {"[nowhere]\n", "[pump]\ntau_ps\n", "tau_ps = 1\n", "[pump]\ntau_ps = abc\n",
                           "[pump]\ntau_ps = 1\ntau_ps = 2\n", "[pump]\ntau_ps = -1\n", "[grid]\nn_points = 2.5\n",
                           "[scenario]\ncompensated = maybe\n", "[pump\n", "[zoom]\nstart_nm = 5\nstop_nm = 1\n"}) {
    EXPECT_THROW(parse_config_string(text), ConfigError) << text;
  }
}

TEST(Config, CanonicalTextRoundTrips) {
  const auto c = parse_config_string(small_scenario);
  const std::string ini = c.to_ini();
  EXPECT_EQ(parse_config_string(ini).to_ini(), ini);
  EXPECT_NE(ini.find("n_points = 64"), std::string::npos);
}

TEST(Config, ShippedScenariosLoad) {
  for (const char* name : {"fig3.ini", "compensated.ini", "entanglement.ini"})
    EXPECT_NO_THROW(load_config(std::string(HOM4_CONFIG_DIR) + "/" + name)) << name;
  EXPECT_TRUE(load_config(std::string(HOM4_CONFIG_DIR) + "/compensated.ini").compensated);
  EXPECT_THROW(load_config("/nonexistent/hom4.ini"), IoError);
}

TEST(Runner, Sha256KnownVector) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, OutputsAreDeterministicAndHashed) {
  const auto cfg = parse_config_string(small_scenario);
  for (const char* cmd : {"jsa", "schmidt", "sweep", "entanglement", "report"}) {
    const fs::path a = scratch_dir(std::string("a_") + cmd), b = scratch_dir(std::string("b_") + cmd);
    cli::Runner(cfg, options(cmd, a)).run();
    cli::Runner(cfg, options(cmd, b)).run();
    for (const auto& entry : fs::directory_iterator(a))
      EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << cmd << " " << entry.path();

    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    EXPECT_EQ(manifest["command"], cmd);
    EXPECT_EQ(manifest["config_sha256"], cli::sha256_hex(cfg.to_ini()));
    ASSERT_FALSE(manifest["artifacts"].empty());
    for (const auto& art : manifest["artifacts"])
      EXPECT_EQ(art["sha256"], cli::sha256_hex(slurp(a / art["file"].get<std::string>())));
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(Runner, SweepCsvLayout) {
  const fs::path dir = scratch_dir("layout");
  const auto cfg = parse_config_string(small_scenario);
  cli::Runner(cfg, options("sweep", dir)).run();
  cli::Runner(cfg, options("sweep", dir, true)).run();
  std::istringstream coarse(slurp(dir / "sweep.csv")), fine(slurp(dir / "sweep_zoom.csv"));
  std::string header;
  std::getline(coarse, header);
  EXPECT_EQ(header, "delay_nm,p22,p3113,p1331,p4004,p0440,sum");
  int rows = 0;
  for (std::string line; std::getline(coarse, line);) ++rows;
  EXPECT_EQ(rows, 9);  // stop included
  rows = 0;
  std::getline(fine, header);
  for (std::string line; std::getline(fine, line);) ++rows;
  EXPECT_EQ(rows, 16);  // periodic window, stop excluded
  fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const auto good = write_file(dir, "good.ini", small_scenario);
  const auto bad = write_file(dir, "bad.ini", "[pump]\nwavelength = 766\n");
  const auto coarse = write_file(dir, "coarse.ini", "[pump]\ntau_ps = 10\n[grid]\nn_points = 64\n");
  const auto counts = write_file(dir, "counts.csv", "combo,region,rate\nABCD,far,1000\nABC,far,10\n");
  const std::string out = " --out " + (dir / "out").string();

  EXPECT_EQ(run_cli("sweep --config " + good.string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "sweep.csv"));
  EXPECT_EQ(run_cli("sweep --config " + bad.string() + out), 2);
  EXPECT_EQ(run_cli("sweep --config " + (dir / "missing.ini").string() + out), 2);
  EXPECT_EQ(run_cli("sweep" + out), 2);
  EXPECT_EQ(run_cli("frobnicate --config " + good.string()), 2);
  EXPECT_EQ(run_cli("jsa --config " + coarse.string() + out), 3);
  EXPECT_EQ(run_cli("calibrate --config " + good.string() + " --counts " + counts.string() + out), 3);
  EXPECT_EQ(run_cli("calibrate --config " + good.string() + out), 2);
  fs::remove_all(dir);
}

TEST(Cli, CalibrateWritesEstimate) {
  const fs::path dir = scratch_dir("calibrate");
  const auto cfg = write_file(dir, "c.ini", small_scenario);
  const auto far = forward_counts(0.6, 2000.0, 0.37, 0.25);
  const auto peak = forward_counts(0.6, 2000.0, 0.915, 0.25);
  const auto counts = write_file(dir, "counts.csv",
                                 fmt::format("combo,region,rate\nABCD,far,{:.17g}\nABC,far,{:.17g}\nABCD,peak,{:.17g}\n",
                                             far.c_abcd, far.c_abc, peak.c_abcd));
  ASSERT_EQ(run_cli("calibrate --config " + cfg.string() + " --counts " + counts.string() + " --out " + dir.string()), 0);
  const auto j = nlohmann::json::parse(slurp(dir / "calibration.json"));
  EXPECT_NEAR(j["eta"].get<double>(), 0.6, 1e-9);
  EXPECT_NEAR(j["n4"].get<double>(), 2000.0, 1e-6);
  EXPECT_NEAR(j["p22_ex"].get<double>(), 0.915, 1e-9);
  EXPECT_FALSE(j["out_of_range"].get<bool>());
  fs::remove_all(dir);
}
