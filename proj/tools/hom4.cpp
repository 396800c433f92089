// hom4: scenario driver for the four-photon HOM interferometer simulator.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Four-photon HOM polarization-rotation interferometer simulator"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = ".", counts;
  bool zoom = false, compensated = false;
  const char* commands[][2] = {{"jsa", "joint spectral amplitude on the grid (jsa.csv)"},
                               {"schmidt", "Schmidt coefficients and mode functions (schmidt.csv, schmidt_modes.csv)"},
                               {"sweep", "pattern probabilities over the delay range (sweep.csv / sweep_zoom.csv)"},
                               {"entanglement", "spatial Schmidt number over (phi1, phase) (entanglement.csv)"},
                               {"bell", "Bell and gem coefficients of the single-pair output (bell.json)"},
                               {"report", "overlapping vs interference terms per pattern (report.json)"},
                               {"calibrate", "detector efficiency and quadruplet rate from counts (calibration.json)"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "scenario INI file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--zoom", zoom, "use the fine delay window");
    sub->add_flag("--compensated", compensated, "use the phase-compensated JSA");
    sub->add_option("--counts", counts, "count-rate CSV (combo,region,rate)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    hom4::ScenarioConfig cfg = hom4::load_config(config_path);
    hom4::cli::Runner runner(std::move(cfg), {command, out_dir, zoom, compensated, counts});
    runner.run();
    for (const auto& a : runner.artifacts()) fmt::print("{}/{}\n", out_dir, a);
    return 0;
  } catch (const hom4::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const hom4::IoError& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return 2;
  } catch (const hom4::NumericError& e) {
    fmt::print(stderr, "numeric failure in {}: {}\n", command, e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "numeric failure in {}: {}\n", command, e.what());
    return 3;
  }
}
