#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hom4/errors.hpp"
#include "hom4/jsa.hpp"
#include "hom4/optics.hpp"
#include "hom4/schmidt.hpp"

namespace hom4 {

/// Fully resolved scenario: every key has a value once parsing succeeds.
struct ScenarioConfig {
  std::string name = "scenario";
  bool compensated = false;

  PumpConfig pump;
  DispersionModel dispersion = symmetric_gvm_model();
  std::size_t n_points = 256;
  double span_sigmas = 6.0;
  SchmidtOptions schmidt;

  double phi1_deg = 45.0;
  double theta_deg = 45.0;
  double delay_nm = 0.0;
  double common_path_nm = 0.0;

  // Coarse sweep (envelope).
  double sweep_start_nm = -1.0e6;
  double sweep_stop_nm = 1.0e6;
  double sweep_step_nm = 50 * 766.0;

  // Fine sweep (--zoom); the stop point is excluded so the window is periodic.
  double zoom_start_nm = -3 * 766.0;
  double zoom_stop_nm = 3 * 766.0;
  double zoom_step_nm = 766.0 / 40;

  std::size_t phi1_points = 33;
  std::size_t phase_points = 33;

  double p22_th = 0.37;
  double p13_th = 0.25;

  unsigned threads = 0;

  OpticalSetup setup() const {
    OpticalSetup s;
    s.phi1 = phi1_deg * pi / 180.0;
    s.theta = theta_deg * pi / 180.0;
    s.delay_nm = delay_nm;
    s.common_path_nm = common_path_nm;
    return s;
  }

  /// Canonical text of the resolved configuration (fixed key order, 12 significant digits).
  std::string to_ini() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string num(double v) { return fmt::format("{:.12g}", v); }

struct KeyBinding {
  std::function<void(const std::string&, const std::string&, int)> set;
  std::function<std::string()> get;
};

inline double parse_double(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, line, "expected a finite number, got '" + v + "'");
  }
}

inline std::size_t parse_count(const std::string& key, const std::string& v, int line) {
  const double d = parse_double(key, v, line);
  if (d < 0 || d != std::floor(d)) throw ConfigError(key, line, "expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, line, "expected true or false, got '" + v + "'");
}

/// Section.key -> accessor on a config instance, in canonical output order.
inline std::vector<std::pair<std::string, KeyBinding>> bindings(ScenarioConfig& c) {
  std::vector<std::pair<std::string, KeyBinding>> b;
  auto real = [&b](std::string k, double& field) {
    b.push_back({std::move(k), {[&field](const std::string& key, const std::string& v, int line) {
                                  field = parse_double(key, v, line);
                                },
                                [&field] { return num(field); }}});
  };
  auto count = [&b](std::string k, std::size_t& field) {
    b.push_back({std::move(k), {[&field](const std::string& key, const std::string& v, int line) {
                                  field = parse_count(key, v, line);
                                },
                                [&field] { return std::to_string(field); }}});
  };
  b.push_back({"scenario.name", {[&c](const std::string&, const std::string& v, int) { c.name = v; },
                                 [&c] { return c.name; }}});
  b.push_back({"scenario.compensated",
               {[&c](const std::string& k, const std::string& v, int line) { c.compensated = parse_bool(k, v, line); },
                [&c] { return std::string(c.compensated ? "true" : "false"); }}});
  b.push_back({"scenario.threads", {[&c](const std::string& k, const std::string& v, int line) {
                                      c.threads = static_cast<unsigned>(parse_count(k, v, line));
                                    },
                                    [&c] { return std::to_string(c.threads); }}});
  real("pump.wavelength_nm", c.pump.wavelength_nm);
  real("pump.tau_ps", c.pump.tau_ps);
  real("pump.crystal_length_mm", c.pump.crystal_length_mm);
  real("pump.poling_period_um", c.dispersion.poling_period_um);
  real("pump.xi", c.pump.xi);
  real("dispersion.inv_vg_signal_ps_per_mm", c.dispersion.inv_vg_signal);
  real("dispersion.inv_vg_idler_ps_per_mm", c.dispersion.inv_vg_idler);
  real("dispersion.inv_vg_pump_ps_per_mm", c.dispersion.inv_vg_pump);
  real("dispersion.gvd_signal_ps2_per_mm", c.dispersion.gvd_signal);
  real("dispersion.gvd_idler_ps2_per_mm", c.dispersion.gvd_idler);
  real("dispersion.gvd_pump_ps2_per_mm", c.dispersion.gvd_pump);
  count("grid.n_points", c.n_points);
  real("grid.span_sigmas", c.span_sigmas);
  count("schmidt.max_modes", c.schmidt.max_modes);
  real("schmidt.tail_tol", c.schmidt.tail_tol);
  real("setup.phi1_deg", c.phi1_deg);
  real("setup.theta_deg", c.theta_deg);
  real("setup.delay_nm", c.delay_nm);
  real("setup.common_path_nm", c.common_path_nm);
  real("sweep.start_nm", c.sweep_start_nm);
  real("sweep.stop_nm", c.sweep_stop_nm);
  real("sweep.step_nm", c.sweep_step_nm);
  real("zoom.start_nm", c.zoom_start_nm);
  real("zoom.stop_nm", c.zoom_stop_nm);
  real("zoom.step_nm", c.zoom_step_nm);
  count("entanglement.phi1_points", c.phi1_points);
  count("entanglement.phase_points", c.phase_points);
  real("calibration.p22_th", c.p22_th);
  real("calibration.p13_th", c.p13_th);
  return b;
}

}  // namespace detail

inline std::string ScenarioConfig::to_ini() const {
  ScenarioConfig copy = *this;
  std::string out, section;
  for (const auto& [key, bind] : detail::bindings(copy)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + ("[" + sec + "]\n");
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + bind.get() + "\n";
  }
  return out;
}

/// Cross-field checks after all keys are read.
inline void validate(const ScenarioConfig& c) {
  auto need = [](bool ok, const char* key, const std::string& msg) {
    if (!ok) throw ConfigError(key, 0, msg);
  };
  need(c.pump.wavelength_nm > 0, "pump.wavelength_nm", "must be positive");
  need(c.pump.tau_ps > 0, "pump.tau_ps", "must be positive");
  need(c.pump.crystal_length_mm > 0, "pump.crystal_length_mm", "must be positive");
  need(c.dispersion.poling_period_um > 0, "pump.poling_period_um", "must be positive");
  need(c.dispersion.inv_vg_signal > 0, "dispersion.inv_vg_signal_ps_per_mm", "must be positive");
  need(c.dispersion.inv_vg_idler > 0, "dispersion.inv_vg_idler_ps_per_mm", "must be positive");
  need(c.dispersion.inv_vg_pump > 0, "dispersion.inv_vg_pump_ps_per_mm", "must be positive");
  need(c.n_points >= 8, "grid.n_points", "must be at least 8");
  need(c.span_sigmas > 0, "grid.span_sigmas", "must be positive");
  need(c.schmidt.max_modes >= 1, "schmidt.max_modes", "must be at least 1");
  need(c.schmidt.tail_tol >= 0 && c.schmidt.tail_tol < 1, "schmidt.tail_tol", "must lie in [0, 1)");
  need(c.sweep_step_nm > 0, "sweep.step_nm", "must be positive");
  need(c.sweep_stop_nm >= c.sweep_start_nm, "sweep.stop_nm", "must not be below sweep.start_nm");
  need(c.zoom_step_nm > 0, "zoom.step_nm", "must be positive");
  need(c.zoom_stop_nm > c.zoom_start_nm, "zoom.stop_nm", "must exceed zoom.start_nm");
  need(c.phi1_points >= 2, "entanglement.phi1_points", "must be at least 2");
  need(c.phase_points >= 2, "entanglement.phase_points", "must be at least 2");
  need(c.p22_th > 0 && c.p22_th <= 1, "calibration.p22_th", "must lie in (0, 1]");
  need(c.p13_th >= 0 && c.p13_th <= 1, "calibration.p13_th", "must lie in [0, 1]");
}

/// Flat INI: `[section]` headers, `key = value` lines, `#` or `;` comments.
/// Unknown sections or keys and duplicates are rejected with their line number.
inline ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig c;
  auto table = detail::bindings(c);
  std::map<std::string, detail::KeyBinding*> lookup;
  for (auto& [k, b] : table) lookup[k] = &b;
  std::map<std::string, int> seen;

  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto hash = s.find_first_of("#;"); hash != std::string::npos) s.erase(hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(s, line, "malformed section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto& [k, b] : table) known = known || k.rfind(section + ".", 0) == 0;
      if (!known) throw ConfigError(section, line, "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, line, "expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (section.empty()) throw ConfigError(key, line, "key outside of any section");
    const std::string full = section + "." + key;
    const auto it = lookup.find(full);
    if (it == lookup.end()) throw ConfigError(full, line, "unknown key");
    if (const auto prev = seen.find(full); prev != seen.end())
      throw ConfigError(full, line, fmt::format("duplicate key (first set on line {})", prev->second));
    seen[full] = line;
    it->second->set(full, value, line);
  }
  // Zoom window and coarse step follow the pump wavelength unless given explicitly.
  const double lp = c.pump.wavelength_nm;
  c.dispersion.pump_wavelength_nm = lp;  // degenerate operation: signal and idler at 2 lambda_p
  c.dispersion.signal_wavelength_nm = c.dispersion.idler_wavelength_nm = 2 * lp;
  if (!seen.count("zoom.start_nm")) c.zoom_start_nm = -3 * lp;
  if (!seen.count("zoom.stop_nm")) c.zoom_stop_nm = 3 * lp;
  if (!seen.count("zoom.step_nm")) c.zoom_step_nm = lp / 40;
  if (!seen.count("sweep.step_nm")) c.sweep_step_nm = 50 * lp;
  validate(c);
  return c;
}

inline ScenarioConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_config(in);
}

}  // namespace hom4
