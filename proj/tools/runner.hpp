#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "hom4/calibration.hpp"
#include "hom4/config.hpp"
#include "hom4/detection.hpp"
#include "hom4/entanglement.hpp"

namespace hom4::cli {

using nlohmann::json;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw IoError("SHA-256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

inline std::string g12(double v) { return fmt::format("{:.12g}", v); }

/// JSON number rounded to 12 significant digits so output text is stable.
inline json jnum(double v) { return std::stod(g12(v)); }

struct RunOptions {
  std::string command;
  std::filesystem::path out_dir = ".";
  bool zoom = false;
  bool compensated = false;  // OR-ed with the config flag
  std::string counts_path;
};

/// Owns the derived source (grid, JSA, Schmidt modes) and writes artifacts.
class Runner {
public:
  Runner(ScenarioConfig cfg, RunOptions opts) : cfg_(std::move(cfg)), opts_(std::move(opts)) {
    cfg_.compensated = cfg_.compensated || opts_.compensated;
  }

  void run() {
    std::filesystem::create_directories(opts_.out_dir);
    const std::string& c = opts_.command;
    if (c == "jsa") run_jsa();
    else if (c == "schmidt") run_schmidt();
    else if (c == "sweep") run_sweep();
    else if (c == "entanglement") run_entanglement();
    else if (c == "bell") run_bell();
    else if (c == "report") run_report();
    else if (c == "calibrate") run_calibrate();
    else throw ConfigError("command", 0, "unknown subcommand '" + c + "'");
    write_manifest();
  }

  const std::vector<std::string>& artifacts() const { return artifacts_; }

private:
  const JointSpectralAmplitude& jsa() {
    if (!jsa_) {
      const FrequencyGrid grid = make_grid(cfg_.pump, cfg_.dispersion, cfg_.n_points, cfg_.span_sigmas);
      jsa_ = cfg_.compensated ? build_compensated_jsa(grid, cfg_.pump, cfg_.dispersion)
                              : build_jsa(grid, cfg_.pump, cfg_.dispersion);
    }
    return *jsa_;
  }
  const SchmidtDecomposition& modes() {
    if (!modes_) modes_ = decompose(jsa(), cfg_.schmidt);
    return *modes_;
  }

  void write(const std::string& name, const std::string& text) {
    const auto path = opts_.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
    artifacts_.push_back(name);
    contents_.push_back(text);
  }

  void run_jsa() {
    const auto& f = jsa();
    const auto& g = f.grid();
    std::string s = "omega_s,omega_i,re,im\n";
    const auto n = static_cast<Eigen::Index>(g.size());
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l)
        s += fmt::format("{},{},{},{}\n", g12(g.signal_omega(j)), g12(g.idler_omega(l)), g12(f.values()(j, l).real()),
                         g12(f.values()(j, l).imag()));
    write("jsa.csv", s);
  }

  void run_schmidt() {
    const auto& d = modes();
    std::string s = "k,lambda\n";
    for (Eigen::Index k = 0; k < d.coefficients.size(); ++k) s += fmt::format("{},{}\n", k + 1, g12(d.coefficients(k)));
    write("schmidt.csv", s);
    std::string m = "omega,k,re_u,im_u,re_v,im_v\n";
    const auto n = static_cast<Eigen::Index>(d.grid.size());
    for (Eigen::Index k = 0; k < d.signal_modes.cols(); ++k)
      for (Eigen::Index j = 0; j < n; ++j)
        m += fmt::format("{},{},{},{},{},{}\n", g12(d.grid.signal_omega(j)), k + 1, g12(d.signal_modes(j, k).real()),
                         g12(d.signal_modes(j, k).imag()), g12(d.idler_modes(j, k).real()),
                         g12(d.idler_modes(j, k).imag()));
    write("schmidt_modes.csv", m);
  }

  std::vector<double> delays() const {
    return opts_.zoom ? delay_grid(cfg_.zoom_start_nm, cfg_.zoom_stop_nm, cfg_.zoom_step_nm, false)
                      : delay_grid(cfg_.sweep_start_nm, cfg_.sweep_stop_nm, cfg_.sweep_step_nm, true);
  }

  void run_sweep() {
    const SweepCurve curve = sweep(modes(), cfg_.setup(), delays(), cfg_.threads);
    std::string s = "delay_nm,p22,p3113,p1331,p4004,p0440,sum\n";
    for (const auto& r : curve.rows)
      s += fmt::format("{},{},{},{},{},{},{}\n", g12(r.delay_nm), g12(r.p22), g12(r.p3113), g12(r.p1331), g12(r.p4004),
                       g12(r.p0440), g12(r.sum));
    write(opts_.zoom ? "sweep_zoom.csv" : "sweep.csv", s);
  }

  void run_entanglement() {
    const auto& f = jsa();
    const double lp = cfg_.pump.wavelength_nm;
    std::string s = "phi1_rad,phase_rad,K\n";
    for (std::size_t a = 0; a < cfg_.phi1_points; ++a) {
      const double phi1 = (pi / 2) * static_cast<double>(a) / static_cast<double>(cfg_.phi1_points - 1);
      for (std::size_t b = 0; b < cfg_.phase_points; ++b) {
        const double phase = 2 * pi * static_cast<double>(b) / static_cast<double>(cfg_.phase_points - 1);
        // phase = delta_l * omega_p / c
        const double dl = phase * lp / (2 * pi);
        s += fmt::format("{},{},{}\n", g12(phi1), g12(phase),
                         g12(spatial_schmidt_number(reduced_density_matrix(f, phi1, dl))));
      }
    }
    write("entanglement.csv", s);
  }

  void run_bell() {
    const auto& d = modes();
    const OpticalSetup setup = cfg_.setup();
    const BellCoefficients b = bell_decompose(closed_form_brackets(setup, cfg_.pump.wavelength_nm));
    static const char* names[4] = {"psi_plus", "psi_minus", "phi_plus", "phi_minus"};
    json bell = json::object(), gem = json::object();
    for (int i = 0; i < 4; ++i) bell[names[i]] = {{"re", jnum(b.bell[i].real())}, {"im", jnum(b.bell[i].imag())}};
    for (int i = 0; i < 16; ++i) gem[gem_label(i)] = {{"re", jnum(b.gem[i].real())}, {"im", jnum(b.gem[i].imag())}};
    const double lambda1 = d.raw_coefficients(0);
    json j = {{"phi1_rad", jnum(setup.phi1)},
              {"theta_rad", jnum(setup.theta)},
              {"delay_nm", jnum(setup.delay_nm)},
              {"lambda1", jnum(lambda1)},
              {"single_pair", lambda1 >= 1.0 - 1e-6},
              {"bell", bell},
              {"gem", gem}};
    write("bell.json", j.dump(2) + "\n");
  }

  void run_report() {
    const auto rows = interference_report(modes(), cfg_.setup(), delays(), cfg_.threads);
    static const char* labels[5] = {"p0440", "p1331", "p22", "p3113", "p4004"};
    static const char* sectors[3] = {"22", "4004", "3113"};
    json out = json::array();
    for (const auto& r : rows) {
      json row = {{"delay_nm", jnum(r.delay_nm)}};
      for (int m = 0; m < 5; ++m) {
        const auto& p = r.patterns[static_cast<std::size_t>(m)];
        json terms = json::object();
        for (int a = 0; a < 3; ++a)
          for (int b = a; b < 3; ++b)
            terms[a == b ? std::string(sectors[a]) : std::string(sectors[a]) + "x" + sectors[b]] = jnum(p.term[a][b]);
        row[labels[m]] = {{"overlap", jnum(p.overlap_sum())}, {"interference", jnum(p.total())}, {"terms", terms}};
      }
      out.push_back(row);
    }
    write("report.json", json{{"rows", out}}.dump(2) + "\n");
  }

  void run_calibrate() {
    if (opts_.counts_path.empty()) throw ConfigError("--counts", 0, "calibrate needs --counts <csv>");
    const CountRecord rec = read_counts_csv(opts_.counts_path);
    const CalibrationResult cal = estimate(rec, cfg_.p22_th, cfg_.p13_th);
    json j = {{"eta", jnum(cal.eta)}, {"n4", jnum(cal.n4)}, {"residual", jnum(cal.residual)}};
    const auto peaks = rec.rates("peak", 4);
    if (!peaks.empty()) {
      const PeakProbability p = normalize_peak(peaks, cal);
      j["p22_ex"] = jnum(p.p22);
      j["out_of_range"] = p.out_of_range;
    } else {
      j["p22_ex"] = nullptr;
    }
    write("calibration.json", j.dump(2) + "\n");
  }

  void write_manifest() {
    const std::string ini = cfg_.to_ini();
    json files = json::array();
    for (std::size_t i = 0; i < artifacts_.size(); ++i)
      files.push_back({{"file", artifacts_[i]}, {"sha256", sha256_hex(contents_[i])}, {"bytes", contents_[i].size()}});
    json m = {{"command", opts_.command},
              {"zoom", opts_.zoom},
              {"config_sha256", sha256_hex(ini)},
              {"config", ini},
              {"artifacts", files}};
    const auto path = opts_.out_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << m.dump(2) << "\n";
  }

  ScenarioConfig cfg_;
  RunOptions opts_;
  std::optional<JointSpectralAmplitude> jsa_;
  std::optional<SchmidtDecomposition> modes_;
  std::vector<std::string> artifacts_;
  std::vector<std::string> contents_;
};

}  // namespace hom4::cli
