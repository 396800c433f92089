#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "hom4/errors.hpp"
#include "hom4/frequency_grid.hpp"
#include "hom4/units.hpp"

namespace hom4 {

/// Taylor-expanded dispersion of the type-II crystal around the degenerate
/// operating point. The pump and signal travel as ordinary rays, the idler as
/// the extraordinary ray. Zeroth-order wavevectors are not stored: the poling
/// period is assumed to cancel the mismatch at the center frequencies, so all
/// k(w) below are measured relative to their center values.
struct DispersionModel {
  double pump_wavelength_nm = 766.0;
  double signal_wavelength_nm = 1532.0;
  double idler_wavelength_nm = 1532.0;

  double inv_vg_pump = 6.30;    // ps/mm, ordinary at the pump
  double inv_vg_signal = 6.30;  // ps/mm, ordinary at the signal
  double inv_vg_idler = 6.30;   // ps/mm, extraordinary at the idler

  double gvd_pump = 0.0;  // ps^2/mm
  double gvd_signal = 0.0;
  double gvd_idler = 0.0;

  double poling_period_um = 126.0;

  double omega_p0() const { return angular_frequency(pump_wavelength_nm); }
  double omega_s0() const { return angular_frequency(signal_wavelength_nm); }
  double omega_i0() const { return angular_frequency(idler_wavelength_nm); }

  /// d(dk)/d(w_s) and d(dk)/d(w_i) at the center.
  double signal_slope() const { return inv_vg_pump - inv_vg_signal; }
  double idler_slope() const { return inv_vg_pump - inv_vg_idler; }

  /// Relative wavevectors (rad/mm) of the three branches.
  double k_pump(double omega) const { return taylor(omega - omega_p0(), inv_vg_pump, gvd_pump); }
  double k_ordinary(double omega) const { return taylor(omega - omega_s0(), inv_vg_signal, gvd_signal); }
  double k_extraordinary(double omega) const { return taylor(omega - omega_i0(), inv_vg_idler, gvd_idler); }

  void validate() const {
    for (double v : {inv_vg_pump, inv_vg_signal, inv_vg_idler})
      if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("inverse group velocities must be finite and positive");
    for (double v : {gvd_pump, gvd_signal, gvd_idler})
      if (!std::isfinite(v)) throw std::invalid_argument("dispersion coefficients must be finite");
    for (double v : {pump_wavelength_nm, signal_wavelength_nm, idler_wavelength_nm, poling_period_um})
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("wavelengths and poling period must be positive");
    const double mismatch = omega_p0() - omega_s0() - omega_i0();
    if (std::abs(mismatch) > 1e-9 * omega_p0())
      throw std::invalid_argument("center frequencies violate energy conservation");
  }

private:
  static double taylor(double detuning, double inv_vg, double gvd) {
    return inv_vg * detuning + 0.5 * gvd * detuning * detuning;
  }
};

/// Symmetric group-velocity matching: signal and idler slopes equal and opposite.
/// The default slope maximizes lambda_1 for the 8 mm / 0.29 ps configuration;
/// the sinc side lobes cap it near 0.93 on the default grid.
inline DispersionModel symmetric_gvm_model(double slope_ps_per_mm = 0.10, double inv_vg_pump = 6.30) {
  DispersionModel d;
  d.inv_vg_pump = inv_vg_pump;
  d.inv_vg_signal = inv_vg_pump - slope_ps_per_mm;
  d.inv_vg_idler = inv_vg_pump + slope_ps_per_mm;
  return d;
}

struct PumpConfig {
  double wavelength_nm = 766.0;
  double tau_ps = 0.29;
  double crystal_length_mm = 8.0;
  double xi = 1.0;  // overall coupling; cancels once probabilities are conditioned

  double omega_p() const { return angular_frequency(wavelength_nm); }

  void validate() const {
    if (!(wavelength_nm > 0.0) || !(tau_ps > 0.0) || !(crystal_length_mm > 0.0))
      throw std::invalid_argument("pump wavelength, duration and crystal length must be positive");
  }
};

/// Phase mismatch dk(w_s, w_i) in rad/mm; zero at the center frequencies.
inline double phase_mismatch(double omega_s, double omega_i, const DispersionModel& disp) {
  return disp.k_pump(omega_s + omega_i) - disp.k_ordinary(omega_s) - disp.k_extraordinary(omega_i);
}

inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

/// Two-photon amplitude F(w_s, w_i) sampled on a grid: rows index the signal
/// node, columns the idler node.
class JointSpectralAmplitude {
public:
  JointSpectralAmplitude(FrequencyGrid grid, MatrixC values) : grid_(std::move(grid)), values_(std::move(values)) {
    const auto n = static_cast<Eigen::Index>(grid_.size());
    if (values_.rows() != n || values_.cols() != n) throw std::invalid_argument("JSA shape does not match the grid");
  }

  /// Samples f(w_s, w_i) at absolute frequencies and normalizes the result.
  static JointSpectralAmplitude from_function(const FrequencyGrid& grid, const std::function<cplx(double, double)>& f) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    MatrixC v(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l) v(j, l) = f(grid.signal_omega(j), grid.idler_omega(l));
    return JointSpectralAmplitude(grid, std::move(v)).normalized();
  }

  const FrequencyGrid& grid() const { return grid_; }
  const MatrixC& values() const { return values_; }
  bool is_normalized() const { return normalized_; }

  /// Quadrature L2 norm sqrt(sum_jl w_j w_l |F_jl|^2).
  double norm() const { return weighted().norm(); }

  /// sqrt(w_j) F_jl sqrt(w_l): the matrix whose Frobenius geometry matches the continuum.
  MatrixC weighted() const {
    const VectorR sw = grid_.weights().cwiseSqrt();
    return sw.asDiagonal() * values_ * sw.asDiagonal();
  }

  JointSpectralAmplitude normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DegenerateState("JSA has zero or non-finite norm");
    JointSpectralAmplitude out(grid_, values_ / n);
    out.normalized_ = true;
    return out;
  }

  /// Builds a normalized JSA from a sqrt-weighted matrix (inverse of weighted()).
  static JointSpectralAmplitude from_weighted(const FrequencyGrid& grid, const MatrixC& weighted_values) {
    const VectorR isw = grid.weights().cwiseSqrt().cwiseInverse();
    return JointSpectralAmplitude(grid, isw.asDiagonal() * weighted_values * isw.asDiagonal()).normalized();
  }

private:
  FrequencyGrid grid_;
  MatrixC values_;
  bool normalized_ = false;
};

/// Gaussian-equivalent standard deviation of the signal and idler marginal
/// spectra (rad/ps). The sinc is replaced by exp(-0.193 x^2), which matches its FWHM.
inline std::pair<double, double> marginal_sigmas(const PumpConfig& pump, const DispersionModel& disp) {
  constexpr double sinc_gauss = 0.193;
  const double a_s = disp.signal_slope();
  const double a_i = disp.idler_slope();
  const double t2 = pump.tau_ps * pump.tau_ps;
  const double pm = 2.0 * sinc_gauss * 0.25 * pump.crystal_length_mm * pump.crystal_length_mm;
  Eigen::Matrix2d q;
  q << t2 + pm * a_s * a_s, t2 + pm * a_s * a_i, t2 + pm * a_s * a_i, t2 + pm * a_i * a_i;
  const double det = q.determinant();
  if (!(det > 1e-12 * q.squaredNorm())) {
    // Phase matching does not confine the difference frequency; fall back to the pump width.
    const double s = 1.0 / pump.tau_ps;
    return {s, s};
  }
  const Eigen::Matrix2d cov = 0.5 * q.inverse();
  return {std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1))};
}

/// Default grid: half-span of `span_sigmas` marginal standard deviations around
/// the degenerate center frequencies.
inline FrequencyGrid make_grid(const PumpConfig& pump, const DispersionModel& disp, std::size_t n_points = 256,
                               double span_sigmas = 6.0) {
  pump.validate();
  disp.validate();
  const auto [ss, si] = marginal_sigmas(pump, disp);
  return FrequencyGrid(n_points, disp.omega_s0(), disp.omega_i0(), span_sigmas * std::max(ss, si));
}

namespace detail {

inline void check_resolution(const FrequencyGrid& grid, const PumpConfig& pump, const DispersionModel& disp) {
  constexpr double min_nodes = 8.0;
  const double h = grid.spacing();
  const double pump_nodes = (1.0 / pump.tau_ps) / h;
  const double slope = std::max(std::abs(disp.signal_slope()), std::abs(disp.idler_slope()));
  if (pump_nodes < min_nodes)
    throw GridTooCoarse(fmt::format("pump bandwidth spans {:.2f} nodes (< {})", pump_nodes, min_nodes));
  if (slope > 0.0) {
    const double pm_nodes = (2.0 * pi / (pump.crystal_length_mm * slope)) / h;
    if (pm_nodes < min_nodes)
      throw GridTooCoarse(fmt::format("phase-matching width spans {:.2f} nodes (< {})", pm_nodes, min_nodes));
  }
}

template <class PhaseFn>
JointSpectralAmplitude build(const FrequencyGrid& grid, const PumpConfig& pump, const DispersionModel& disp,
                             PhaseFn extra_phase) {
  pump.validate();
  disp.validate();
  check_resolution(grid, pump, disp);
  const double wp = pump.omega_p();
  const double len = pump.crystal_length_mm;
  const double t2 = pump.tau_ps * pump.tau_ps;
  return JointSpectralAmplitude::from_function(grid, [&](double ws, double wi) {
    const double dk = phase_mismatch(ws, wi, disp);
    const double det = ws + wi - wp;
    const double amp = std::exp(-det * det * t2 / 2.0) * sinc(0.5 * len * dk);
    return std::polar(amp, 0.5 * len * (dk + extra_phase(ws, wi)));
  });
}

}  // namespace detail

/// F = exp(-(w_s+w_i-w_p)^2 tau^2/2) sinc(L dk/2) exp(i L dk/2), normalized on the grid.
inline JointSpectralAmplitude build_jsa(const FrequencyGrid& grid, const PumpConfig& pump, const DispersionModel& disp) {
  return detail::build(grid, pump, disp, [](double, double) { return 0.0; });
}

/// Adds the phase of a half-length compensator that swaps polarizations:
/// exp(i L (dk + kbar)/2) with kbar = -k_e(w_s) - k_o(w_i).
inline JointSpectralAmplitude build_compensated_jsa(const FrequencyGrid& grid, const PumpConfig& pump,
                                                    const DispersionModel& disp) {
  return detail::build(grid, pump, disp, [&](double ws, double wi) {
    // The compensator's e/o branches are centered on the same degenerate frequency.
    const double ke_s = disp.inv_vg_idler * (ws - disp.omega_s0()) +
                        0.5 * disp.gvd_idler * (ws - disp.omega_s0()) * (ws - disp.omega_s0());
    const double ko_i = disp.inv_vg_signal * (wi - disp.omega_i0()) +
                        0.5 * disp.gvd_signal * (wi - disp.omega_i0()) * (wi - disp.omega_i0());
    return -ke_s - ko_i;
  });
}

}  // namespace hom4
