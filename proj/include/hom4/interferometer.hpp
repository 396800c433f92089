#pragma once

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "hom4/errors.hpp"
#include "hom4/jsa.hpp"
#include "hom4/mode_algebra.hpp"
#include "hom4/optics.hpp"
#include "hom4/schmidt.hpp"

namespace hom4 {

/// The four-photon state in front of the beam splitter, split by how many
/// photons sit in channel 1: two (22), zero or four (4004), one or three (3113).
/// `state` carries the beam splitter as its output map, so it is sector-tagged.
struct SectorState {
  FourPhotonState state;
  double norm22 = 0.0;
  double norm4004 = 0.0;
  double norm3113 = 0.0;

  double total() const { return norm22 + norm4004 + norm3113; }
};

namespace detail {

inline SectorState split_sectors(ChannelAmplitude before, const OpticalSetup& setup) {
  const auto p = FourPhotonState(before, Mat2C::Identity(), false).pattern_distribution();
  FourPhotonState st(std::move(before), beam_splitter(setup.theta), true);
  return {std::move(st), p[2], p[0] + p[4], p[1] + p[3]};
}

inline TransferFn before_bs(const OpticalSetup& setup) {
  return [setup](double w) { return before_bs_transfer(setup, w); };
}

}  // namespace detail

inline SectorState before_bs_state(const SchmidtDecomposition& d, const OpticalSetup& setup) {
  return detail::split_sectors(channel_amplitude(d, detail::before_bs(setup)), setup);
}

/// Untruncated (grid-basis) variant; cost grows as N^3.
inline SectorState before_bs_state(const JointSpectralAmplitude& jsa, const OpticalSetup& setup) {
  return detail::split_sectors(channel_amplitude(jsa.is_normalized() ? jsa : jsa.normalized(), detail::before_bs(setup)),
                               setup);
}

/// Output state after the beam splitter. Stored as the before-BS amplitude with
/// the beam splitter as output map, so sector contributions stay available.
inline FourPhotonState output_state(const SchmidtDecomposition& d, const OpticalSetup& setup) {
  return FourPhotonState(channel_amplitude(d, detail::before_bs(setup)), beam_splitter(setup.theta), true);
}

inline FourPhotonState output_state(const JointSpectralAmplitude& jsa, const OpticalSetup& setup) {
  return FourPhotonState(channel_amplitude(jsa.is_normalized() ? jsa : jsa.normalized(), detail::before_bs(setup)),
                         beam_splitter(setup.theta), true);
}

/// Output state propagated through the full chain in one step (no sector tags).
inline FourPhotonState output_state_direct(const SchmidtDecomposition& d, const OpticalSetup& setup) {
  return symmetric_square(channel_amplitude(d, [setup](double w) { return transfer_matrix(setup, w); }));
}

/// Single-pair output brackets: the signal photon leaves as a1 A_1 + a2 A_2,
/// the idler as b1 B_1 + b2 B_2.
struct TwoModeBrackets {
  cplx a1, a2, b1, b2;
};

/// Brackets with the delay phase taken at the degenerate carrier,
/// e^{i w Delta l / c} -> e^{i pi Delta l / lambda_p}.
inline TwoModeBrackets closed_form_brackets(const OpticalSetup& setup, double pump_wavelength_nm) {
  const cplx e = std::polar(1.0, pi * setup.delay_nm / pump_wavelength_nm);
  const double cp = std::cos(setup.phi1), sp = std::sin(setup.phi1);
  const double ct = std::cos(setup.theta), st = std::sin(setup.theta);
  TwoModeBrackets b;
  b.a1 = -I * ct * cp - I * e * st * sp;
  b.a2 = -cp * st + e * ct * sp;
  b.b1 = -I * e * cp * st + I * ct * sp;
  b.b2 = e * ct * cp + st * sp;
  return b;
}

/// Closed-form brackets for a source in the single-Schmidt-pair regime.
inline TwoModeBrackets two_mode_closed_form(const SchmidtDecomposition& d, const OpticalSetup& setup,
                                            double pump_wavelength_nm) {
  const double lambda1 = d.raw_coefficients(0);
  if (lambda1 < 1.0 - 1e-6)
    throw MultimodeInput(fmt::format("closed form needs a single Schmidt pair (lambda_1 = {:.9f})", lambda1));
  return closed_form_brackets(setup, pump_wavelength_nm);
}

/// Numerical brackets of the first Schmidt pair: <u_1| T_c0 |u_1>, <v_1| T_c1 |v_1>.
inline TwoModeBrackets single_mode_brackets(const SchmidtDecomposition& d, const OpticalSetup& setup) {
  const auto n = static_cast<Eigen::Index>(d.grid.size());
  std::array<cplx, 4> acc{};
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = d.grid.weights()(j);
    const Mat2C ts = transfer_matrix(setup, d.grid.signal_omega(j));
    const Mat2C ti = transfer_matrix(setup, d.grid.idler_omega(j));
    const double us = w * std::norm(d.signal_modes(j, 0));
    const double vi = w * std::norm(d.idler_modes(j, 0));
    acc[0] += us * ts(0, 0);
    acc[1] += us * ts(1, 0);
    acc[2] += vi * ti(0, 1);
    acc[3] += vi * ti(1, 1);
  }
  return {acc[0], acc[1], acc[2], acc[3]};
}

}  // namespace hom4
