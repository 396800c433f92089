#pragma once

#include <cmath>
#include <variant>

#include "hom4/units.hpp"

namespace hom4 {

/// Interferometer settings. Angles in radians, lengths in nm.
struct OpticalSetup {
  double phi1 = pi / 4;          // HWP1 conversion angle
  double theta = pi / 4;         // beam-splitter angle
  double delay_nm = 0.0;         // extra path in channel 2
  double common_path_nm = 0.0;   // x + y + l, shared by both channels
};

// Optical elements. Before the PBS the two-dimensional space is the
// polarization (H, V); after it, the spatial channel (1, 2).
namespace element {
struct HalfWavePlate {  // polarization rotation by the conversion angle
  double phi;
};
struct PolarizingBeamSplitter {};  // H -> channel 1, V -> channel 2
struct PolarizationSwitch {};      // HWP2: flips the polarization in channel 1
struct BeamSplitter {
  double theta;
};
struct FreePropagation {
  double path_nm;
};
struct Delay {  // extra path in channel 2
  double path_nm;
};
}  // namespace element

using Element = std::variant<element::HalfWavePlate, element::PolarizingBeamSplitter, element::PolarizationSwitch,
                             element::BeamSplitter, element::FreePropagation, element::Delay>;

/// Frequency-resolved 2x2 transfer matrix of one element at angular frequency `omega`.
///
/// Phase conventions are fixed by the closed-form output brackets: the beam
/// splitter is symmetric with -i on the reflected amplitudes and the
/// polarization switch is a half-wave plate at 45 degrees, -i [[0,1],[1,0]],
/// acting on channel 1 only.
inline Mat2C element_matrix(const Element& e, double omega) {
  struct Visitor {
    double omega;
    Mat2C operator()(const element::HalfWavePlate& h) const {
      const double c = std::cos(h.phi), s = std::sin(h.phi);
      Mat2C m;
      m << c, -s, s, c;
      return m;
    }
    Mat2C operator()(const element::PolarizingBeamSplitter&) const { return Mat2C::Identity(); }
    Mat2C operator()(const element::PolarizationSwitch&) const {
      Mat2C m = Mat2C::Identity();
      m(0, 0) = -I;
      return m;
    }
    Mat2C operator()(const element::BeamSplitter& b) const {
      const double c = std::cos(b.theta), s = std::sin(b.theta);
      Mat2C m;
      m << c, -I * s, -I * s, c;
      return m;
    }
    Mat2C operator()(const element::FreePropagation& f) const {
      return path_phase(omega, f.path_nm) * Mat2C::Identity();
    }
    Mat2C operator()(const element::Delay& d) const {
      Mat2C m = Mat2C::Identity();
      m(1, 1) = path_phase(omega, d.path_nm);
      return m;
    }
  };
  return std::visit(Visitor{omega}, e);
}

/// Single-photon map from (H, V) at the crystal to the channels in front of
/// the beam splitter: HWP2 . Delay . FP(common) . PBS . HWP1.
inline Mat2C before_bs_transfer(const OpticalSetup& setup, double omega) {
  return element_matrix(element::PolarizationSwitch{}, omega) * element_matrix(element::Delay{setup.delay_nm}, omega) *
         element_matrix(element::FreePropagation{setup.common_path_nm}, omega) *
         element_matrix(element::PolarizingBeamSplitter{}, omega) *
         element_matrix(element::HalfWavePlate{setup.phi1}, omega);
}

inline Mat2C beam_splitter(double theta) { return element_matrix(element::BeamSplitter{theta}, 0.0); }

/// Full chain BS . (before-BS chain). Column 0 is the signal (H) photon,
/// column 1 the idler (V) photon; rows are the output channels.
inline Mat2C transfer_matrix(const OpticalSetup& setup, double omega) {
  return beam_splitter(setup.theta) * before_bs_transfer(setup, omega);
}

}  // namespace hom4
