#pragma once

#include <array>
#include <cmath>
#include <string>

#include "hom4/interferometer.hpp"
#include "hom4/jsa.hpp"
#include "hom4/units.hpp"

namespace hom4 {

/// Channel-1 reduced density matrix of the before-BS four-photon state,
/// frequency-integrated. Basis order puts the phi1 = 0 state on diag(1, 0).
struct SpatialDensityMatrix {
  Mat2C rho;
  double phi1 = 0.0;
  double delay_nm = 0.0;
  double raw_trace = 1.0;  // trace before renormalization
};

/// Diagonal entries in closed form, off-diagonal from the frequency integrals
/// over |F|^2 of both pairs.
inline SpatialDensityMatrix reduced_density_matrix(const JointSpectralAmplitude& jsa, double phi1, double delay_nm) {
  const JointSpectralAmplitude f = jsa.is_normalized() ? jsa : jsa.normalized();
  const FrequencyGrid& g = f.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  const VectorR& w = g.weights();

  VectorC es(n), ei(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    es(j) = std::conj(path_phase(g.signal_omega(j), delay_nm));
    ei(j) = std::conj(path_phase(g.idler_omega(j), delay_nm));
  }
  // p_jl = w_j w_l |F_jl|^2, integrating to one.
  const MatrixC p = (w.asDiagonal() * f.values().cwiseAbs2() * w.asDiagonal()).cast<cplx>();
  const cplx m0 = p.sum();
  const cplx pair = es.transpose() * p * ei;                  // <e^{-i(ws+wi)dl/c}>
  const cplx ms = (es.transpose() * p).sum();                 // <e^{-i ws dl/c}>
  const cplx mi = (p * ei).sum();                             // <e^{-i wi dl/c}>
  const cplx ms_n = ms / m0, mi_n = mi / m0, pair_n = pair / m0;

  const double s = std::sin(phi1), c = std::cos(phi1);
  const double s2 = s * s, c2 = c * c;
  const cplx off = 2.0 * s2 * s2 * c2 * c2 * pair_n - s2 * c2 * c2 * c2 * ms_n * mi_n - s2 * s2 * s2 * c2 * ms_n * mi_n -
                   I * s2 * s2 * s * c2 * c * pair_n * std::conj(mi_n) + I * s2 * s2 * s2 * s * c * ms_n +
                   I * s2 * s * c2 * c2 * c * pair_n * std::conj(mi_n) - I * s * c2 * c2 * c2 * c * ms_n;

  const double d1 = c2 / 4.0 * (5.0 - 2.0 * std::cos(2 * phi1) + std::cos(4 * phi1));
  const double d2 = s2 / 4.0 * (5.0 + 2.0 * std::cos(2 * phi1) + std::cos(4 * phi1));
  const double tr = d1 + d2;

  SpatialDensityMatrix out;
  out.rho << d1 / tr, off / tr, std::conj(off) / tr, d2 / tr;
  out.phi1 = phi1;
  out.delay_nm = delay_nm;
  out.raw_trace = tr;
  return out;
}

inline double spatial_schmidt_number(const SpatialDensityMatrix& r) {
  return 1.0 / std::real((r.rho * r.rho).trace());
}

inline double closed_form_K(double phi1) {
  return 128.0 / (94.0 + 33.0 * std::cos(4 * phi1) + 2.0 * std::cos(8 * phi1) - std::cos(12 * phi1));
}

/// Two-qubit vectors over (channel of the A photon) x (channel of the B photon),
/// index 2 x_A + y_B with r (channel 1) = 0 and g (channel 2) = 1.
using TwoQubit = Eigen::Matrix<cplx, 4, 1>;
using FourQubit = Eigen::Matrix<cplx, 16, 1>;

enum class Bell { psi_plus, psi_minus, phi_plus, phi_minus };

inline TwoQubit bell_state(Bell b) {
  const double h = 1.0 / std::sqrt(2.0);
  TwoQubit v = TwoQubit::Zero();
  switch (b) {
    case Bell::psi_plus: v(1) = h, v(2) = h; break;
    case Bell::psi_minus: v(1) = h, v(2) = -h; break;
    case Bell::phi_plus: v(0) = h, v(3) = h; break;
    case Bell::phi_minus: v(0) = h, v(3) = -h; break;
  }
  return v;
}

inline FourQubit kron(const TwoQubit& a, const TwoQubit& b) {
  FourQubit v;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) v(4 * i + j) = a(i) * b(j);
  return v;
}

/// Gem state G_k^{+/-}, k = 1..8.
inline FourQubit gem_state(int k, bool plus) {
  using B = Bell;
  static constexpr std::array<std::array<B, 4>, 8> table{{
      {B::phi_plus, B::phi_plus, B::phi_minus, B::phi_minus},
      {B::psi_plus, B::psi_plus, B::psi_minus, B::psi_minus},
      {B::phi_plus, B::phi_minus, B::phi_minus, B::phi_plus},
      {B::phi_plus, B::psi_plus, B::psi_plus, B::phi_plus},
      {B::phi_plus, B::psi_minus, B::psi_minus, B::phi_plus},
      {B::phi_minus, B::psi_plus, B::psi_plus, B::phi_minus},
      {B::phi_minus, B::psi_minus, B::psi_minus, B::phi_minus},
      {B::psi_plus, B::psi_minus, B::psi_minus, B::psi_plus},
  }};
  if (k < 1 || k > 8) throw std::out_of_range("gem index must be 1..8");
  const auto& t = table[static_cast<std::size_t>(k - 1)];
  const double sign = plus ? 1.0 : -1.0;
  return (kron(bell_state(t[0]), bell_state(t[1])) + sign * kron(bell_state(t[2]), bell_state(t[3]))) / std::sqrt(2.0);
}

inline std::string gem_label(int index) {
  return "G" + std::to_string(index / 2 + 1) + (index % 2 == 0 ? "+" : "-");
}

struct BellCoefficients {
  std::array<cplx, 4> bell{};  // psi+, psi-, phi+, phi- of the two-qubit pair factor
  std::array<cplx, 16> gem{};  // G1+, G1-, G2+, ..., G8- of the squared state

  cplx on(Bell b) const { return bell[static_cast<std::size_t>(b)]; }
  cplx on_gem(int k, bool plus) const { return gem[static_cast<std::size_t>(2 * (k - 1) + (plus ? 0 : 1))]; }
};

/// Projects the pair factor (a1 A_1 + a2 A_2)(b1 B_1 + b2 B_2) onto the Bell
/// basis, and its square (both pairs in the same Schmidt modes) onto the gem basis.
inline BellCoefficients bell_decompose(const TwoModeBrackets& br) {
  TwoQubit f;
  f << br.a1 * br.b1, br.a1 * br.b2, br.a2 * br.b1, br.a2 * br.b2;
  f /= f.norm();
  BellCoefficients out;
  for (int b = 0; b < 4; ++b) out.bell[static_cast<std::size_t>(b)] = bell_state(static_cast<Bell>(b)).dot(f);
  const FourQubit ff = kron(f, f);
  for (int k = 1; k <= 8; ++k) {
    out.gem[static_cast<std::size_t>(2 * (k - 1))] = gem_state(k, true).dot(ff);
    out.gem[static_cast<std::size_t>(2 * (k - 1) + 1)] = gem_state(k, false).dot(ff);
  }
  return out;
}

inline BellCoefficients bell_decompose(const SchmidtDecomposition& d, const OpticalSetup& setup,
                                       double pump_wavelength_nm) {
  return bell_decompose(two_mode_closed_form(d, setup, pump_wavelength_nm));
}

}  // namespace hom4
