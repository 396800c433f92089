#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace hom4 {

using cplx = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;
using VectorR = Eigen::VectorXd;
using Mat2C = Eigen::Matrix2cd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Speed of light in nm/ps.
inline constexpr double speed_of_light = 2.99792458e5;

/// Angular frequency (rad/ps) of light with vacuum wavelength `lambda_nm`.
constexpr double angular_frequency(double lambda_nm) { return 2.0 * pi * speed_of_light / lambda_nm; }

/// Phase e^{i w d / c} picked up over an extra optical path d (nm) at angular frequency w (rad/ps).
inline cplx path_phase(double omega, double path_nm) { return std::polar(1.0, omega * path_nm / speed_of_light); }

}  // namespace hom4
