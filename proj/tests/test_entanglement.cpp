#include <cmath>

#include <gtest/gtest.h>

#include "hom4/entanglement.hpp"

using namespace hom4;

namespace {

const double h = 1.0 / std::sqrt(2.0);

JointSpectralAmplitude fig3_jsa(std::size_t n = 128) {
  const PumpConfig pump;
  const DispersionModel disp = symmetric_gvm_model();
  return build_jsa(make_grid(pump, disp, n), pump, disp);
}

SchmidtDecomposition narrow_pair() {
  const double w0 = angular_frequency(1532.0);
  const FrequencyGrid g(64, w0, w0, 0.3);
  return decompose(JointSpectralAmplitude::from_function(g, [w0](double ws, double wi) {
    return std::exp(-((ws - w0) * (ws - w0) + (wi - w0) * (wi - w0)) / (2 * 0.05 * 0.05));
  }));
}

OpticalSetup bell_setup(double delay_nm) {
  OpticalSetup s;
  s.phi1 = pi / 4;
  s.theta = 0.0;
  s.delay_nm = delay_nm;
  return s;
}

void expect_bell(const BellCoefficients& b, cplx psi_p, cplx psi_m, cplx phi_p, cplx phi_m) {
  EXPECT_LT(std::abs(b.on(Bell::psi_plus) - psi_p), 1e-9);
  EXPECT_LT(std::abs(b.on(Bell::psi_minus) - psi_m), 1e-9);
  EXPECT_LT(std::abs(b.on(Bell::phi_plus) - phi_p), 1e-9);
  EXPECT_LT(std::abs(b.on(Bell::phi_minus) - phi_m), 1e-9);
}

}  // namespace

TEST(SchmidtNumber, ClosedFormExamples) {
  EXPECT_NEAR(closed_form_K(0.0), 1.0, 1e-12);
  EXPECT_NEAR(closed_form_K(pi / 4), 2.0, 1e-12);
  EXPECT_NEAR(closed_form_K(pi / 8), 128.0 / 92.0, 1e-12);
}

TEST(DensityMatrix, ProductStateAtZeroRotation) {
  const auto r = reduced_density_matrix(fig3_jsa(), 0.0, 0.0);
  EXPECT_LT((r.rho - (Mat2C() << 1, 0, 0, 0).finished()).norm(), 1e-12);
  EXPECT_NEAR(spatial_schmidt_number(r), 1.0, 1e-12);
}

TEST(DensityMatrix, OffDiagonalAtZeroDelay) {
  // g = m_s = m_i = 1: A = -s^2 c^2 cos^2(2 phi) - i s c cos(2 phi)(s^4 + c^4).
  const double phi = pi / 8;
  const double s = std::sin(phi), c = std::cos(phi);
  const cplx a(-s * s * c * c * std::pow(std::cos(2 * phi), 2),
               -s * c * std::cos(2 * phi) * (std::pow(s, 4) + std::pow(c, 4)));
  const auto r = reduced_density_matrix(fig3_jsa(), phi, 0.0);
  EXPECT_LT(std::abs(r.rho(0, 1) - a), 1e-12);
  EXPECT_NEAR(2 * std::norm(r.rho(0, 1)), 0.078125, 1e-12);
  EXPECT_NEAR(r.raw_trace, 1.0, 1e-12);
  EXPECT_NEAR(spatial_schmidt_number(r), 128.0 / 92.0, 1e-12);
}

TEST(DensityMatrix, ClosedFormAgreesOverRotationAngles) {
  const auto f = fig3_jsa();
  for (int k = 0; k < 64; ++k) {
    const double phi = (pi / 2) * k / 63.0;
    EXPECT_NEAR(spatial_schmidt_number(reduced_density_matrix(f, phi, 0.0)), closed_form_K(phi), 1e-6) << phi;
  }
}

TEST(DensityMatrix, MomentsMatchDirectQuadrature) {
  // Independent evaluation of the three frequency averages entering the off-diagonal.
  const auto f = fig3_jsa(96);
  const auto& g = f.grid();
  const double dl = 5000.0, phi = 0.3;
  cplx pair = 0.0, ms = 0.0, mi = 0.0;
  double tot = 0.0;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(g.size()); ++j)
    for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(g.size()); ++l) {
      const double p = g.weights()(j) * g.weights()(l) * std::norm(f.values()(j, l));
      const double ps = -g.signal_omega(j) * dl / speed_of_light, pi_ = -g.idler_omega(l) * dl / speed_of_light;
      pair += p * std::polar(1.0, ps + pi_);
      ms += p * std::polar(1.0, ps);
      mi += p * std::polar(1.0, pi_);
      tot += p;
    }
  pair /= tot, ms /= tot, mi /= tot;
  const double s = std::sin(phi), c = std::cos(phi);
  const cplx a = 2 * std::pow(s * c, 4) * pair - (std::pow(s, 2) * std::pow(c, 6) + std::pow(s, 6) * std::pow(c, 2)) * ms * mi -
                 I * std::pow(s, 5) * std::pow(c, 3) * pair * std::conj(mi) + I * std::pow(s, 7) * c * ms +
                 I * std::pow(s, 3) * std::pow(c, 5) * pair * std::conj(mi) - I * s * std::pow(c, 7) * ms;
  const auto r = reduced_density_matrix(f, phi, dl);
  EXPECT_LT(std::abs(r.rho(0, 1) - a / r.raw_trace), 1e-12);
}

TEST(DensityMatrix, IsAValidState) {
  const auto f = fig3_jsa();
  for (double phi : {0.1, 0.5, 1.2})
    for (double dl : {0.0, 200.0, 30000.0}) {
      const auto r = reduced_density_matrix(f, phi, dl);
      EXPECT_NEAR(std::real(r.rho.trace()), 1.0, 1e-12);
      EXPECT_LT((r.rho - r.rho.adjoint()).norm(), 1e-14);
      Eigen::SelfAdjointEigenSolver<Mat2C> es(r.rho);
      EXPECT_GE(es.eigenvalues()(0), -1e-12);
      const double k = spatial_schmidt_number(r);
      EXPECT_GE(k, 1.0 - 1e-12);
      EXPECT_LE(k, 2.0 + 1e-12);
    }
}

TEST(DensityMatrix, MaximalAlongQuarterPiForAllPhases) {
  const auto f = fig3_jsa();
  for (int b = 0; b <= 8; ++b) {
    const double dl = 766.0 * b / 8.0;  // phase 0..2 pi
    EXPECT_NEAR(spatial_schmidt_number(reduced_density_matrix(f, pi / 4, dl)), 2.0, 1e-6);
    EXPECT_LT(spatial_schmidt_number(reduced_density_matrix(f, pi / 8, dl)), 2.0 - 1e-3);
  }
}

TEST(Bell, BasisAndGemAreOrthonormal) {
  Eigen::Matrix<cplx, 4, 4> b;
  for (int i = 0; i < 4; ++i) b.col(i) = bell_state(static_cast<Bell>(i));
  EXPECT_LT((b.adjoint() * b - Eigen::Matrix<cplx, 4, 4>::Identity()).norm(), 1e-14);
  Eigen::Matrix<cplx, 16, 16> g;
  for (int k = 1; k <= 8; ++k) {
    g.col(2 * (k - 1)) = gem_state(k, true);
    g.col(2 * (k - 1) + 1) = gem_state(k, false);
  }
  EXPECT_LT((g.adjoint() * g - Eigen::Matrix<cplx, 16, 16>::Identity()).norm(), 1e-13);
  EXPECT_EQ(gem_label(0), "G1+");
  EXPECT_EQ(gem_label(15), "G8-");
  EXPECT_THROW(gem_state(9, true), std::out_of_range);
}

TEST(Bell, ZeroDelayFactor) {
  expect_bell(bell_decompose(narrow_pair(), bell_setup(0.0), 766.0), 0.0, -I * h, h, 0.0);
}

TEST(Bell, OnePumpWavelengthDelay) {
  expect_bell(bell_decompose(narrow_pair(), bell_setup(766.0), 766.0), 0.0, I * h, h, 0.0);
}

TEST(Bell, HalfAndThreeHalfWavelengthDelays) {
  expect_bell(bell_decompose(narrow_pair(), bell_setup(383.0), 766.0), 0.0, h, 0.0, h);
  expect_bell(bell_decompose(narrow_pair(), bell_setup(1149.0), 766.0), 0.0, -h, 0.0, h);
}

TEST(Bell, GemExpansionAtZeroDelay) {
  const auto b = bell_decompose(narrow_pair(), bell_setup(0.0), 766.0);
  const double q = 1.0 / (2.0 * std::sqrt(2.0));
  std::array<cplx, 16> want{};
  want[0] = q;          // G1+
  want[1] = q;          // G1-
  want[2] = -q;         // G2+
  want[3] = q;          // G2-
  want[8] = -I * h;     // G5+
  double norm = 0.0;
  for (int i = 0; i < 16; ++i) {
    EXPECT_LT(std::abs(b.gem[static_cast<std::size_t>(i)] - want[static_cast<std::size_t>(i)]), 1e-9) << gem_label(i);
    norm += std::norm(b.gem[static_cast<std::size_t>(i)]);
  }
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(Bell, ThreeOneSectorCarriesTheG5Weight) {
  // The gem picture labels the two photons of a pair; the sector weight matches it
  // when signal and idler are spectrally distinguishable. For identical modes the
  // three-one terms cancel by bosonic interference instead.
  const double w0 = angular_frequency(1532.0);
  const FrequencyGrid g(96, w0, w0, 1.0);
  const auto labeled = decompose(JointSpectralAmplitude::from_function(g, [w0](double ws, double wi) {
    const double x = ws - w0 + 0.5, y = wi - w0 - 0.5;
    return std::exp(-(x * x + y * y) / (2 * 0.05 * 0.05));
  }));
  const auto b = bell_decompose(labeled, bell_setup(0.0), 766.0);
  EXPECT_NEAR(std::norm(b.on_gem(5, true)), 0.5, 1e-9);
  EXPECT_NEAR(before_bs_state(labeled, bell_setup(0.0)).norm3113, 0.5, 1e-6);
  EXPECT_LT(before_bs_state(narrow_pair(), bell_setup(0.0)).norm3113, 1e-12);
}

TEST(Bell, MultimodeSourceIsRejected) {
  const auto d = decompose(fig3_jsa());
  EXPECT_THROW(bell_decompose(d, bell_setup(0.0), 766.0), MultimodeInput);
}
