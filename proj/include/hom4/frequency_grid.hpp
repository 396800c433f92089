#pragma once

#include <cstddef>
#include <stdexcept>

#include "hom4/units.hpp"

namespace hom4 {

/// Uniform trapezoidal grid of detunings shared by the signal and idler axes.
///
/// Node j sits at detuning x_j = -W + 2W j/(N-1); the absolute signal and idler
/// frequencies are omega_s0 + x_j and omega_i0 + x_j. Weights sum to 2W.
class FrequencyGrid {
public:
  FrequencyGrid(std::size_t n_points, double omega_s0, double omega_i0, double half_span)
      : omega_s0_(omega_s0), omega_i0_(omega_i0), half_span_(half_span) {
    if (n_points < 3) throw std::invalid_argument("FrequencyGrid needs at least 3 nodes");
    if (!(half_span > 0.0)) throw std::invalid_argument("FrequencyGrid half-span must be positive");
    const auto n = static_cast<Eigen::Index>(n_points);
    detunings_ = VectorR::LinSpaced(n, -half_span, half_span);
    const double h = spacing();
    weights_ = VectorR::Constant(n, h);
    weights_(0) = weights_(n - 1) = 0.5 * h;
  }

  std::size_t size() const { return static_cast<std::size_t>(detunings_.size()); }
  double omega_s0() const { return omega_s0_; }
  double omega_i0() const { return omega_i0_; }
  double half_span() const { return half_span_; }
  double spacing() const { return 2.0 * half_span_ / static_cast<double>(detunings_.size() - 1); }

  const VectorR& detunings() const { return detunings_; }
  const VectorR& weights() const { return weights_; }

  double signal_omega(Eigen::Index j) const { return omega_s0_ + detunings_(j); }
  double idler_omega(Eigen::Index j) const { return omega_i0_ + detunings_(j); }

  /// Signal and idler photons share one frequency axis (needed for interference).
  bool degenerate() const { return omega_s0_ == omega_i0_; }

private:
  double omega_s0_;
  double omega_i0_;
  double half_span_;
  VectorR detunings_;
  VectorR weights_;
};

}  // namespace hom4
