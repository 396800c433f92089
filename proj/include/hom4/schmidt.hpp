#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

#include "hom4/errors.hpp"
#include "hom4/jsa.hpp"

namespace hom4 {

/// Schmidt decomposition F(w_s, w_i) = sum_k sqrt(lambda_k) u_k(w_s) v_k(w_i).
///
/// Mode functions are stored as grid samples (not sqrt-weighted), orthonormal
/// under the grid quadrature. Coefficients are renormalized over the retained
/// modes; `raw_coefficients` keeps the untruncated spectrum.
struct SchmidtDecomposition {
  FrequencyGrid grid;
  VectorR coefficients;      // lambda_k, descending, sum 1 over retained modes
  VectorR raw_coefficients;  // all singular values squared of the normalized JSA
  MatrixC signal_modes;      // N x K, column k is u_k
  MatrixC idler_modes;       // N x K, column k is v_k
  double tail_weight = 0.0;  // sum of discarded raw lambda_k
  double residual = 0.0;     // || F - reconstruct() || in quadrature norm

  std::size_t mode_count() const { return static_cast<std::size_t>(coefficients.size()); }

  /// sqrt(w) u_k: columns orthonormal in the Euclidean inner product.
  MatrixC weighted_signal_modes() const { return grid.weights().cwiseSqrt().asDiagonal() * signal_modes; }
  MatrixC weighted_idler_modes() const { return grid.weights().cwiseSqrt().asDiagonal() * idler_modes; }
};

struct SchmidtOptions {
  std::size_t max_modes = 40;
  double tail_tol = 1e-6;
};

/// Dense SVD of the sqrt-weighted JSA. Truncates once the cumulative weight
/// reaches 1 - tail_tol or max_modes modes are kept.
inline SchmidtDecomposition decompose(const JointSpectralAmplitude& jsa, const SchmidtOptions& opts = {}) {
  if (opts.max_modes == 0) throw std::invalid_argument("max_modes must be positive");
  const JointSpectralAmplitude f = jsa.is_normalized() ? jsa : jsa.normalized();
  const MatrixC a = f.weighted();

  Eigen::BDCSVD<MatrixC> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceFailure("SVD of the joint spectral amplitude did not converge");
  const VectorR sigma = svd.singularValues();
  if (!sigma.allFinite()) throw ConvergenceFailure("SVD produced non-finite singular values");

  const VectorR lambda_all = sigma.array().square().matrix() / sigma.squaredNorm();
  const Eigen::Index total = lambda_all.size();
  Eigen::Index keep = 0;
  double cumulative = 0.0;
  while (keep < total && keep < static_cast<Eigen::Index>(opts.max_modes)) {
    cumulative += lambda_all(keep++);
    if (cumulative >= 1.0 - opts.tail_tol) break;
  }

  const VectorR inv_sw = f.grid().weights().cwiseSqrt().cwiseInverse();
  MatrixC u = inv_sw.asDiagonal() * svd.matrixU().leftCols(keep);
  MatrixC v = inv_sw.asDiagonal() * svd.matrixV().leftCols(keep).conjugate();

  // Largest-magnitude sample of u_k real positive; v_k takes the inverse phase.
  for (Eigen::Index k = 0; k < keep; ++k) {
    Eigen::Index idx = 0;
    u.col(k).cwiseAbs().maxCoeff(&idx);
    const cplx phase = u(idx, k) / std::abs(u(idx, k));
    u.col(k) /= phase;
    v.col(k) *= phase;
  }

  SchmidtDecomposition d{f.grid(), {}, lambda_all, std::move(u), std::move(v)};
  const double retained = lambda_all.head(keep).sum();
  d.coefficients = lambda_all.head(keep) / retained;
  d.tail_weight = std::max(0.0, 1.0 - retained);
  d.residual = std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(retained)));
  return d;
}

/// 1 / sum_k lambda_k^2 over the retained (renormalized) coefficients.
inline double spectral_schmidt_number(const SchmidtDecomposition& d) {
  return 1.0 / d.coefficients.squaredNorm();
}

inline double spectral_schmidt_number(const std::vector<double>& lambdas) {
  double s = 0.0, q = 0.0;
  for (double l : lambdas) {
    s += l;
    q += l * l;
  }
  if (!(q > 0.0)) throw std::invalid_argument("empty Schmidt spectrum");
  return s * s / q;
}

/// sum_k sqrt(lambda_k) u_k(w_s) v_k(w_i) with the retained coefficients.
inline JointSpectralAmplitude reconstruct(const SchmidtDecomposition& d) {
  const VectorR s = d.coefficients.cwiseSqrt();
  MatrixC f = d.signal_modes * s.asDiagonal() * d.idler_modes.transpose();
  return JointSpectralAmplitude(d.grid, std::move(f)).normalized();
}

enum class Branch { signal, idler };

/// S_jk(dl) = sum_grid w conj(m_j) e^{i w dl/c} m_k for the signal or idler modes.
inline MatrixC delay_overlap(const SchmidtDecomposition& d, double delay_nm, Branch branch) {
  const auto n = static_cast<Eigen::Index>(d.grid.size());
  const MatrixC& modes = branch == Branch::signal ? d.signal_modes : d.idler_modes;
  VectorC phase(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w = branch == Branch::signal ? d.grid.signal_omega(j) : d.grid.idler_omega(j);
    phase(j) = d.grid.weights()(j) * path_phase(w, delay_nm);
  }
  return modes.adjoint() * phase.asDiagonal() * modes;
}

}  // namespace hom4
