#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/QR>

#include "hom4/errors.hpp"
#include "hom4/jsa.hpp"
#include "hom4/schmidt.hpp"
#include "hom4/units.hpp"

namespace hom4 {

/// Photon numbers (n1, n2) in the two spatial channels, n1 + n2 = 4.
struct DetectionPattern {
  int n1 = 2;
  int n2 = 2;

  DetectionPattern() = default;
  DetectionPattern(int a, int b) : n1(a), n2(b) {
    if (a < 0 || b < 0 || a + b != 4) throw std::invalid_argument("detection pattern must hold four photons");
  }
  bool operator==(const DetectionPattern&) const = default;
};

/// Biphoton amplitude resolved by channel:
///   sum_{c,d} M_cd(x, y) a_c^dag(x) a_d^dag(y),   M = W C W^T.
///
/// `basis` has 2N rows (channel 1 nodes, then channel 2 nodes), sqrt-weighted so
/// that quadrature overlaps are plain dot products; `coupling` is the symmetric
/// m x m core. Either the Schmidt modes (m = 2K) or the grid itself (m = 2N)
/// can serve as the factor basis.
struct ChannelAmplitude {
  FrequencyGrid grid;
  MatrixC basis;
  MatrixC coupling;

  Eigen::Index nodes() const { return basis.rows() / 2; }
  Eigen::Index rank() const { return basis.cols(); }
  auto channel(int c) const { return basis.middleRows(c * nodes(), nodes()); }

  /// Block (c, d) of the symmetrized kernel, unweighted N x N. Dense; for small grids.
  MatrixC block(int c, int d) const {
    const VectorR isw = grid.weights().cwiseSqrt().cwiseInverse();
    const MatrixC s = channel(c) * coupling * channel(d).transpose();
    return isw.asDiagonal() * s * isw.asDiagonal();
  }

  /// Applies a frequency-independent channel map V (2x2) to every photon.
  ChannelAmplitude mapped(const Mat2C& v) const {
    const Eigen::Index n = nodes();
    MatrixC b(2 * n, rank());
    b.topRows(n) = v(0, 0) * channel(0) + v(0, 1) * channel(1);
    b.bottomRows(n) = v(1, 0) * channel(0) + v(1, 1) * channel(1);
    return {grid, std::move(b), coupling};
  }

  double norm_squared() const { return (basis * coupling * basis.transpose()).squaredNorm(); }
};

/// Per-frequency single-photon map; column 0 acts on the signal, column 1 on the idler.
using TransferFn = std::function<Mat2C(double omega)>;

namespace detail {

inline void fill_columns(MatrixC& basis, const FrequencyGrid& grid, const MatrixC& modes, Eigen::Index offset,
                         int column, bool signal, const TransferFn& transfer) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const VectorR sw = grid.weights().cwiseSqrt();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Mat2C t = transfer(signal ? grid.signal_omega(j) : grid.idler_omega(j));
    for (Eigen::Index k = 0; k < modes.cols(); ++k) {
      const cplx m = sw(j) * modes(j, k);
      basis(j, offset + k) = t(0, column) * m;
      basis(n + j, offset + k) = t(1, column) * m;
    }
  }
}

inline MatrixC pair_coupling(const VectorC& weights) {
  const Eigen::Index k = weights.size();
  MatrixC c = MatrixC::Zero(2 * k, 2 * k);
  c.topRightCorner(k, k) = 0.5 * weights.asDiagonal();
  c.bottomLeftCorner(k, k) = 0.5 * weights.asDiagonal();
  return c;
}

}  // namespace detail

/// Propagates the Schmidt modes through `transfer`: basis columns are
/// T(w) u_k and T(w) v_k, coupling pairs them with sqrt(lambda_k).
inline ChannelAmplitude channel_amplitude(const SchmidtDecomposition& d, const TransferFn& transfer) {
  const auto n = static_cast<Eigen::Index>(d.grid.size());
  const Eigen::Index k = static_cast<Eigen::Index>(d.mode_count());
  MatrixC basis(2 * n, 2 * k);
  detail::fill_columns(basis, d.grid, d.signal_modes, 0, 0, true, transfer);
  detail::fill_columns(basis, d.grid, d.idler_modes, k, 1, false, transfer);
  return {d.grid, std::move(basis), detail::pair_coupling(d.coefficients.cwiseSqrt().cast<cplx>())};
}

/// Untruncated variant using grid delta functions as the factor basis (m = 2N).
inline ChannelAmplitude channel_amplitude(const JointSpectralAmplitude& jsa, const TransferFn& transfer) {
  const auto n = static_cast<Eigen::Index>(jsa.grid().size());
  const MatrixC eye = jsa.grid().weights().cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal();
  MatrixC basis(2 * n, 2 * n);
  detail::fill_columns(basis, jsa.grid(), eye, 0, 0, true, transfer);
  detail::fill_columns(basis, jsa.grid(), eye, n, 1, false, transfer);
  MatrixC c = MatrixC::Zero(2 * n, 2 * n);
  const MatrixC fw = jsa.weighted();
  c.topRightCorner(n, n) = 0.5 * fw;
  c.bottomLeftCorner(n, n) = 0.5 * fw.transpose();
  return {jsa.grid(), std::move(basis), std::move(c)};
}

/// Four-photon state (sum M a^dag a^dag)^2 |0>, kept in factored form.
///
/// The amplitude may be stored before a final channel map `output_map`
/// (the beam splitter); then the state is sector-tagged and the
/// before-map photon-number sectors can be resolved.
class FourPhotonState {
public:
  FourPhotonState(ChannelAmplitude m, const Mat2C& output_map, bool sector_tagged)
      : amp_(std::move(m)), map_(output_map), tagged_(sector_tagged) {
    for (int c = 0; c < 2; ++c)
      for (int e = 0; e < 2; ++e) gram_[2 * c + e] = amp_.channel(c).adjoint() * amp_.channel(e);
    norm_ = std::real(overlap(Mat2C::Identity()));
    if (!(norm_ > 0.0) || !std::isfinite(norm_)) throw DegenerateState("four-photon state has zero norm");
  }

  const ChannelAmplitude& amplitude() const { return amp_; }
  const Mat2C& output_map() const { return map_; }
  bool sector_tagged() const { return tagged_; }

  /// <0| B_b^2 B_a^dag^2 |0> where B_a = (V_a) B, B_b = (V_b) B and q = V_b^H V_a:
  /// 8 Tr(X)^2 + 16 Tr(X^2) with X = C G^T conj(C) G, G = sum_cc' q_cc' W_c^H W_c'.
  cplx overlap(const Mat2C& q) const {
    MatrixC g = q(0, 0) * gram_[0];
    g += q(0, 1) * gram_[1];
    g += q(1, 0) * gram_[2];
    g += q(1, 1) * gram_[3];
    const MatrixC x = amp_.coupling * g.transpose() * amp_.coupling.conjugate() * g;
    const cplx t1 = x.trace();
    const cplx t2 = (x.cwiseProduct(x.transpose())).sum();
    return 8.0 * t1 * t1 + 16.0 * t2;
  }

  /// Unnormalized squared norm <psi|psi>.
  double norm() const { return norm_; }

  /// Output-channel photon-number distribution P(n1 = 0..4) after `output_map`.
  std::array<double, 5> pattern_distribution() const {
    std::array<cplx, 5> f{};
    for (int k = 0; k < 5; ++k) f[k] = overlap(map_.adjoint() * phase_diag(alpha(k)) * map_);
    std::array<double, 5> p{};
    for (int m = 0; m < 5; ++m) {
      cplx s = 0.0;
      for (int k = 0; k < 5; ++k) s += std::polar(1.0, -m * alpha(k)) * f[k];
      p[m] = std::real(s) / (5.0 * norm_);
    }
    return p;
  }

  /// T[m][n][n'] = <sector n'| U^dag Pi_m U |sector n> / norm, where sectors are
  /// the photon numbers in channel 1 before the output map.
  using SectorTensor = std::array<std::array<std::array<cplx, 5>, 5>, 5>;
  SectorTensor sector_tensor() const {
    if (!tagged_) throw SectorUnavailable("state was not built with sector tagging");
    SectorTensor f{};
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        for (int bp = 0; bp < 5; ++bp)
          f[a][b][bp] = overlap(phase_diag(alpha(bp)).conjugate() * map_.adjoint() * phase_diag(alpha(a)) * map_ *
                                phase_diag(alpha(b)));
    SectorTensor t{};
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 5; ++n)
        for (int np = 0; np < 5; ++np) {
          cplx s = 0.0;
          for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b)
              for (int bp = 0; bp < 5; ++bp)
                s += std::polar(1.0, -(m * alpha(a) + n * alpha(b) - np * alpha(bp))) * f[a][b][bp];
          t[m][n][np] = s / (125.0 * norm_);
        }
    return t;
  }

private:
  static double alpha(int k) { return 2.0 * pi * k / 5.0; }
  static Mat2C phase_diag(double a) {
    Mat2C d = Mat2C::Identity();
    d(0, 0) = std::polar(1.0, a);
    return d;
  }

  ChannelAmplitude amp_;
  Mat2C map_;
  bool tagged_;
  std::array<MatrixC, 4> gram_;
  double norm_ = 0.0;
};

/// Squares the biphoton amplitude into the four-photon state (no output map).
inline FourPhotonState symmetric_square(const ChannelAmplitude& m) {
  if (m.norm_squared() < 1e-24) throw DegenerateState("biphoton amplitude has vanishing norm");
  return FourPhotonState(m, Mat2C::Identity(), false);
}

inline double pattern_probability(const FourPhotonState& state, const DetectionPattern& p) {
  return state.pattern_distribution()[static_cast<std::size_t>(p.n1)];
}

/// Before-map photon-number sector labels: 22 (two per channel), 4004 (all in one
/// channel) and 3113 (three-one split).
enum class Sector { s22, s4004, s3113 };

inline Sector sector_of(int n1) {
  if (n1 == 2) return Sector::s22;
  if (n1 == 0 || n1 == 4) return Sector::s4004;
  return Sector::s3113;
}

/// Contributions to one output pattern grouped by before-map sector pairs:
/// `term[a][b]` collects <b|..|a> + <a|..|b> (a != b) or <a|..|a>, real parts.
struct SectorContributions {
  std::array<std::array<double, 3>, 3> term{};
  double overlap_sum() const { return term[0][0] + term[1][1] + term[2][2]; }
  double interference(Sector a, Sector b) const { return term[static_cast<int>(a)][static_cast<int>(b)]; }
  double total() const {
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) s += term[a][b];
    return s;
  }
};

inline std::array<SectorContributions, 5> sector_amplitudes(const FourPhotonState& state) {
  const auto t = state.sector_tensor();
  std::array<SectorContributions, 5> out{};
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 5; ++n)
      for (int np = 0; np < 5; ++np) {
        int a = static_cast<int>(sector_of(n)), b = static_cast<int>(sector_of(np));
        if (a > b) std::swap(a, b);
        out[m].term[a][b] += std::real(t[m][n][np]);
      }
  return out;
}

inline SectorContributions sector_amplitudes(const FourPhotonState& state, const DetectionPattern& p) {
  return sector_amplitudes(state)[static_cast<std::size_t>(p.n1)];
}

/// Occupation-number path: each output channel gets an orthonormal basis for
/// the span of its propagated mode functions (at most m modes), the biphoton
/// becomes a small symmetric coupling matrix and the four-photon state is
/// expanded explicitly over Fock states with sqrt(n!) normalization.
class OccupationState {
public:
  static constexpr Eigen::Index max_modes = 64;

  explicit OccupationState(const ChannelAmplitude& amp, const Mat2C& output_map = Mat2C::Identity(),
                           double rank_tol = 1e-12) {
    const ChannelAmplitude out = amp.mapped(output_map);
    std::array<MatrixC, 2> coords;
    for (int c = 0; c < 2; ++c) {
      const MatrixC w = out.channel(c);
      Eigen::ColPivHouseholderQR<MatrixC> qr(w);
      qr.setThreshold(rank_tol);
      const Eigen::Index r = qr.rank();
      const MatrixC q = MatrixC(qr.householderQ()).leftCols(r);
      coords[c] = q.adjoint() * w;
      channel_modes_[c] = r;
    }
    const Eigen::Index total = channel_modes_[0] + channel_modes_[1];
    if (total > max_modes) throw std::invalid_argument("occupation path limited to 64 labeled modes");
    MatrixC y(total, out.rank());
    y.topRows(channel_modes_[0]) = coords[0];
    y.bottomRows(channel_modes_[1]) = coords[1];
    const MatrixC s = y * out.coupling * y.transpose();
    expand(s);
  }

  Eigen::Index modes_in_channel(int c) const { return channel_modes_[c]; }
  std::size_t fock_states() const { return amps_.size(); }

  std::array<double, 5> pattern_distribution() const {
    std::array<double, 5> p{};
    double total = 0.0;
    for (const auto& [key, a] : amps_) {
      const double w = std::norm(a);
      int in1 = 0;
      for (int i = 0; i < 4; ++i)
        if (((key >> (8 * i)) & 0xff) < static_cast<std::uint64_t>(channel_modes_[0])) ++in1;
      p[static_cast<std::size_t>(in1)] += w;
      total += w;
    }
    if (!(total > 0.0)) throw DegenerateState("four-photon state has zero norm");
    for (double& v : p) v /= total;
    return p;
  }

private:
  void expand(const MatrixC& s) {
    const Eigen::Index r = s.rows();
    std::unordered_map<std::uint64_t, cplx> coeff;
    // Ordered index tuples, lexicographic; each contributes to the sorted monomial.
    for (Eigen::Index a = 0; a < r; ++a)
      for (Eigen::Index b = 0; b < r; ++b) {
        const cplx sab = s(a, b);
        if (sab == 0.0) continue;
        for (Eigen::Index c = 0; c < r; ++c)
          for (Eigen::Index d = 0; d < r; ++d) {
            const cplx v = sab * s(c, d);
            if (v == 0.0) continue;
            std::array<Eigen::Index, 4> idx{a, b, c, d};
            std::sort(idx.begin(), idx.end());
            coeff[encode(idx)] += v;
          }
      }
    for (const auto& [key, c] : coeff) {
      double fact = 1.0;
      int run = 1;
      for (int i = 1; i < 4; ++i) {
        if (((key >> (8 * i)) & 0xff) == ((key >> (8 * (i - 1))) & 0xff)) {
          ++run;
          fact *= run;
        } else {
          run = 1;
        }
      }
      amps_[key] = c * std::sqrt(fact);
    }
  }

  static std::uint64_t encode(const std::array<Eigen::Index, 4>& idx) {
    std::uint64_t k = 0;
    for (int i = 0; i < 4; ++i) k |= static_cast<std::uint64_t>(idx[static_cast<std::size_t>(i)]) << (8 * i);
    return k;
  }

  std::array<Eigen::Index, 2> channel_modes_{};
  std::unordered_map<std::uint64_t, cplx> amps_;
};

}  // namespace hom4
