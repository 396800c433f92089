#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hom4/errors.hpp"
#include "hom4/interferometer.hpp"

namespace hom4 {

/// Columns of a sweep row, in CSV order after delay_nm.
enum class Column { p22, p3113, p1331, p4004, p0440, sum };

inline const char* column_name(Column c) {
  switch (c) {
    case Column::p22: return "p22";
    case Column::p3113: return "p3113";
    case Column::p1331: return "p1331";
    case Column::p4004: return "p4004";
    case Column::p0440: return "p0440";
    case Column::sum: return "sum";
  }
  return "?";
}

struct SweepRow {
  double delay_nm = 0.0;
  double p22 = 0.0, p3113 = 0.0, p1331 = 0.0, p4004 = 0.0, p0440 = 0.0, sum = 0.0;

  double get(Column c) const {
    switch (c) {
      case Column::p22: return p22;
      case Column::p3113: return p3113;
      case Column::p1331: return p1331;
      case Column::p4004: return p4004;
      case Column::p0440: return p0440;
      case Column::sum: return sum;
    }
    return 0.0;
  }

  /// n1 = photons in channel 1: P(3,1) is p3113, P(1,3) is p1331.
  static SweepRow from_distribution(double delay_nm, const std::array<double, 5>& p) {
    return {delay_nm, p[2], p[3], p[1], p[4], p[0], p[0] + p[1] + p[2] + p[3] + p[4]};
  }
};

struct SweepCurve {
  OpticalSetup setup;  // template; delay_nm varies per row
  std::vector<SweepRow> rows;

  std::vector<double> column(Column c) const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.get(c));
    return v;
  }
  std::vector<double> delays() const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.delay_nm);
    return v;
  }
};

/// Delays start, start + step, ... strictly below stop (plus stop itself when
/// `include_stop` and it lies on the lattice).
inline std::vector<double> delay_grid(double start, double stop, double step, bool include_stop = true) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start)
    throw std::invalid_argument("delay range must be finite with step > 0 and stop >= start");
  const double span = (stop - start) / step;
  auto n = static_cast<std::size_t>(std::floor(span + 1e-9));
  const bool on_lattice = std::abs(span - std::round(span)) < 1e-9;
  if (include_stop || !on_lattice) ++n;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = start + static_cast<double>(i) * step;
  return d;
}

namespace detail {

/// Runs f(i) for i in [0, n) on up to `threads` workers; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Pattern probabilities at each delay. Rows come back in delay order whatever
/// the thread count; a failing point raises SweepPointError naming its delay.
inline SweepCurve sweep(const SchmidtDecomposition& d, const OpticalSetup& setup, const std::vector<double>& delays,
                        unsigned threads = 0) {
  for (std::size_t i = 1; i < delays.size(); ++i)
    if (!(delays[i] > delays[i - 1])) throw std::invalid_argument("sweep delays must be strictly increasing");
  SweepCurve curve{setup, std::vector<SweepRow>(delays.size())};
  detail::parallel_for(delays.size(), threads, [&](std::size_t i) {
    OpticalSetup s = setup;
    s.delay_nm = delays[i];
    try {
      curve.rows[i] = SweepRow::from_distribution(delays[i], output_state(d, s).pattern_distribution());
    } catch (const std::exception& e) {
      throw SweepPointError(delays[i], e.what());
    }
  });
  return curve;
}

inline SweepCurve sweep(const SchmidtDecomposition& d, const OpticalSetup& setup, double start, double stop,
                        double step, unsigned threads = 0) {
  return sweep(d, setup, delay_grid(start, stop, step), threads);
}

struct PeriodEstimate {
  double period_nm = 0.0;
  double bin = 0.0;           // interpolated spectral bin of the dominant line
  double period_low_nm = 0.0;  // period at bin + 1
  double period_high_nm = 0.0;  // period at bin - 1 (infinite for bin <= 1)
  double visibility = 0.0;    // (max - min)/(max + min) over one period around the center
};

/// Dominant period of a uniformly sampled column: largest nonzero bin of the
/// mean-subtracted spectrum, refined by parabolic interpolation of |X|.
inline PeriodEstimate oscillation_period(const std::vector<double>& delays, const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 8 || delays.size() != n) throw std::invalid_argument("need at least 8 uniformly spaced samples");
  const double step = delays[1] - delays[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((delays[i] - delays[i - 1]) - step) > 1e-6 * std::abs(step))
      throw std::invalid_argument("oscillation_period needs a uniform delay grid");

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = values[i] - mean;
    var += x[i] * x[i];
  }
  var /= static_cast<double>(n);
  if (var < 1e-12) throw FlatSignal("column variance below 1e-12");

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, x);
  const std::size_t half = n / 2;
  std::size_t k = 1;
  for (std::size_t j = 2; j <= half; ++j)
    if (std::abs(spec[j]) > std::abs(spec[k])) k = j;

  double kf = static_cast<double>(k);
  if (k > 1 && k < half) {
    const double a = std::abs(spec[k - 1]), b = std::abs(spec[k]), c = std::abs(spec[k + 1]);
    const double den = a - 2.0 * b + c;
    if (den != 0.0) kf += 0.5 * (a - c) / den;
  }
  const double length = step * static_cast<double>(n);
  PeriodEstimate est;
  est.bin = kf;
  est.period_nm = length / kf;
  est.period_low_nm = length / (kf + 1.0);
  est.period_high_nm = kf > 1.0 ? length / (kf - 1.0) : std::numeric_limits<double>::infinity();

  const auto samples = static_cast<std::size_t>(std::clamp(std::round(est.period_nm / step), 1.0, double(n)));
  const std::size_t lo = (n - std::min(n, samples)) / 2;
  const auto [mn, mx] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(lo),
                                            values.begin() + static_cast<std::ptrdiff_t>(lo + std::min(n, samples)));
  est.visibility = (*mx + *mn) > 0.0 ? (*mx - *mn) / (*mx + *mn) : 0.0;
  return est;
}

inline PeriodEstimate oscillation_period(const SweepCurve& curve, Column c) {
  return oscillation_period(curve.delays(), curve.column(c));
}

/// Local maxima whose topographic prominence is at least `prominence`.
inline std::vector<double> peak_locations(const std::vector<double>& delays, const std::vector<double>& values,
                                          double prominence = 0.05) {
  const std::size_t n = values.size();
  if (n < 3 || delays.size() != n) throw std::invalid_argument("need at least 3 samples");
  double lo = values[0], hi = values[0];
  for (double v : values) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi - lo < 1e-6) throw FlatSignal("column is flat");

  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(values[i] > values[i - 1] && values[i] >= values[i + 1])) continue;
    double left = values[i];
    for (std::size_t j = i; j-- > 0;) {
      if (values[j] > values[i]) break;
      left = std::min(left, values[j]);
    }
    double right = values[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (values[j] > values[i]) break;
      right = std::min(right, values[j]);
    }
    if (values[i] - std::max(left, right) >= prominence) peaks.push_back(delays[i]);
  }
  return peaks;
}

inline std::vector<double> peak_locations(const SweepCurve& curve, Column c, double prominence = 0.05) {
  return peak_locations(curve.delays(), curve.column(c), prominence);
}

/// Per-pattern comparison of "overlapping terms" (each before-BS sector
/// propagated alone, probabilities summed) against the full interference result.
struct InterferenceRow {
  double delay_nm = 0.0;
  // Indexed by n1 = 0..4.
  std::array<SectorContributions, 5> patterns{};

  double overlap(int n1) const { return patterns[static_cast<std::size_t>(n1)].overlap_sum(); }
  double interference(int n1) const { return patterns[static_cast<std::size_t>(n1)].total(); }
};

inline std::vector<InterferenceRow> interference_report(const SchmidtDecomposition& d, const OpticalSetup& setup,
                                                        const std::vector<double>& delays, unsigned threads = 0) {
  std::vector<InterferenceRow> rows(delays.size());
  detail::parallel_for(delays.size(), threads, [&](std::size_t i) {
    OpticalSetup s = setup;
    s.delay_nm = delays[i];
    try {
      rows[i] = {delays[i], sector_amplitudes(output_state(d, s))};
    } catch (const std::exception& e) {
      throw SweepPointError(delays[i], e.what());
    }
  });
  return rows;
}

}  // namespace hom4
