#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "hom4/errors.hpp"

namespace hom4 {

/// Expected coincidence rates far from zero delay.
struct ExpectedCounts {
  double c_abcd = 0.0;  // fourfold
  double c_abc = 0.0;   // threefold, two detectors in one channel and one in the other
};

/// Each of the four detectors sits behind a loss beam splitter of transmission eta.
inline ExpectedCounts forward_counts(double eta, double n4, double p22, double p13) {
  const double e4 = std::pow(eta, 4), e3 = std::pow(eta, 3);
  return {0.25 * e4 * n4 * p22,
          n4 * (e4 * (0.375 * p13 + 0.125 * p22) + e3 * (1.0 - eta) * (0.25 * p13 + 0.25 * p22))};
}

struct CalibrationResult {
  double eta = 0.0;
  double n4 = 0.0;
  double residual = 0.0;  // largest relative mismatch of the forward model against the input counts
};

/// One labeled rate: combo is a detector set such as "ABCD" or "ABC"; region is
/// "far" (beyond the coherence envelope) or "peak".
struct CountEntry {
  std::string combo;
  std::string region;
  double rate = 0.0;
};

struct CountRecord {
  std::vector<CountEntry> entries;

  /// Mean rate over entries with the given region and number of clicking detectors.
  double mean_rate(const std::string& region, std::size_t fold) const {
    double s = 0.0;
    int n = 0;
    for (const auto& e : entries)
      if (e.region == region && e.combo.size() == fold) s += e.rate, ++n;
    return n > 0 ? s / n : 0.0;
  }
  std::vector<double> rates(const std::string& region, std::size_t fold) const {
    std::vector<double> v;
    for (const auto& e : entries)
      if (e.region == region && e.combo.size() == fold) v.push_back(e.rate);
    return v;
  }
};

/// Reads `combo,region,rate` rows (header required).
inline CountRecord read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("counts file is empty");
  if (line.rfind("combo,region,rate", 0) != 0) throw IoError("counts header must be: combo,region,rate");
  CountRecord rec;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    CountEntry e;
    std::string rate;
    if (!std::getline(ss, e.combo, ',') || !std::getline(ss, e.region, ',') || !std::getline(ss, rate))
      throw IoError("counts line " + std::to_string(lineno) + ": expected three fields");
    if (e.combo.empty() || e.combo.find_first_not_of("ABCD") != std::string::npos || e.combo.size() < 3)
      throw IoError("counts line " + std::to_string(lineno) + ": combo must be three or four of A, B, C, D");
    if (e.region != "far" && e.region != "peak")
      throw IoError("counts line " + std::to_string(lineno) + ": region must be far or peak");
    try {
      std::size_t pos = 0;
      e.rate = std::stod(rate, &pos);
      if (pos != rate.size()) throw std::invalid_argument(rate);
    } catch (const std::exception&) {
      throw IoError("counts line " + std::to_string(lineno) + ": bad rate '" + rate + "'");
    }
    if (!(e.rate >= 0.0)) throw IoError("counts line " + std::to_string(lineno) + ": rates must be non-negative");
    rec.entries.push_back(std::move(e));
  }
  return rec;
}

inline CountRecord read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open counts file " + path);
  return read_counts_csv(in);
}

/// Solves the fourfold/threefold pair for (eta, N4). N4 drops out of the rate
/// ratio, which is strictly increasing in eta, so a bracketed root on (0, 1] is unique.
inline CalibrationResult estimate(double c_abcd, double c_abc, double p22, double p13) {
  if (!(c_abcd > 0.0) || !(c_abc > 0.0)) throw DegenerateCounts("fourfold and threefold counts must be positive");
  if (!(p22 > 0.0) || !(p13 >= 0.0)) throw std::invalid_argument("theoretical probabilities must be positive");
  const double target = c_abcd / c_abc;
  auto ratio = [&](double eta) {
    const ExpectedCounts c = forward_counts(eta, 1.0, p22, p13);
    return c.c_abcd / c.c_abc;
  };
  const double r_max = ratio(1.0);
  double eta = 1.0;
  if (target > r_max * (1.0 + 1e-12)) throw NoSolution("count ratio exceeds the lossless bound");
  if (target < r_max * (1.0 - 1e-15)) {
    std::uintmax_t iters = 200;
    auto f = [&](double e) { return e <= 0.0 ? -target : ratio(e) - target; };
    const auto [lo, hi] =
        boost::math::tools::toms748_solve(f, 0.0, 1.0, -target, r_max - target,
                                          [](double a, double b) { return std::abs(b - a) <= 1e-14; }, iters);
    eta = 0.5 * (lo + hi);
  }
  CalibrationResult r;
  r.eta = eta;
  r.n4 = 4.0 * c_abcd / (std::pow(eta, 4) * p22);
  const ExpectedCounts back = forward_counts(r.eta, r.n4, p22, p13);
  r.residual = std::max(std::abs(back.c_abcd - c_abcd) / c_abcd, std::abs(back.c_abc - c_abc) / c_abc);
  return r;
}

inline CalibrationResult estimate(const CountRecord& rec, double p22, double p13) {
  return estimate(rec.mean_rate("far", 4), rec.mean_rate("far", 3), p22, p13);
}

struct PeakProbability {
  double p22 = 0.0;
  bool out_of_range = false;  // > 1 signals a model mismatch
};

/// P22 at a peak from fourfold counts, averaged over the supplied detector combinations.
inline PeakProbability normalize_peak(const std::vector<double>& c_abcd_peak, const CalibrationResult& cal) {
  if (c_abcd_peak.empty()) throw DegenerateCounts("no peak counts supplied");
  double s = 0.0;
  for (double c : c_abcd_peak) s += 4.0 * c / (std::pow(cal.eta, 4) * cal.n4);
  const double p = s / static_cast<double>(c_abcd_peak.size());
  return {p, p > 1.0};
}

inline PeakProbability normalize_peak(double c_abcd_peak, const CalibrationResult& cal) {
  return normalize_peak(std::vector<double>{c_abcd_peak}, cal);
}

}  // namespace hom4
