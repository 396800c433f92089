#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hom4 {

/// Base of every numeric failure raised by the library (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GridTooCoarse : public NumericError {
public:
  using NumericError::NumericError;
};

class ConvergenceFailure : public NumericError {
public:
  using NumericError::NumericError;
};

class DegenerateState : public NumericError {
public:
  using NumericError::NumericError;
};

class SectorUnavailable : public NumericError {
public:
  using NumericError::NumericError;
};

class MultimodeInput : public NumericError {
public:
  using NumericError::NumericError;
};

class FlatSignal : public NumericError {
public:
  using NumericError::NumericError;
};

class NoSolution : public NumericError {
public:
  using NumericError::NumericError;
};

class DegenerateCounts : public NumericError {
public:
  using NumericError::NumericError;
};

/// A sweep point failed; carries the offending delay.
class SweepPointError : public NumericError {
public:
  SweepPointError(double delay_nm, const std::string& what)
      : NumericError("at delay " + std::to_string(delay_nm) + " nm: " + what), delay_nm_(delay_nm) {}
  double delay_nm() const noexcept { return delay_nm_; }

private:
  double delay_nm_;
};

/// Configuration problem (CLI exit code 2). Line is 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, int line, const std::string& what)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + " [" + key + "]: " + what
                                    : "config [" + key + "]: " + what),
        key_(std::move(key)),
        line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

private:
  std::string key_;
  int line_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace hom4
