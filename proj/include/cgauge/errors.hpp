#pragma once

#include <stdexcept>
#include <string>

namespace cgauge {

/// Invalid or incomplete configuration. `key` names the offending entry when
/// the error came from a config file.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Closed-form operation asked to handle a configuration it cannot describe
/// (e.g. sensor and gas out of thermal equilibrium).
class UnsupportedConfiguration : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Quadrature or iterative solver failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
  NumericError(const std::string& what, double achieved_tolerance = 0.0)
      : std::runtime_error(what), achieved_(achieved_tolerance) {}
  double achieved_tolerance() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Inversion whose answer is dominated by round-off or extrapolation.
class IllConditioned : public NumericError {
public:
  using NumericError::NumericError;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace cgauge
