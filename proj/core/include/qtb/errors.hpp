#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qtb {

/// Invalid physical input or out-of-range argument.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration / file contents.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Input data cannot constrain the requested model (rank deficient,
/// no dip/peak present, missing settings, zero totals, ...).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative fit failed to converge; carries the best parameters seen.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<double> best_params)
      : std::runtime_error(what), best_params_(std::move(best_params)) {}
  const std::vector<double>& best_params() const { return best_params_; }

 private:
  std::vector<double> best_params_;
};

}  // namespace qtb
