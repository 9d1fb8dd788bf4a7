#pragma once

#include <stdexcept>
#include <string>

namespace lrbgk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, inconsistent grids, unreadable input files.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// The numerical method left its domain of validity.
class NumericalError : public Error {
public:
  enum class Kind {
    velocity_overflow,
    density_positivity,
    singular_s_matrix,
    eigensolver,
  };

  NumericalError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

}  // namespace lrbgk
