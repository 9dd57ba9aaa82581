#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stinla {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy. InputError maps to CLI exit code 1, NumericalError to 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};

struct InvalidMatrix : InputError {
  using InputError::InputError;
};
struct InvalidSize : InputError {
  using InputError::InputError;
};
struct InvalidGraph : InputError {
  using InputError::InputError;
};
struct InvalidData : InputError {
  using InputError::InputError;
};
struct ParseError : InputError {
  using InputError::InputError;
};
struct DegenerateParams : InputError {
  using InputError::InputError;
};
struct Unsupported : InputError {
  using InputError::InputError;
};
// Declared rank deficiency disagrees with the numerically observed one.
struct RankMismatch : InputError {
  using InputError::InputError;
};

struct NumericalFailure : NumericalError {
  using NumericalError::NumericalError;
};
struct NotConverged : NumericalError {
  NotConverged(const std::string& what, Vector last) : NumericalError(what), last_iterate(std::move(last)) {}
  explicit NotConverged(const std::string& what) : NumericalError(what) {}
  Vector last_iterate;
};

}  // namespace stinla
