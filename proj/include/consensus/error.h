#ifndef CONSENSUS_ERROR_H_
#define CONSENSUS_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace consensus {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched or unsupported point dimension / agent count.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Profile outside the declared domain of a map (e.g. non-positive input to a
// geometric mean).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Parameter outside its documented range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A matrix that is not row-stochastic; row() is the first offending row.
class NotStochasticError : public InvalidArgument {
 public:
  NotStochasticError(std::size_t row, const std::string& what)
      : InvalidArgument(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Hull inclusion conv y(f(x)) ⊂ conv y(x) failed where it was required.
class InclusionViolation : public Error {
 public:
  using Error::Error;
};

// Scenario / matrix file could not be parsed; where() names the line or field.
class ParseError : public Error {
 public:
  ParseError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace consensus

#endif  // CONSENSUS_ERROR_H_
