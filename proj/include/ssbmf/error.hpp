#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssbmf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user-supplied parameters (k > r, zero dimensions, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An inclusion-exclusion entry fell outside {0..k}; usually m is too small
/// for the union sizes to be inverted reliably.
class InconsistencyError : public Error {
 public:
  InconsistencyError(std::size_t a, std::size_t b, std::size_t c, long value)
      : Error("inconsistent tensor entry T(" + std::to_string(a) + "," + std::to_string(b) + "," +
              std::to_string(c) + ") = " + std::to_string(value)),
        a(a), b(b), c(c), value(value) {}
  std::size_t a, b, c;
  long value;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class RoundingError : public Error {
 public:
  RoundingError(std::size_t index, double margin)
      : Error("rounding failed at index " + std::to_string(index) + " (distance " +
              std::to_string(margin) + " from {0,1})"),
        index(index), margin(margin) {}
  std::size_t index;
  double margin;
};

/// A non-anchor row could not be read off the anchor block.
class ExtensionError : public Error {
 public:
  ExtensionError(std::size_t row, const std::string& why)
      : Error("row " + std::to_string(row) + ": " + why), row(row) {}
  std::size_t row;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssbmf
