#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace l1prune {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix dimensions or indivisible group widths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A scalar argument outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by an iterative method.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// The reference coordinate-descent solver did not reach its tolerance.
class OracleError : public Error {
 public:
  using Error::Error;
};

// Invalid wiring inside a pruning unit.
class GraphError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data. `offset` is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  // Message without the offset suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

}  // namespace l1prune
