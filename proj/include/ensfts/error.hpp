#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ensfts {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad shapes, out-of-range parameters).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Iterative routine did not converge within its cap.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// All training points collapse to a single point in kernel feature space.
class DegenerateEmbedding : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t row, std::string column)
      : Error(what), row_(row), column_(std::move(column)) {}

  /// 1-based data row (header excluded); 0 when the error is not tied to a row.
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace ensfts
