#ifndef WELDOPT_ERROR_HPP
#define WELDOPT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace weldopt {

/// Base of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the operation's domain (bad k, empty input, arity mismatch).
class argument_error : public error {
 public:
  using error::error;
};

/// A value is outside the mathematical domain of a formula (log of a non-positive number, f < 0).
class domain_error : public error {
 public:
  using error::error;
};

/// CSV header does not match the expected column set.
class schema_error : public error {
 public:
  using error::error;
};

/// A CSV cell could not be read as a decimal number.
class parse_error : public error {
 public:
  parse_error(const std::string& what, std::size_t row, std::size_t column)
      : error(what), row_(row), column_(column) {}

  /// 1-based data row (header excluded).
  std::size_t row() const noexcept { return row_; }
  /// 1-based column.
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class insufficient_data_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

/// Numerical failure of a model stage: singular normal equations, saturated model, undefined statistic.
class numerical_error : public error {
 public:
  using error::error;
};

}  // namespace weldopt

#endif  // WELDOPT_ERROR_HPP
