#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rv {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error in RVL text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected,
             const std::string& detail);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
  std::string detail_;
};

// Failure while executing a statement. line() is the script line, 0 if the
// failure is not tied to a line.
class RunError : public Error {
 public:
  RunError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

// Numerical precondition violated (bad df, empty sample, rank deficiency ...).
class StatsError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

// Branch file whose body does not match its recorded hash.
class IntegrityError : public StoreError {
 public:
  using StoreError::StoreError;
};

}  // namespace rv
