#include "rv/error.hpp"

#include <utility>

namespace rv {

namespace {

std::string parse_message(std::size_t line, std::size_t column,
                          const std::vector<std::string>& expected, const std::string& detail) {
  std::string msg = "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                    detail;
  if (!expected.empty()) {
    msg += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    msg += ")";
  }
  return msg;
}

}  // namespace

ParseError::ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected,
                       const std::string& detail)
    : Error(parse_message(line, column, expected, detail)),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      detail_(detail) {}

RunError::RunError(std::size_t line, const std::string& message)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line),
      message_(message) {}

}  // namespace rv
