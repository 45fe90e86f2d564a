#pragma once

#include <stdexcept>
#include <string>

namespace rtask {

// Error raised while reading any of the text file formats (recipes, database,
// rules, scenario, fault plan). `code` is a stable identifier such as
// SYNTAX_ERROR, STRUCTURE_ERROR, TYPE_ERROR, UNKNOWN_KEY.
class LoadError : public std::runtime_error {
public:
  LoadError(std::string code, const std::string& message, int line = -1, int column = -1)
      : std::runtime_error(format(code, message, line, column)),
        code_(std::move(code)),
        line_(line),
        column_(column) {}

  const std::string& code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  static std::string format(const std::string& code, const std::string& message, int line,
                            int column) {
    std::string out = code + ": " + message;
    if (line >= 0) {
      out += " (line " + std::to_string(line + 1);
      if (column >= 0) out += ", column " + std::to_string(column + 1);
      out += ")";
    }
    return out;
  }

  std::string code_;
  int line_;
  int column_;
};

}  // namespace rtask
