#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evemb {

/// Malformed input in one of the text formats. `line()` is 1-based, 0 when
/// the problem is not tied to a line (e.g. an empty file).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace evemb
