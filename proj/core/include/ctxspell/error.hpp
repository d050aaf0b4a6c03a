#pragma once

#include <stdexcept>
#include <string>

namespace ctxspell {

// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (corpus, confusion sets, tag dictionary, model).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ctxspell
