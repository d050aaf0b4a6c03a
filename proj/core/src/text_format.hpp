#pragma once

// Helpers for the line-based model formats.

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "ctxspell/error.hpp"
#include "ctxspell/features.hpp"

namespace ctxspell::text {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

// Shortest decimal that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string_view next_line() {
    if (!std::getline(in_, line_)) {
      ++lineno_;
      fail("unexpected end of file");
    }
    ++lineno_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    return line_;
  }

  void expect_line(std::string_view expected) {
    if (next_line() != expected) fail("expected '" + std::string(expected) + "'");
  }

  // Value of a `name<TAB>value` line.
  std::string_view field(std::string_view name) {
    const std::string_view line = next_line();
    if (line.size() <= name.size() || line.substr(0, name.size()) != name ||
        line[name.size()] != '\t')
      fail("expected field '" + std::string(name) + "'");
    return line.substr(name.size() + 1);
  }

  std::uint64_t parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      fail("expected an unsigned integer, got '" + std::string(s) + "'");
    return v;
  }

  double parse_double(std::string_view s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      fail("expected a number, got '" + std::string(s) + "'");
    return v;
  }

  Feature parse_feature(std::string_view key) {
    try {
      return Feature::parse(key);
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  void expect_end() {
    std::string rest;
    while (std::getline(in_, rest)) {
      ++lineno_;
      if (!rest.empty() && rest != "\r") fail("trailing content");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("model file: " + what, lineno_);
  }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t lineno_ = 0;
};

}  // namespace ctxspell::text
