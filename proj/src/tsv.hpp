#pragma once

// Internal helpers shared by the TSV readers and writers.

#include <cstdio>
#include <string>
#include <vector>

#include "bicf/error.hpp"

namespace bicf::detail {

// Shortest-safe round-trip formatting for doubles.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "not a number: '" + text + "'");
  }
  if (used != text.size()) throw ParseError(line, "not a number: '" + text + "'");
  return v;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace bicf::detail
