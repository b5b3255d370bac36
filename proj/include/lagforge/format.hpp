#pragma once

// Deterministic text formatting and parsing for every file the tools emit:
// 17 significant digits, locale-free, byte-identical across runs.

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lagforge {

/// 17 significant digits round-trips every double exactly.
[[nodiscard]] inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[nodiscard]] inline double parse_double(std::string_view text, const char* what = "number") {
  std::string owned(text);
  char* end = nullptr;
  const double value = std::strtod(owned.c_str(), &end);
  if (end == owned.c_str() || (end && *end != '\0'))
    throw std::runtime_error(std::string(what) + ": malformed number '" + owned + "'");
  return value;
}

/// Whitespace-separated fields of one line.
[[nodiscard]] inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.emplace_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace lagforge
