#pragma once

#include <charconv>
#include <string>
#include <system_error>

#include "csf/error.hpp"

namespace csf {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Parses the whole string as a double; throws FormatError otherwise.
inline double parse_double(const std::string& s) {
  double v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '+')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last) throw FormatError("not a number: '" + s + "'");
  return v;
}

}  // namespace csf
