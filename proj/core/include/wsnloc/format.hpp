#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "wsnloc/error.hpp"

namespace wsnloc {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline double parse_double(std::string_view s) {
  const std::string_view t = detail::trimmed(s);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ParseError("not a number: `" + std::string(s) + "`");
  }
  return v;
}

inline long parse_long(std::string_view s) {
  const std::string_view t = detail::trimmed(s);
  long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ParseError("not an integer: `" + std::string(s) + "`");
  }
  return v;
}

}  // namespace wsnloc
