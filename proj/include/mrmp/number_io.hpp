#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace mrmp {

// Shortest round-trip decimal form of v ("0.1", not "0.1000000000000000055...").
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("not a number: '" + s + "'");
  }
  return v;
}

}  // namespace mrmp
