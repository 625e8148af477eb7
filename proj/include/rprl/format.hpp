#pragma once

#include <charconv>
#include <string>

namespace rprl {

// Shortest round-trip decimal form, independent of the C locale.
inline std::string fmt_num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace rprl
