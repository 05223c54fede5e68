#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace topoalign {

/// Shortest decimal text that parses back to exactly `v`; infinities print as "inf".
inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace topoalign
