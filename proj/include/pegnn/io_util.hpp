#pragma once

#include <cstdio>
#include <string>

namespace pegnn {

// Round-trippable decimal form of a double (17 significant digits).
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Fixed-precision form for human-facing tables.
inline std::string fmt_fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace pegnn
