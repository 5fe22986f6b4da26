#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace tfdlab {

/// Shortest round-trip text for a double: 17 significant digits, "nan",
/// "inf" and "-inf" spelled out.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace tfdlab
