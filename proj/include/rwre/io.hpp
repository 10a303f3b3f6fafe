#pragma once

#include <cstdio>
#include <string>

namespace rwre {

inline constexpr const char* kToolVersion = "rwre 1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

/// Round-trip decimal form with 17 significant digits.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace rwre
