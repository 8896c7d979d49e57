#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace rfkm {

// Shortest decimal form that reloads to the same double. Locale-independent,
// so files written on different machines are byte-identical.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

// Six significant digits, for human-facing tables.
inline std::string format_sig6(double v) {
    char buf[48];
    const int len = std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf, buf + len);
}

}  // namespace rfkm
