#pragma once

#include <cstdio>
#include <string>

namespace lsc {

/// Shortest-ish decimal that reproduces typical CSV precision.
inline std::string fmt_double(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

} // namespace lsc
