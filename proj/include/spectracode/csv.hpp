#pragma once

#include <cstdio>
#include <string>

namespace spectracode {

/// Shortest-roundtrip-safe rendering: 17 significant digits, '.' decimal point.
inline std::string format_real(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace spectracode
