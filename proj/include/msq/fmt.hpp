#pragma once

#include <cstdio>
#include <string>

namespace msq {

// Shortest-ish decimal form with `sig` significant digits; the CLI prints
// every numeric value through this with the default 12.
inline std::string fmt_g(double x, int sig = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, x);
    return buf;
}

}  // namespace msq
