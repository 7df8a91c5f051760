#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace fdnet::csv {

// Shortest representation that round-trips; deterministic across runs.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

}  // namespace fdnet::csv
