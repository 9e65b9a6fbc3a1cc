#pragma once

#include <charconv>
#include <cmath>
#include <string>

#include "netrepair/errors.hpp"

namespace netrepair {

// Shortest decimal string that round-trips to the same double. Used by the
// network writer so a parse/serialize cycle reproduces weights bit-exactly.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(std::string("bad numeric value for ") + what + ": '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s, const char* what) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(std::string("bad integer value for ") + what + ": '" + std::string(s) + "'");
    return v;
}

// Rounds to three decimals for timing fields in reports.
inline double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

} // namespace netrepair
