#pragma once

#include <charconv>
#include <string>

namespace limtest {

// Shortest round-trip decimal representation; used everywhere a double goes
// into a report so repeated runs produce byte-identical files.
inline std::string fmt_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace limtest
