#pragma once

#include <charconv>
#include <string>

namespace bipcp {

// shortest decimal form that round-trips through double
inline std::string fmt_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace bipcp
