#include "sharecap/units.hpp"
#include "sharecap/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace sharecap {

double parse_bits(std::string_view text) {
    // strip whitespace
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.size() >= 2 && text.substr(text.size() - 2) == "/s") text.remove_suffix(2);
    if (text.empty()) throw ConfigError("empty quantity");

    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{}) throw ConfigError("bad quantity: '" + std::string(text) + "'");

    std::string_view suffix(ptr, static_cast<size_t>(end - ptr));
    double scale = 1.0;
    if (suffix.empty() || suffix == "b") {
        scale = 1.0;
    } else if (suffix == "kb" || suffix == "Kb") {
        scale = 1e3;
    } else if (suffix == "Mb") {
        scale = 1e6;
    } else if (suffix == "Gb") {
        scale = 1e9;
    } else if (suffix == "Tb") {
        scale = 1e12;
    } else {
        throw ConfigError("unknown unit suffix '" + std::string(suffix) + "' in '" + std::string(text) + "'");
    }
    return value * scale;
}

std::string format_mbps(double bits_per_second) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", bits_per_second / 1e6);
    return buf;
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

} // namespace sharecap
