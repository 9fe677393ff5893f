#pragma once

#include <string>
#include <string_view>

namespace sharecap {

// Parses a data quantity with an optional kb/Mb/Gb/Tb suffix into bits.
// Accepts "100Mb", "1.5Gb", "2e8", "250kb". A trailing "/s" is ignored so
// the same parser serves sizes and rates. Throws ConfigError on bad input.
double parse_bits(std::string_view text);

// Alias used where the quantity is a rate in bit/s.
inline double parse_rate(std::string_view text) { return parse_bits(text); }

// Formats a rate in bit/s as Mb/s rounded to one decimal, e.g. "1000.0".
std::string format_mbps(double bits_per_second);

// Deterministic number formatting for output files ("%.10g").
std::string format_number(double value);

} // namespace sharecap
