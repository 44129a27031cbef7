#pragma once

// Small string helpers shared by the file readers and writers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcrf {

void strip_cr(std::string& line);
std::vector<std::string> split(std::string_view s, char sep);
// Splits on runs of spaces and tabs.
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::optional<double> parse_double(std::string_view s);
// Shortest representation that parses back to the same double.
std::string format_double(double v);
// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

}  // namespace mcrf
