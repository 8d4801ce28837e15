#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deweed::text {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Whole-string parse; nullopt on trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<unsigned long long> parse_unsigned(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace deweed::text
