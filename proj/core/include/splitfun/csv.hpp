#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace splitfun::csv {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double x);
/// Strict parse of a full field; throws ContractError on trailing garbage.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

/// Splits one line on commas (no quoting; fields never contain commas).
std::vector<std::string_view> split_fields(std::string_view line);
/// Lines without the trailing '\r'.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace splitfun::csv
