#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pqpf {

// Shortest plain-decimal text that parses back to exactly `value`.
std::string format_decimal(double value);

// Scientific notation with 17 significant digits; round-trips exactly.
std::string format_precise(double value);

// Strict full-string parse; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Ordered `key = value` map, as written by the parameter files.
using KeyValues = std::map<std::string, std::string, std::less<>>;

// Reads `key = value` lines; blank lines and `#` comments are ignored.
// Throws Error(Parse) with the line number on malformed input.
KeyValues read_key_values(const std::string& path);
void write_key_values(const std::string& path, const std::vector<std::pair<std::string, std::string>>& entries);

double require_double(const KeyValues& kv, std::string_view key);

}  // namespace pqpf
