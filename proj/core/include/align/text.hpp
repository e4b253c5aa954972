#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace align::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool contains_icase(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view s, char sep);

/// Fixed-point rendering with `decimals` digits, locale independent.
std::string fixed(double value, int decimals);

/// Lowercase hex SHA-256 of the bytes in `data`.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace align::text

#include <chrono>

namespace align::text {

/// `YYYY-MM-DDTHH:MM:SSZ` in UTC.
std::string format_utc(std::chrono::system_clock::time_point t);
/// Accepts `YYYY-MM-DDTHH:MM:SSZ` or a bare `YYYY-MM-DD`; nullopt otherwise.
std::optional<std::chrono::system_clock::time_point> parse_utc(std::string_view s);

}  // namespace align::text
