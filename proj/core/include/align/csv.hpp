#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace align::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF. Blank lines are skipped.
/// Throws Error(MalformedRow) on an unterminated quote.
std::vector<Row> parse(std::string_view input);

std::string escape_field(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace align::csv
