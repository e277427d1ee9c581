#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace eucgov::csv {

using Row = std::vector<std::string>;

/// Quotes a field when it contains a comma, quote, CR or LF (RFC 4180).
std::string escape(std::string_view field);
/// One record terminated by CRLF.
std::string format_row(const Row& row);

struct ParsedRow {
  Row fields;
  std::size_t line = 0;  // 1-based line the record starts on
};

/// Parses RFC 4180 text. Accepts LF or CRLF terminators; quoted fields may span
/// lines. Throws Error{MalformedRow} on an unterminated quote.
std::vector<ParsedRow> parse(std::string_view text);

}  // namespace eucgov::csv
