#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace timberline::csv {

/// One RFC 4180 field. `quoted` distinguishes `""` (empty text) from an empty
/// unquoted field (null).
struct Field {
  std::string text;
  bool quoted = false;
  bool isNull() const { return !quoted && text.empty(); }
};

using Record = std::vector<Field>;

struct Document {
  std::vector<std::string> header;
  std::vector<Record> records;
};

/// Parses comma-separated text with RFC 4180 quoting. Accepts LF or CRLF line
/// ends and a leading UTF-8 BOM. Throws DataError on unterminated quotes.
Document parse(std::string_view text, std::string_view sourceName = "<memory>");

Document readFile(const std::filesystem::path& path);

/// Quotes a field only when it contains a delimiter, quote, or line break, or
/// when it is an empty non-null string.
void writeField(std::ostream& out, std::string_view text, bool forceQuote = false);

void writeRow(std::ostream& out, const std::vector<std::optional<std::string>>& cells);

}  // namespace timberline::csv
