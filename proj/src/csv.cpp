#include "timberline/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "timberline/error.hpp"

namespace timberline::csv {

Document parse(std::string_view text, std::string_view sourceName) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Record> rows;
  Record row;
  Field field;
  bool inQuotes = false;
  bool fieldStarted = false;
  std::size_t line = 1;
  std::size_t quoteLine = 0;

  auto endField = [&] {
    row.push_back(std::move(field));
    field = Field{};
    fieldStarted = false;
  };
  auto endRow = [&] {
    endField();
    // A blank line is a single null field; skip it.
    if (!(row.size() == 1 && row.front().isNull())) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (inQuotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.text.push_back('"');
          ++i;
        } else {
          inQuotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.text.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (fieldStarted && !field.quoted)
          throw DataError(std::string(sourceName) + " line " + std::to_string(line) +
                          ": stray quote inside unquoted field");
        inQuotes = true;
        field.quoted = true;
        fieldStarted = true;
        quoteLine = line;
        break;
      case ',':
        endField();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        endRow();
        ++line;
        break;
      case '\n':
        endRow();
        ++line;
        break;
      default:
        if (field.quoted)
          throw DataError(std::string(sourceName) + " line " + std::to_string(line) +
                          ": characters after closing quote");
        field.text.push_back(c);
        fieldStarted = true;
    }
  }
  if (inQuotes)
    throw DataError(std::string(sourceName) + ": unterminated quoted field starting on line " +
                    std::to_string(quoteLine));
  if (fieldStarted || !row.empty()) endRow();

  Document doc;
  if (rows.empty()) throw DataError(std::string(sourceName) + ": missing header row");
  for (auto& f : rows.front()) doc.header.push_back(std::move(f.text));
  rows.erase(rows.begin());
  doc.records = std::move(rows);
  return doc;
}

Document readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.filename().string());
}

void writeField(std::ostream& out, std::string_view text, bool forceQuote) {
  const bool needs = forceQuote || text.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) {
    out << text;
    return;
  }
  out << '"';
  for (char c : text) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void writeRow(std::ostream& out, const std::vector<std::optional<std::string>>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    if (cells[i]) writeField(out, *cells[i], cells[i]->empty());
  }
  out << '\n';
}

}  // namespace timberline::csv
