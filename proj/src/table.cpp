#include "timberline/table.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

#include "timberline/csv.hpp"

namespace timberline {

std::optional<std::size_t> EstimateTable::keyIndex(std::string_view name) const {
  for (std::size_t i = 0; i < keyColumns.size(); ++i)
    if (keyColumns[i] == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> EstimateTable::valueIndex(std::string_view name) const {
  for (std::size_t i = 0; i < valueColumns.size(); ++i)
    if (valueColumns[i] == name) return i;
  return std::nullopt;
}

namespace {

bool isCount(std::string_view column) { return column.starts_with("nPlots"); }

struct ValueLess {
  bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](const Value& x, const Value& y) { return compareValues(x, y) < 0; });
  }
};

}  // namespace

EstimateTable pivotWide(const EstimateTable& table, std::string_view keyColumn) {
  const auto k = table.keyIndex(keyColumn);
  if (!k) return table;

  std::vector<Value> levels;
  for (const auto& r : table.rows)
    if (std::none_of(levels.begin(), levels.end(), [&](const Value& v) { return compareValues(v, r.keys[*k]) == 0; }))
      levels.push_back(r.keys[*k]);

  EstimateTable out;
  out.diagnostics = table.diagnostics;
  for (std::size_t i = 0; i < table.keyColumns.size(); ++i)
    if (i != *k) out.keyColumns.push_back(table.keyColumns[i]);
  for (const auto& level : levels)
    for (const auto& c : table.valueColumns) out.valueColumns.push_back(c + "_" + formatValue(level));

  std::map<std::vector<Value>, std::size_t, ValueLess> index;
  const std::size_t width = table.valueColumns.size();
  for (const auto& r : table.rows) {
    std::vector<Value> rest;
    for (std::size_t i = 0; i < r.keys.size(); ++i)
      if (i != *k) rest.push_back(r.keys[i]);
    auto [it, fresh] = index.emplace(rest, out.rows.size());
    if (fresh) out.rows.push_back({rest, std::vector<std::optional<double>>(out.valueColumns.size())});
    const auto lvl = static_cast<std::size_t>(
        std::find_if(levels.begin(), levels.end(), [&](const Value& v) { return compareValues(v, r.keys[*k]) == 0; }) -
        levels.begin());
    auto& dst = out.rows[it->second].values;
    for (std::size_t c = 0; c < width; ++c) dst[lvl * width + c] = r.values[c];
  }
  return out;
}

std::string formatCell(std::string_view column, const std::optional<double>& value, const TableFormat& format) {
  if (!value) return {};
  if (format.pretty && !isCount(column)) return formatFixed(*value, 2);
  return formatNumber(*value);
}

void writeCsv(std::ostream& out, const EstimateTable& table, const TableFormat& format) {
  std::vector<std::optional<std::string>> cells;
  for (const auto& c : table.keyColumns) cells.emplace_back(c);
  for (const auto& c : table.valueColumns) cells.emplace_back(c);
  csv::writeRow(out, cells);
  for (const auto& r : table.rows) {
    cells.clear();
    for (const auto& k : r.keys) cells.push_back(isNull(k) ? std::nullopt : std::optional<std::string>(formatValue(k)));
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      if (!r.values[i]) cells.emplace_back(std::nullopt);
      else cells.emplace_back(formatCell(table.valueColumns[i], r.values[i], format));
    }
    csv::writeRow(out, cells);
  }
}

void writeJson(std::ostream& out, const EstimateTable& table, const TableFormat& format) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < r.keys.size(); ++i) {
      const Value& k = r.keys[i];
      if (const auto* d = std::get_if<double>(&k)) obj[table.keyColumns[i]] = *d;
      else if (const auto* s = std::get_if<std::string>(&k)) obj[table.keyColumns[i]] = *s;
      else obj[table.keyColumns[i]] = nullptr;
    }
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      const auto& v = r.values[i];
      if (!v) obj[table.valueColumns[i]] = nullptr;
      else if (format.pretty && !isCount(table.valueColumns[i]))
        obj[table.valueColumns[i]] = std::round(*v * 100.0) / 100.0;
      else obj[table.valueColumns[i]] = *v;
    }
    rows.push_back(std::move(obj));
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  doc["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : table.keyColumns) doc["columns"].push_back(c);
  for (const auto& c : table.valueColumns) doc["columns"].push_back(c);
  doc["rows"] = std::move(rows);
  doc["diagnostics"] = table.diagnostics;
  out << doc.dump(2) << '\n';
}

}  // namespace timberline
