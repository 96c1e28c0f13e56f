#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timberline/value.hpp"

namespace timberline {

/// Estimator output: key columns (YEAR, group labels) followed by numeric
/// value columns. Absent values serialize as empty CSV cells / JSON null.
struct EstimateTable {
  struct Row {
    std::vector<Value> keys;
    std::vector<std::optional<double>> values;

    bool operator==(const Row&) const = default;
  };

  std::vector<std::string> keyColumns;
  std::vector<std::string> valueColumns;
  std::vector<Row> rows;
  std::vector<std::string> diagnostics;

  std::optional<std::size_t> keyIndex(std::string_view name) const;
  std::optional<std::size_t> valueIndex(std::string_view name) const;
};

/// Collapses `keyColumn` into the value columns: each value column C becomes
/// C_<level> for every level in first-seen sort order.
EstimateTable pivotWide(const EstimateTable& table, std::string_view keyColumn);

struct TableFormat {
  /// Two decimals for estimates; counts stay integral.
  bool pretty = false;
};

void writeCsv(std::ostream& out, const EstimateTable& table, const TableFormat& format = {});
void writeJson(std::ostream& out, const EstimateTable& table, const TableFormat& format = {});

/// Cell text as written by writeCsv.
std::string formatCell(std::string_view column, const std::optional<double>& value, const TableFormat& format);

}  // namespace timberline
