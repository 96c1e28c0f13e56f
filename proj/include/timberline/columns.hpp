#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timberline/database.hpp"
#include "timberline/domain.hpp"

namespace timberline {

/// Row-level table that sits below conditions for a given estimator.
enum class RecordLevel { None, Tree, Seedling, Dwm, Invasive };

std::string_view tableName(RecordLevel level);

/// Name resolution over PLOT, COND, and one record table, including
/// passthrough columns. Unqualified names resolve record > COND > PLOT;
/// `TREE.`, `COND.`, `PLOT.` (and the other table names) force a table.
class ColumnCatalog {
 public:
  ColumnCatalog(const ForestDatabase& db, RecordLevel leaf);

  std::optional<domain::ColumnBinding> resolve(std::string_view name) const;
  domain::Resolver resolver() const;

  /// Resolves or throws BindError naming the column and `context`.
  domain::ColumnBinding require(std::string_view name, std::string_view context) const;

  /// True when the slot belongs to the PLOT or COND table.
  static bool isAreaLevel(std::size_t slot);

  RecordLevel leaf() const { return leaf_; }

 private:
  const ForestDatabase* db_;
  RecordLevel leaf_;
};

/// One joined row. `cond` and `record` may be absent; their columns read as null.
class JoinedRow final : public domain::RowContext {
 public:
  JoinedRow(const ForestDatabase& db, RecordLevel leaf) : db_(&db), leaf_(leaf) {}

  void set(std::size_t plot, std::optional<std::size_t> cond, std::optional<std::size_t> record) {
    plot_ = plot;
    cond_ = cond;
    record_ = record;
  }

  Value value(std::size_t slot) const override;

 private:
  const ForestDatabase* db_;
  RecordLevel leaf_;
  std::size_t plot_ = 0;
  std::optional<std::size_t> cond_;
  std::optional<std::size_t> record_;
};

}  // namespace timberline
