#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "timberline/records.hpp"

namespace timberline {

/// An immutable set of inventory tables with join indexes.
///
/// Construction never mutates or validates the tables; rows that violate
/// foreign keys are simply absent from the indexes. Use validateIntegrity()
/// for a full report.
class ForestDatabase {
 public:
  ForestDatabase();
  explicit ForestDatabase(Tables tables);

  const Tables& tables() const { return tables_; }

  std::optional<std::size_t> plotIndex(std::string_view cn) const;
  std::optional<std::size_t> conditionIndex(std::string_view pltCn, int condid) const;
  std::optional<std::size_t> evaluationIndex(int evalid) const;
  std::optional<std::size_t> unitIndex(std::string_view cn) const;
  std::optional<std::size_t> stratumIndex(std::string_view cn) const;
  const Species* species(int spcd) const;

  std::span<const std::size_t> conditionsOfPlot(std::size_t plot) const { return condsByPlot_[plot]; }
  std::span<const std::size_t> treesOfPlot(std::size_t plot) const { return treesByPlot_[plot]; }
  std::span<const std::size_t> seedlingsOfPlot(std::size_t plot) const { return seedlingsByPlot_[plot]; }
  std::span<const std::size_t> dwmOfPlot(std::size_t plot) const { return dwmByPlot_[plot]; }
  std::span<const std::size_t> invasivesOfPlot(std::size_t plot) const { return invasivesByPlot_[plot]; }

  /// Condition row owning a tree/seedling/DWM/invasive row, if it exists.
  std::optional<std::size_t> conditionOfTree(std::size_t tree) const { return treeCond_[tree]; }
  std::optional<std::size_t> conditionOfSeedling(std::size_t row) const { return seedlingCond_[row]; }
  std::optional<std::size_t> conditionOfDwm(std::size_t row) const { return dwmCond_[row]; }
  std::optional<std::size_t> conditionOfInvasive(std::size_t row) const { return invasiveCond_[row]; }

  /// Distinct state FIPS codes among plots and evaluations, ascending.
  std::vector<int> states() const;

  bool operator==(const ForestDatabase& other) const { return tables_ == other.tables_; }

 private:
  void buildIndexes();

  Tables tables_;
  std::unordered_map<std::string, std::size_t> plotByCn_;
  std::unordered_map<std::string, std::size_t> condByKey_;
  std::unordered_map<int, std::size_t> evalById_;
  std::unordered_map<std::string, std::size_t> unitByCn_;
  std::unordered_map<std::string, std::size_t> stratumByCn_;
  std::unordered_map<int, std::size_t> speciesByCode_;
  std::vector<std::vector<std::size_t>> condsByPlot_;
  std::vector<std::vector<std::size_t>> treesByPlot_;
  std::vector<std::vector<std::size_t>> seedlingsByPlot_;
  std::vector<std::vector<std::size_t>> dwmByPlot_;
  std::vector<std::vector<std::size_t>> invasivesByPlot_;
  std::vector<std::optional<std::size_t>> treeCond_;
  std::vector<std::optional<std::size_t>> seedlingCond_;
  std::vector<std::optional<std::size_t>> dwmCond_;
  std::vector<std::optional<std::size_t>> invasiveCond_;
};

/// Reads `<STATE>_<TABLE>.csv` files from `directory` (no recursion) and
/// merges the requested states. An empty `states` list loads every state
/// that has a PLOT file. `REF_SPECIES.csv` is read when present.
///
/// Throws DataError for a missing mandatory table or an unparseable cell.
ForestDatabase loadDatabase(const std::filesystem::path& directory,
                            const std::vector<std::string>& states = {});

struct WriteOptions {
  /// When set, every row is written under this state prefix. Otherwise rows
  /// are split by the state of their plot or evaluation.
  std::optional<std::string> prefix;
};

/// Emits DataMart-named CSV files. Mandatory tables are always written;
/// empty optional tables are omitted.
void writeDatabase(const ForestDatabase& db, const std::filesystem::path& directory,
                   const WriteOptions& options = {});

struct Violation {
  std::string table;
  std::string key;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

/// Checks every record invariant and foreign key; empty result means valid.
std::vector<Violation> validateIntegrity(const ForestDatabase& db);

/// Design codes accepted as the annual inventory design.
bool isAnnualDesign(std::optional<int> designcd);

}  // namespace timberline
