#pragma once

// Shared machinery behind the attribute estimators: evaluation slicing,
// plot-value computation, grouping, and per-group post-stratified
// estimation. Families plug in through FamilySpec.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "timberline/columns.hpp"
#include "timberline/database.hpp"
#include "timberline/diagnostics.hpp"
#include "timberline/domain.hpp"
#include "timberline/estimation.hpp"
#include "timberline/panels.hpp"
#include "timberline/spatial.hpp"

namespace timberline::engine {

/// One component of a group key. `sort` orders rows; `label` is emitted.
struct KeyPart {
  Value sort;
  Value label;
};

using Key = std::vector<KeyPart>;

struct KeyLess {
  bool operator()(const Key& a, const Key& b) const;
};

/// Interval label "[a, b)" for value, with a = lower + width * floor((value - lower) / width).
/// Values below `lower` get "(-Inf, lower)".
KeyPart sizeClassPart(std::optional<double> value, double width, double lower);

enum class DenKind { None, Area, Full };

/// One reported quantity: a ratio of two plot-value slots, or a total.
struct Measure {
  std::string name;
  std::size_t num = 0;
  DenKind den = DenKind::Area;
  std::size_t denSlot = 0;
  double scale = 1.0;
  /// byPlot reports num/den instead of num.
  bool plotRatio = false;
  /// Column for the numerator total when totals are requested (empty: none).
  std::string totalName;
};

class PlotScope;

struct FamilySpec {
  std::string name;
  EvalType evalType = EvalType::Vol;
  /// Use VOL evaluations when none of evalType exist.
  bool fallbackToVol = false;
  /// Table the record predicate applies to.
  RecordLevel leaf = RecordLevel::Tree;
  /// Table that grouping columns may come from (None: PLOT/COND only).
  RecordLevel groupLeaf = RecordLevel::Tree;
  /// Key columns appended by the family itself, after the generic parts.
  std::vector<std::string> familyKeys;
  std::size_t fullSlots = 0;
  std::size_t areaSlots = 0;
  std::vector<Measure> measures;
  /// Slots whose nonzero values make a plot count toward a group; a group
  /// with no such plot is omitted.
  std::vector<std::size_t> countSlots;
  std::string numCountName;
  /// Area slot counted for denCountName; empty name disables it.
  std::string denCountName;
  std::size_t denCountSlot = 0;
  /// Record predicate used when the request does not supply one.
  std::string defaultRecordDomain;
  std::function<void(PlotScope&)> evaluate;
};

struct EngineRequest {
  std::vector<std::string> grpBy;
  std::shared_ptr<const PolygonSet> polys;
  bool bySpecies = false;
  bool bySizeClass = false;
  bool byPlot = false;
  std::optional<std::string> recordDomain;
  std::optional<std::string> areaDomain;
  Method method = Method::TI;
  std::vector<double> lambdas;
  unsigned workers = 1;
  std::optional<int> year;
  std::vector<int> evalids;
};

/// Per-plot emitter handed to FamilySpec::evaluate.
class PlotScope {
 public:
  struct Impl;
  explicit PlotScope(Impl& impl) : impl_(impl) {}

  const ForestDatabase& db() const;
  std::size_t plot() const;
  const PlotRecord& plotRecord() const;
  const Stratum& stratum() const;
  Diagnostics& diagnostics();

  /// Forest condition (COND_STATUS_CD 1) inside the area domain.
  bool areaOk(std::size_t cond);
  /// Record predicate on the joined row.
  bool recordOk(std::size_t cond, std::size_t record);
  /// CONDPROP_UNADJ * ADJ_FACTOR_SUBP (0 when the proportion is null).
  double condArea(std::size_t cond) const;
  /// Stratum adjustment for a tree by its sample basis.
  double treeAdjustment(const TreeRecord& tree) const;

  /// Condition of a record row; throws IntegrityError when it is missing.
  std::size_t treeCondition(std::size_t tree) const;
  std::size_t seedlingCondition(std::size_t row) const;
  std::size_t dwmCondition(std::size_t row) const;
  std::size_t invasiveCondition(std::size_t row) const;

  Key areaKey(std::size_t cond);
  Key fullKey(std::size_t cond, std::optional<std::size_t> record);
  /// Area-level part of a full key.
  Key project(const Key& full) const;

  void num(const Key& full, std::size_t slot, double value);
  void area(const Key& areaKey, std::size_t slot, double value);

 private:
  Impl& impl_;
};

struct GroupResult {
  Key key;
  int year = 0;
  std::optional<double> lambda;
  std::vector<PairEstimate> measures;  // aligned with FamilySpec::measures
  std::size_t numCount = 0;
  std::size_t denCount = 0;
};

struct PlotRow {
  std::string pltCn;
  int year = 0;
  Key key;
  std::vector<std::optional<double>> values;  // aligned with measures
  std::optional<double> area;                 // denCountSlot value
};

struct EngineResult {
  std::vector<std::string> keyColumns;  // generic parts then family keys
  std::vector<bool> speciesColumn;      // true where the part is SPCD from bySpecies
  bool hasLambda = false;
  std::vector<GroupResult> groups;      // sorted by lambda, year, key
  std::vector<PlotRow> plotRows;        // byPlot only
  Diagnostics diagnostics;
};

EngineResult run(const ForestDatabase& db, const FamilySpec& family, const EngineRequest& request);

}  // namespace timberline::engine
