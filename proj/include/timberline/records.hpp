#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timberline/value.hpp"

namespace timberline {

/// Sample basis of a tree record; selects the stratum adjustment factor.
enum class TreeBasis { Microplot, Subplot, Macroplot };

/// Change component of a tree in a growth-removal-mortality evaluation.
enum class Component { None, Survivor, Mortality, Cut, Ingrowth };

enum class FuelType { Hr1, Hr10, Hr100, Hr1000, Duff, Litter, Pile };

enum class EvalType { Vol, Grm, Chng, Dwm };

std::string_view toString(TreeBasis b);
std::string_view toString(Component c);
std::string_view toString(FuelType f);
std::string_view toString(EvalType t);

std::optional<TreeBasis> parseTreeBasis(std::string_view text);
std::optional<Component> parseComponent(std::string_view text);
std::optional<FuelType> parseFuelType(std::string_view text);
std::optional<EvalType> parseEvalType(std::string_view text);

inline constexpr int kForestCondStatus = 1;

struct PlotRecord {
  std::string cn;
  int statecd = 0;
  int plot = 0;
  int invyr = 0;
  std::optional<int> measyear;
  std::optional<double> lat;
  std::optional<double> lon;
  std::optional<double> remper;
  std::optional<int> plotStatus;
  std::optional<int> designcd;
  std::optional<int> invasiveSampling;

  bool operator==(const PlotRecord&) const = default;
};

struct ConditionRecord {
  std::string cn;
  std::string pltCn;
  int condid = 0;
  int condStatus = 0;
  std::optional<double> condpropUnadj;
  std::optional<int> fortypcd;
  std::optional<int> owncd;
  std::optional<double> stdage;

  bool operator==(const ConditionRecord&) const = default;
};

struct TreeRecord {
  std::string cn;
  std::string pltCn;
  int condid = 0;
  int statuscd = 0;
  int spcd = 0;
  std::optional<double> dia;
  std::optional<double> tpaUnadj;
  std::optional<TreeBasis> basis;
  std::optional<double> volcfnet;
  std::optional<double> volcsnet;
  std::optional<double> drybioAg;
  std::optional<double> drybioBg;
  std::optional<double> carbonAg;
  std::optional<double> carbonBg;
  std::optional<double> prevdia;
  std::optional<double> prevVolcfnet;
  std::optional<double> prevDrybioAg;
  std::optional<Component> component;
  std::optional<double> tpamortUnadj;
  std::optional<double> tparemvUnadj;
  std::optional<double> tpagrowUnadj;

  bool operator==(const TreeRecord&) const = default;
};

struct SeedlingRecord {
  std::string pltCn;
  int condid = 0;
  int spcd = 0;
  double treecount = 0;
  double tpaUnadj = 0;

  bool operator==(const SeedlingRecord&) const = default;
};

struct DwmConditionRecord {
  std::string pltCn;
  int condid = 0;
  FuelType fuelType = FuelType::Hr1;
  double volAcre = 0;
  double bioAcre = 0;
  double carbAcre = 0;

  bool operator==(const DwmConditionRecord&) const = default;
};

struct InvasiveRecord {
  std::string pltCn;
  int condid = 0;
  std::string spcd;
  double coverPct = 0;

  bool operator==(const InvasiveRecord&) const = default;
};

struct Evaluation {
  int evalid = 0;
  int statecd = 0;
  EvalType type = EvalType::Vol;
  int reportYear = 0;
  std::optional<int> startInvyr;
  std::optional<int> endInvyr;

  bool operator==(const Evaluation&) const = default;
};

struct EstimationUnit {
  std::string cn;
  int evalid = 0;
  double areaUsed = 0;

  bool operator==(const EstimationUnit&) const = default;
};

struct Stratum {
  std::string cn;
  std::string estnUnitCn;
  double weight = 0;
  double adjSubp = 1;
  double adjMicr = 1;
  double adjMacr = 1;

  bool operator==(const Stratum&) const = default;
};

struct StratumAssignment {
  std::string pltCn;
  std::string stratumCn;
  int panelYear = 0;

  bool operator==(const StratumAssignment&) const = default;
};

struct Species {
  int spcd = 0;
  std::string commonName;
  std::string genus;
  std::string scientificName;

  bool operator==(const Species&) const = default;
};

/// Columns outside the typed subset, kept as opaque values aligned with rows.
struct ExtraColumn {
  std::string name;
  ColumnType type = ColumnType::Text;
  std::vector<Value> values;

  bool operator==(const ExtraColumn&) const = default;
};

template <class R>
struct Table {
  std::vector<R> rows;
  std::vector<ExtraColumn> extras;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  bool operator==(const Table&) const = default;
};

/// Raw inventory tables, one per DataMart file.
struct Tables {
  Table<PlotRecord> plots;
  Table<ConditionRecord> conditions;
  Table<TreeRecord> trees;
  Table<SeedlingRecord> seedlings;
  Table<DwmConditionRecord> dwm;
  Table<InvasiveRecord> invasives;
  Table<Evaluation> evaluations;
  Table<EstimationUnit> estimationUnits;
  Table<Stratum> strata;
  Table<StratumAssignment> assignments;
  Table<Species> species;

  bool operator==(const Tables&) const = default;
};

}  // namespace timberline
