#pragma once

// Attribute estimators. Each returns one row per (lambda, YEAR, group) with
// per-acre estimates, sampling errors (percent), and nonzero-plot counts.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "timberline/database.hpp"
#include "timberline/panels.hpp"
#include "timberline/spatial.hpp"
#include "timberline/table.hpp"

namespace timberline {

enum class Family { Tpa, Biomass, Area, GrowMort, VitalRates, Dwm, Diversity, Invasive, Seedling, StandStruct };

std::string_view toString(Family f);
/// Accepts the CLI subcommand names (case-insensitive). Throws UsageError.
Family parseFamily(std::string_view name);

/// Abundance measure behind the diversity indices.
enum class DiversityBasis { BasalArea, TreesPerAcre };

struct EstimatorRequest {
  Family family = Family::Tpa;
  /// Columns or predicates, grouped hierarchically in order.
  std::vector<std::string> grpBy;
  std::shared_ptr<const PolygonSet> polys;
  bool byPlot = false;
  bool bySpecies = false;
  /// 2-inch diameter classes starting at 1.0.
  bool bySizeClass = false;
  /// Replaces the family's default record domain; family base filters
  /// (live status, forest land) always apply.
  std::optional<std::string> treeDomain;
  std::optional<std::string> areaDomain;
  Method method = Method::TI;
  std::vector<double> lambdas;
  /// Long layout; false pivots FUEL_TYPE (dwm) or STAGE (standStruct) into columns.
  bool tidy = true;
  unsigned workers = 1;
  /// Adds population totals next to the per-acre ratios.
  bool totals = false;
  /// Adds *_VAR columns.
  bool variance = false;
  std::optional<int> year;
  std::vector<int> evalids;
  DiversityBasis diversityBasis = DiversityBasis::BasalArea;
};

struct FamilyInfo {
  std::string name;
  std::string evaluationType;
  std::string defaultTreeDomain;
  std::string summary;
};

FamilyInfo familyInfo(Family f);

EstimateTable estimate(const ForestDatabase& db, const EstimatorRequest& request);

EstimateTable tpa(const ForestDatabase& db, EstimatorRequest request);
EstimateTable biomass(const ForestDatabase& db, EstimatorRequest request);
EstimateTable area(const ForestDatabase& db, EstimatorRequest request);
EstimateTable growMort(const ForestDatabase& db, EstimatorRequest request);
EstimateTable vitalRates(const ForestDatabase& db, EstimatorRequest request);
EstimateTable dwm(const ForestDatabase& db, EstimatorRequest request);
EstimateTable diversity(const ForestDatabase& db, EstimatorRequest request);
EstimateTable invasive(const ForestDatabase& db, EstimatorRequest request);
EstimateTable seedling(const ForestDatabase& db, EstimatorRequest request);
EstimateTable standStruct(const ForestDatabase& db, EstimatorRequest request);

/// "[a, b)" with a = lower + width * floor((value - lower) / width);
/// "(-Inf, lower)" below range. Throws UsageError for width <= 0.
std::string makeClasses(double value, double width, double lower);

/// Board feet per cubic foot of sawlog volume used for SAWVOL_BF_ACRE.
inline constexpr double kBoardFeetPerCubicFoot = 6.0;

}  // namespace timberline
