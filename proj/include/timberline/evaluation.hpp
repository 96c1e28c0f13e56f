#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "timberline/database.hpp"
#include "timberline/spatial.hpp"

namespace timberline {

/// Evaluation ids, ascending, filtered by report year and/or type.
std::vector<int> findEvaluations(const ForestDatabase& db, std::optional<int> year = std::nullopt,
                                 std::optional<EvalType> type = std::nullopt);

struct ClipOptions {
  /// Latest report year in each state.
  bool mostRecent = false;
  /// Only report years present in every state.
  bool matchEval = false;
  std::vector<int> evalids;
  std::optional<int> year;
  /// Keeps plots whose center lies in a polygon. Strata and estimation units
  /// are retained unchanged, so unit areas are not rescaled.
  std::shared_ptr<const PolygonSet> mask;
};

/// Subset holding the selected evaluations, their units, strata, and
/// assignments, and every plot-level row of the assigned plots. Throws
/// UsageError when more than one of mostRecent/evalids/year is set and
/// DataError for an unknown evalid.
ForestDatabase clip(const ForestDatabase& db, const ClipOptions& options);

}  // namespace timberline
