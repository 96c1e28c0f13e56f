#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "timberline/diagnostics.hpp"
#include "timberline/estimation.hpp"

namespace timberline {

/// How annual panels within an inventory cycle are combined.
enum class Method { TI, Annual, SMA, LMA, EMA };

std::string_view toString(Method m);
/// Case-insensitive; throws UsageError on an unknown name.
Method parseMethod(std::string_view text);

inline constexpr double kDefaultLambda = 0.5;

/// Weights w_1..w_N with p = N the most recent panel.
///   SMA: 1/N
///   LMA: p / sum(i)
///   EMA: lambda^(N-p) / sum_i lambda^(N-i)
/// so lambda -> 1 approaches SMA and lambda -> 0 puts all weight on panel N.
/// TI and ANNUAL have no weight vector and return an empty list.
/// Throws UsageError for N < 1 or lambda outside (0, 1).
std::vector<double> panelWeights(Method method, int panels, std::optional<double> lambda = std::nullopt);

/// Sorted, de-duplicated lambdas; default {0.5} when empty. Throws UsageError
/// for values outside (0, 1).
std::vector<double> normalizeLambdas(const std::vector<double>& lambdas);

/// Weighted combination of per-panel estimates, aligned with `weights`.
/// Totals combine as sum w_p Y_p and variances as sum w_p^2 v_p (panels are
/// disjoint plot sets). Absent panels drop out and the remaining weights are
/// rescaled to sum to one, with a diagnostic. Returns nullopt when no panel
/// is present.
std::optional<PairEstimate> combinePanels(const std::vector<std::optional<PairEstimate>>& perPanel,
                                          const std::vector<double>& weights, Diagnostics* diag = nullptr);

}  // namespace timberline
