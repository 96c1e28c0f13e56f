#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "timberline/diagnostics.hpp"

namespace timberline {

/// A plot with a nonzero numerator (y) or denominator (x). Plots with both
/// zero are implied by the stratum sample size and never stored.
struct Observation {
  double y = 0;
  double x = 0;
};

struct StratumSample {
  double weight = 0;       // W_h
  std::size_t plots = 0;   // n_h, including all-zero plots
  std::vector<Observation> nonzero;
  std::string label;       // used in diagnostics only
};

struct UnitSample {
  double area = 0;
  std::vector<StratumSample> strata;
  std::string label;
};

struct TotalEstimate {
  double total = 0;
  double variance = 0;
  std::size_t nNonZero = 0;
  std::size_t nPlots = 0;
};

/// Numerator and denominator totals with their covariance.
struct PairEstimate {
  TotalEstimate num;
  TotalEstimate den;
  double covariance = 0;
};

/// Post-stratified totals of y and x over all units, summed across units.
/// Per unit with area A and n plots:
///   Y = A * sum_h W_h * ybar_h
///   v(Y) = A^2/n * [sum_h W_h s2_h + (1/n) sum_h (1 - W_h) s2_h]
/// and the same form with s_xy,h for the covariance. Strata without plots
/// have their weight spread over the sampled strata of the unit; strata with
/// one plot contribute no variance. Both cases are recorded in `diag`.
PairEstimate postStratifiedPair(const std::vector<UnitSample>& units, Diagnostics* diag = nullptr);

/// The y half of postStratifiedPair.
TotalEstimate postStratifiedTotal(const std::vector<UnitSample>& units, Diagnostics* diag = nullptr);

/// Covariance of the y and x totals.
double postStratifiedCovariance(const std::vector<UnitSample>& units, Diagnostics* diag = nullptr);

struct RatioEstimate {
  std::optional<double> value;  // absent when the denominator total is 0
  double variance = 0;
};

/// R = Y/X with v(R) = [v(Y) + R^2 v(X) - 2 R cov] / X^2. Rounding-level
/// negative variances clamp to 0; larger ones throw std::logic_error.
RatioEstimate ratioEstimate(const TotalEstimate& num, const TotalEstimate& den, double covariance);

/// 100 * sqrt(variance) / |estimate|, only with at least two nonzero plots
/// and a nonzero estimate.
std::optional<double> samplingErrorPct(double estimate, double variance, std::size_t nNonZero);

}  // namespace timberline
