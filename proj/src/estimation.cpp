#include "timberline/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace timberline {

namespace {

struct Moments {
  double meanY = 0, meanX = 0;
  double ssY = 0, ssX = 0, sXY = 0;  // centered sums of squares and products
};

// Two-pass moments; zeros not stored in `nonzero` enter through (n - k) * mean^2.
Moments moments(const StratumSample& s) {
  Moments m;
  const double n = static_cast<double>(s.plots);
  double sy = 0, sx = 0;
  for (const auto& o : s.nonzero) {
    sy += o.y;
    sx += o.x;
  }
  m.meanY = sy / n;
  m.meanX = sx / n;
  for (const auto& o : s.nonzero) {
    const double dy = o.y - m.meanY, dx = o.x - m.meanX;
    m.ssY += dy * dy;
    m.ssX += dx * dx;
    m.sXY += dy * dx;
  }
  const double zeros = n - static_cast<double>(s.nonzero.size());
  m.ssY += zeros * m.meanY * m.meanY;
  m.ssX += zeros * m.meanX * m.meanX;
  m.sXY += zeros * m.meanY * m.meanX;
  return m;
}

}  // namespace

PairEstimate postStratifiedPair(const std::vector<UnitSample>& units, Diagnostics* diag) {
  PairEstimate out;
  for (const auto& unit : units) {
    std::size_t n = 0;
    double sampledWeight = 0, totalWeight = 0;
    for (const auto& s : unit.strata) {
      n += s.plots;
      totalWeight += s.weight;
      if (s.plots > 0) sampledWeight += s.weight;
      std::size_t nzY = 0, nzX = 0;
      for (const auto& o : s.nonzero) {
        nzY += o.y != 0;
        nzX += o.x != 0;
      }
      out.num.nNonZero += nzY;
      out.den.nNonZero += nzX;
    }
    out.num.nPlots += n;
    out.den.nPlots += n;
    if (n == 0 || sampledWeight <= 0) {
      if (diag) diag->add("estimation unit " + unit.label + " has no sampled plots and contributes nothing");
      continue;
    }
    const double rescale = totalWeight / sampledWeight;
    if (sampledWeight < totalWeight && diag)
      diag->add("estimation unit " + unit.label + " has strata without plots; their weight was spread over sampled strata");

    const double nd = static_cast<double>(n);
    double meanY = 0, meanX = 0, vY = 0, vX = 0, cXY = 0;
    for (const auto& s : unit.strata) {
      if (s.plots == 0) continue;
      const double w = s.weight * rescale;
      const Moments m = moments(s);
      meanY += w * m.meanY;
      meanX += w * m.meanX;
      if (s.plots < 2) {
        if (diag) diag->add("stratum " + s.label + " has a single plot; its variance is taken as 0");
        continue;
      }
      const double df = static_cast<double>(s.plots - 1);
      const double factor = w + (1.0 - w) / nd;
      vY += factor * (m.ssY / df);
      vX += factor * (m.ssX / df);
      cXY += factor * (m.sXY / df);
    }
    const double a = unit.area;
    const double scale = a * a / nd;
    out.num.total += a * meanY;
    out.den.total += a * meanX;
    out.num.variance += scale * vY;
    out.den.variance += scale * vX;
    out.covariance += scale * cXY;
  }
  return out;
}

TotalEstimate postStratifiedTotal(const std::vector<UnitSample>& units, Diagnostics* diag) {
  return postStratifiedPair(units, diag).num;
}

double postStratifiedCovariance(const std::vector<UnitSample>& units, Diagnostics* diag) {
  return postStratifiedPair(units, diag).covariance;
}

RatioEstimate ratioEstimate(const TotalEstimate& num, const TotalEstimate& den, double covariance) {
  RatioEstimate r;
  if (den.total == 0) return r;
  const double ratio = num.total / den.total;
  const double x2 = den.total * den.total;
  double v = (num.variance + ratio * ratio * den.variance - 2.0 * ratio * covariance) / x2;
  if (v < 0) {
    const double scale = (num.variance + ratio * ratio * den.variance + 2.0 * std::abs(ratio * covariance)) / x2;
    if (v < -1e-9 * scale) throw std::logic_error("ratio variance is materially negative");
    v = 0;
  }
  r.value = ratio;
  r.variance = v;
  return r;
}

std::optional<double> samplingErrorPct(double estimate, double variance, std::size_t nNonZero) {
  if (nNonZero < 2 || estimate == 0) return std::nullopt;
  return 100.0 * std::sqrt(std::max(variance, 0.0)) / std::abs(estimate);
}

}  // namespace timberline
