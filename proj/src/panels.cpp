#include "timberline/panels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "timberline/error.hpp"
#include "timberline/value.hpp"

namespace timberline {

std::string_view toString(Method m) {
  switch (m) {
    case Method::TI: return "TI";
    case Method::Annual: return "ANNUAL";
    case Method::SMA: return "SMA";
    case Method::LMA: return "LMA";
    case Method::EMA: return "EMA";
  }
  return "TI";
}

Method parseMethod(std::string_view text) {
  std::string u(text);
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto m : {Method::TI, Method::Annual, Method::SMA, Method::LMA, Method::EMA})
    if (toString(m) == u) return m;
  throw UsageError("unknown method '" + std::string(text) + "' (expected TI, ANNUAL, SMA, LMA, or EMA)");
}

namespace {

void checkLambda(double lambda) {
  if (!(lambda > 0 && lambda < 1)) throw UsageError("lambda must lie strictly between 0 and 1, got " + formatNumber(lambda));
}

}  // namespace

std::vector<double> panelWeights(Method method, int panels, std::optional<double> lambda) {
  if (panels < 1) throw UsageError("number of panels must be at least 1");
  const auto n = static_cast<std::size_t>(panels);
  std::vector<double> w(n);
  switch (method) {
    case Method::TI:
    case Method::Annual:
      return {};
    case Method::SMA:
      std::fill(w.begin(), w.end(), 1.0 / panels);
      return w;
    case Method::LMA: {
      const double denom = 0.5 * panels * (panels + 1.0);
      for (std::size_t p = 1; p <= n; ++p) w[p - 1] = static_cast<double>(p) / denom;
      return w;
    }
    case Method::EMA: {
      const double l = lambda.value_or(kDefaultLambda);
      checkLambda(l);
      // Build from the most recent panel backwards so tiny terms do not
      // swamp the sum.
      double term = 1.0, sum = 0;
      for (std::size_t k = 0; k < n; ++k) {
        w[n - 1 - k] = term;
        term *= l;
      }
      for (std::size_t p = 0; p < n; ++p) sum += w[p];
      for (auto& x : w) x /= sum;
      return w;
    }
  }
  return {};
}

std::vector<double> normalizeLambdas(const std::vector<double>& lambdas) {
  if (lambdas.empty()) return {kDefaultLambda};
  std::vector<double> out = lambdas;
  for (double l : out) checkLambda(l);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<PairEstimate> combinePanels(const std::vector<std::optional<PairEstimate>>& perPanel,
                                          const std::vector<double>& weights, Diagnostics* diag) {
  if (perPanel.size() != weights.size()) throw std::invalid_argument("panel estimates and weights differ in length");
  double present = 0;
  for (std::size_t p = 0; p < weights.size(); ++p)
    if (perPanel[p]) present += weights[p];
  if (present <= 0) return std::nullopt;
  if (present < 1.0 - 1e-12 && diag)
    diag->add("one or more panels had no plots; remaining panel weights were rescaled");

  PairEstimate out;
  for (std::size_t p = 0; p < weights.size(); ++p) {
    if (!perPanel[p]) continue;
    const double w = weights[p] / present;
    const PairEstimate& e = *perPanel[p];
    out.num.total += w * e.num.total;
    out.den.total += w * e.den.total;
    out.num.variance += w * w * e.num.variance;
    out.den.variance += w * w * e.den.variance;
    out.covariance += w * w * e.covariance;
    out.num.nNonZero += e.num.nNonZero;
    out.den.nNonZero += e.den.nNonZero;
    out.num.nPlots += e.num.nPlots;
    out.den.nPlots += e.den.nPlots;
  }
  return out;
}

}  // namespace timberline
