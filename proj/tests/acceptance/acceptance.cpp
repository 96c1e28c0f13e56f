// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.
//
// Data-dependent criteria read real DataMart files from TIMBERLINE_CT_DIR
// (Connecticut) and TIMBERLINE_RI_DIR (Rhode Island) and are skipped when the
// variables are unset.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "montecarlo.hpp"
#include "oracle.hpp"
#include "random_db.hpp"
#include "timberline/attributes.hpp"
#include "timberline/cli.hpp"
#include "timberline/estimation.hpp"
#include "timberline/panels.hpp"

using namespace timberline;
using namespace timberline::synth;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }

std::string num(double x, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

const std::filesystem::path kFixtures = TIMBERLINE_FIXTURE_DIR;

double value(const EstimateTable& t, std::size_t row, const std::string& column) {
  return t.rows.at(row).values.at(t.valueIndex(column).value()).value();
}

// ---- panel weights -----------------------------------------------------------

Outcome panelWeightExactness() {
  double worst = 0;
  for (int n = 1; n <= 10; ++n) {
    for (Method m : {Method::SMA, Method::LMA}) {
      const auto w = panelWeights(m, n);
      worst = std::max(worst, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
    }
    for (int k = 1; k <= 19; ++k) {
      const auto w = panelWeights(Method::EMA, n, 0.05 * k);
      worst = std::max(worst, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
    }
  }
  if (worst > 1e-12) return fail("weight sum off by " + num(worst));
  const double expected[] = {0.03226, 0.06452, 0.12903, 0.25806, 0.51613};
  const auto w = panelWeights(Method::EMA, 5, 0.5);
  for (int i = 0; i < 5; ++i)
    if (std::abs(w[static_cast<std::size_t>(i)] - expected[i]) > 1e-5)
      return fail("EMA(5, 0.5) weight " + std::to_string(i + 1) + " = " + num(w[static_cast<std::size_t>(i)]));
  return pass("max sum error " + num(worst) + "; EMA(5, 0.5) = [0.03226 .. 0.51613]");
}

Outcome limitBehavior() {
  for (int n = 1; n <= 10; ++n) {
    const auto sma = panelWeights(Method::SMA, n);
    const auto nearOne = panelWeights(Method::EMA, n, 1 - 1e-6);
    for (int p = 0; p < n; ++p)
      if (std::abs(nearOne[static_cast<std::size_t>(p)] - sma[static_cast<std::size_t>(p)]) > 1e-4)
        return fail("lambda near 1 differs from SMA at N=" + std::to_string(n));
    const auto nearZero = panelWeights(Method::EMA, n, 1e-6);
    if (!(nearZero.back() > 0.9999)) return fail("lambda near 0 leaves " + num(nearZero.back()) + " on panel N");
  }
  return pass("N = 1..10");
}

// ---- estimation ----------------------------------------------------------------

Outcome singleStratumReduction() {
  std::mt19937_64 gen(42);
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 60)(gen);
    const double area = std::uniform_real_distribution<double>(10, 1e6)(gen);
    std::vector<double> y(n);
    for (auto& v : y) v = std::uniform_real_distribution<double>(0, 500)(gen);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double ss = 0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double s2 = ss / static_cast<double>(n - 1);
    const double expected = area * area * s2 / static_cast<double>(n);

    StratumSample s;
    s.weight = 1.0;
    s.plots = n;
    for (double v : y) s.nonzero.push_back({v, 1.0});
    const auto total = postStratifiedTotal({UnitSample{area, {s}, "u"}});
    worst = std::max(worst, std::abs(total.variance - expected) / expected);
  }
  if (worst > 1e-12) return fail("max relative error " + num(worst));
  return pass("100 value sets, max relative error " + num(worst));
}

/// A nontrivial record predicate for the family's record table.
std::optional<std::string> recordDomain(Family f) {
  switch (f) {
    case Family::Area: return std::nullopt;
    case Family::Dwm: return "VOL_ACRE > 50";
    case Family::Invasive: return "COVER_PCT >= 10";
    case Family::Seedling: return "SPCD != 12";
    default: return "DIA >= 3 & SPCD != 12";
  }
}

Outcome oracleEquivalence() {
  const Family families[] = {Family::Tpa,      Family::Biomass,   Family::Area,     Family::GrowMort,
                             Family::VitalRates, Family::Dwm,     Family::Diversity, Family::Invasive,
                             Family::Seedling, Family::StandStruct};
  std::size_t comparisons = 0, rows = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const ForestDatabase db = randomDatabase(seed);
    for (Family f : families) {
      EstimatorRequest req;
      req.family = f;
      req.variance = true;
      // Rotate methods and grouping so every path is covered across the sweep.
      req.method = static_cast<Method>(seed % 5);
      if (req.method == Method::EMA) req.lambdas = {0.3, 0.7};
      if (seed % 4 == 1) req.grpBy = {"OWNCD"};
      if (seed % 4 == 2) req.grpBy = {"FORTYPCD == 500"};
      if (seed % 4 == 3 && (f == Family::Tpa || f == Family::Biomass || f == Family::GrowMort)) {
        req.bySpecies = true;
        req.bySizeClass = true;
      }
      if (seed % 6 == 0) req.treeDomain = recordDomain(f);
      if (seed % 5 == 0) req.areaDomain = "STDAGE > 30";
      const auto engine = estimate(db, req);
      const auto oracle = bruteForceEstimate(db, req);
      const auto problems = compareTables(engine, oracle, 1e-9);
      if (!problems.empty())
        return fail("seed " + std::to_string(seed) + " " + std::string(toString(f)) + ": " + problems.front());
      ++comparisons;
      rows += oracle.rows.size();
    }
  }
  return pass(std::to_string(comparisons) + " comparisons, " + std::to_string(rows) + " rows");
}

Outcome handDerivedFixture() {
  const ForestDatabase db = loadDatabase(kFixtures / "SYNTH-1");
  EstimatorRequest req;
  const auto t = tpa(db, req);
  if (t.rows.size() != 1) return fail("expected one row");
  const double est = value(t, 0, "TPA"), se = value(t, 0, "TPA_SE");
  if (std::abs(est - 6.0) > 1e-12 || std::abs(se - 40.82) > 0.01)
    return fail("TPA " + num(est) + " SE% " + num(se));
  EstimatorRequest a;
  a.areaDomain = "OWNCD == 31";
  const auto ar = area(db, a);
  if (ar.rows.size() != 1) return fail("area: expected one row");
  const double acres = value(ar, 0, "AREA_TOTAL");
  if (acres != 500.0) return fail("area " + num(acres, 17));
  return pass("TPA " + num(est) + ", SE% " + num(se, 4) + ", owner-31 area " + num(acres));
}

// ---- Monte Carlo ---------------------------------------------------------------

constexpr std::size_t kReplicates = 2000;
constexpr std::size_t kPopulation = 10000;

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Outcome monteCarloUnbiasedness() {
  const Population pop = makePopulation(kMonteCarloSeed, kPopulation, 0.0);
  const auto ti = monteCarloBiasVariance(pop, Method::TI, 0, kReplicates, kMonteCarloSeed, 40, workers());
  const auto sma = monteCarloBiasVariance(pop, Method::SMA, 0, kReplicates, kMonteCarloSeed, 40, workers());
  const double biasTi = std::abs(ti.lagBias) / ti.truth, biasSma = std::abs(sma.lagBias) / sma.truth;
  const double varRatio = ti.meanReportedVariance / ti.empiricalVariance;
  const std::string detail = "truth " + num(ti.truth) + "; TI rel. bias " + num(biasTi, 3) + ", SMA rel. bias " +
                             num(biasSma, 3) + "; TI reported/empirical variance " + num(varRatio, 4);
  if (biasTi >= 0.01 || biasSma >= 0.01 || std::abs(varRatio - 1) > 0.15) return fail(detail);
  return pass(detail);
}

Outcome tradeOff() {
  const Population pop = makePopulation(kMonteCarloSeed + 1, kPopulation, 0.05);
  const unsigned w = workers();
  const auto sma = monteCarloBiasVariance(pop, Method::SMA, 0, kReplicates, kMonteCarloSeed + 1, 40, w);
  const auto ema = monteCarloBiasVariance(pop, Method::EMA, 0.5, kReplicates, kMonteCarloSeed + 1, 40, w);
  const auto ann = monteCarloBiasVariance(pop, Method::Annual, 0, kReplicates, kMonteCarloSeed + 1, 40, w);
  const double truth = pop.truth();

  auto absBias = [&](const MonteCarloResult& r, const std::vector<std::size_t>& idx) {
    double s = 0;
    for (auto i : idx) s += r.estimates[i];
    return std::abs(s / static_cast<double>(idx.size()) - truth);
  };
  auto variance = [](const MonteCarloResult& r, const std::vector<std::size_t>& idx) {
    double s = 0, ss = 0;
    for (auto i : idx) s += r.estimates[i];
    const double m = s / static_cast<double>(idx.size());
    for (auto i : idx) ss += (r.estimates[i] - m) * (r.estimates[i] - m);
    return ss / static_cast<double>(idx.size() - 1);
  };
  constexpr std::size_t kResamples = 1000;
  const double b1 = bootstrapLowerBound(
      kReplicates, [&](const auto& idx) { return absBias(sma, idx) - absBias(ema, idx); }, kResamples, 11);
  const double b2 = bootstrapLowerBound(
      kReplicates, [&](const auto& idx) { return absBias(ema, idx) - absBias(ann, idx); }, kResamples, 12);
  const double v1 = bootstrapLowerBound(
      kReplicates, [&](const auto& idx) { return variance(ann, idx) - variance(ema, idx); }, kResamples, 13);
  const double v2 = bootstrapLowerBound(
      kReplicates, [&](const auto& idx) { return variance(ema, idx) - variance(sma, idx); }, kResamples, 14);

  const std::string detail = "|bias| SMA " + num(std::abs(sma.lagBias), 4) + " > EMA " +
                             num(std::abs(ema.lagBias), 4) + " > ANNUAL " + num(std::abs(ann.lagBias), 4) +
                             "; var ANNUAL " + num(ann.empiricalVariance, 4) + " > EMA " +
                             num(ema.empiricalVariance, 4) + " > SMA " + num(sma.empiricalVariance, 4) +
                             "; 95% lower bounds " + num(b1, 3) + ", " + num(b2, 3) + ", " + num(v1, 3) + ", " +
                             num(v2, 3);
  if (b1 <= 0 || b2 <= 0 || v1 <= 0 || v2 <= 0) return fail(detail);
  return pass(detail);
}

// ---- CLI determinism -----------------------------------------------------------

Outcome determinism() {
  const auto tmp = std::filesystem::temp_directory_path() / "timberline-acceptance-random";
  std::filesystem::remove_all(tmp);
  std::filesystem::create_directories(tmp);
  writeDatabase(randomDatabase(2024), tmp);

  std::vector<std::vector<std::string>> commands;
  const char* estimators[] = {"tpa", "biomass", "area", "growmort", "vitalrates",
                              "dwm", "diversity", "invasive", "seedling", "standstruct"};
  std::vector<std::string> dbs = {tmp.string()};
  for (auto name : kFixtureNames) dbs.push_back((kFixtures / std::string(name)).string());
  for (const auto& db : dbs) {
    for (const char* e : estimators) {
      commands.push_back({e, "--db", db});
      commands.push_back({e, "--db", db, "--method", "EMA", "--lambda", "0.2,0.5", "--grp-by", "OWNCD", "--variance"});
      commands.push_back({e, "--db", db, "--by-plot", "--format", "json"});
    }
  }
  std::size_t runs = 0;
  for (const auto& base : commands) {
    std::string reference;
    for (const char* w : {"1", "2", "8"}) {
      auto args = base;
      args.push_back("--workers");
      args.push_back(w);
      std::ostringstream out, err;
      const int code = cli::run(args, out, err);
      // A missing evaluation type is a data error; it must still be deterministic.
      const std::string text = std::to_string(code) + "\n" + out.str() + "\n" + err.str();
      if (std::string(w) == "1") reference = text;
      else if (text != reference) {
        std::string joined;
        for (const auto& a : base) joined += a + " ";
        return fail("output differs with --workers " + std::string(w) + ": " + joined);
      }
      ++runs;
    }
  }
  std::filesystem::remove_all(tmp);
  return pass(std::to_string(runs) + " runs over " + std::to_string(commands.size()) + " commands");
}

// ---- real-data reproductions ---------------------------------------------------

std::optional<std::filesystem::path> dataDir(const char* var) {
  const char* v = std::getenv(var);
  if (!v || !*v || !std::filesystem::is_directory(v)) return std::nullopt;
  return std::filesystem::path(v);
}

struct Reference {
  std::string label;
  Family family;
  std::string column;
  double estimate;
  double se;
  double divisor = 1.0;
};

Outcome connecticutTable() {
  const auto dir = dataDir("TIMBERLINE_CT_DIR");
  if (!dir) return {Status::Skip, "TIMBERLINE_CT_DIR not set"};
  const ForestDatabase db = loadDatabase(*dir, {"CT"});
  const std::vector<Reference> refs = {
      {"live TPA", Family::Tpa, "TPA", 432.63, 4.46},
      {"live BAA", Family::Tpa, "BAA", 121.19, 2.13},
      {"net volume", Family::Biomass, "NETVOL_ACRE", 2625.99, 2.65},
      {"sawlog volume", Family::Biomass, "SAWVOL_ACRE", 1648.77, 3.56},
      {"AG biomass", Family::Biomass, "BIO_AG_ACRE", 75.99, 2.38},
      {"AG carbon", Family::Biomass, "CARB_AG_ACRE", 37.99, 2.38},
      {"biomass growth", Family::VitalRates, "BIO_GROW_AC", 1.06, 6.39},
      {"mortality", Family::GrowMort, "MORT_TPA", 1.47, 6.93},
      {"removals", Family::GrowMort, "REMV_TPA", 0.36, 31.09},
      {"CWD volume", Family::Dwm, "VOL_ACRE", 299.87, 23.92},
      {"CWD biomass", Family::Dwm, "BIO_ACRE", 3.08, 25.25},
      {"CWD carbon", Family::Dwm, "CARB_ACRE", 1.52, 25.14},
      {"forest area", Family::Area, "AREA_TOTAL", 1789.61, 2.29, 1000.0},
  };
  std::string mismatches;
  for (const auto& r : refs) {
    EstimatorRequest req;
    req.family = r.family;
    req.year = 2018;
    const auto t = estimate(db, req);
    std::optional<std::size_t> row;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (r.family != Family::Dwm) row = i;
      else if (formatValue(t.rows[i].keys[*t.keyIndex("FUEL_TYPE")]) == "1000HR") row = i;
    }
    if (!row) {
      mismatches += r.label + " missing; ";
      continue;
    }
    const double est = value(t, *row, r.column) / r.divisor;
    const double se = value(t, *row, r.column + "_SE");
    if (std::abs(est - r.estimate) > 0.005 + 1e-9 || std::abs(se - r.se) > 0.005 + 1e-9)
      mismatches += r.label + " " + num(est, 8) + " & " + num(se, 6) + "; ";
  }
  if (!mismatches.empty()) return fail(mismatches);
  return pass("13 attribute rows match to two decimals");
}

Outcome rhodeIslandListing() {
  const auto dir = dataDir("TIMBERLINE_RI_DIR");
  if (!dir) return {Status::Skip, "TIMBERLINE_RI_DIR not set"};
  const ForestDatabase db = loadDatabase(*dir, {"RI"});
  EstimatorRequest req;
  req.year = 2018;
  const auto t = biomass(db, req);
  if (t.rows.empty()) return fail("no 2018 row");
  const double vol = value(t, 0, "NETVOL_ACRE"), bio = value(t, 0, "BIO_AG_ACRE");
  const std::string detail = "NETVOL_ACRE " + num(vol, 6) + ", BIO_AG_ACRE " + num(bio, 4);
  if (std::abs(vol - 2491) > 0.5 || std::abs(bio - 70.4) > 0.5) return fail(detail);
  return pass(detail);
}

struct Criterion {
  std::string name;
  double budgetSeconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"panel-weight exactness", 1, panelWeightExactness},
      {"limit behavior", 1, limitBehavior},
      {"single-stratum reduction", 1, singleStratumReduction},
      {"oracle equivalence", 120, oracleEquivalence},
      {"hand-derived fixture", 1, handDerivedFixture},
      {"Monte Carlo unbiasedness", 300, monteCarloUnbiasedness},
      {"smoothing/precision trade-off", 300, tradeOff},
      {"determinism across workers", 60, determinism},
      {"Connecticut 2018 reproduction", 600, connecticutTable},
      {"Rhode Island biomass listing", 600, rhodeIslandListing},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Status::Pass && secs > c.budgetSeconds) o = fail(o.detail + "; over the time budget");
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    std::cout << tag << "  " << c.name << "  (" << o.detail << "; " << std::fixed << std::setprecision(2) << secs
              << " s)" << std::defaultfloat << std::endl;
    failures += o.status == Status::Fail;
  }
  return failures == 0 ? 0 : 1;
}
