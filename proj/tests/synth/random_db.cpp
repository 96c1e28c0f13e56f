#include "random_db.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace timberline::synth {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(gen_); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }
  // Rounded values keep CSV round trips exact and sums readable.
  double rounded(double lo, double hi, double step) { return std::round(uniform(lo, hi) / step) * step; }

 private:
  std::mt19937_64 gen_;
};

const std::vector<int> kSpecies = {12, 129, 316, 833};
const std::vector<int> kOwners = {11, 31, 46};
const std::vector<std::string> kInvasives = {"ALPE4", "CEOR7", "ROMU"};
const std::vector<FuelType> kFuels = {FuelType::Hr1, FuelType::Hr10, FuelType::Hr100, FuelType::Hr1000,
                                      FuelType::Duff, FuelType::Litter, FuelType::Pile};

/// Units and strata for one evaluation; returns the stratum CNs.
std::vector<std::string> addDesign(Tables& t, Rng& rng, int evalid, EvalType type, int reportYear, int panels,
                                   int units, const std::vector<int>& strataPerUnit) {
  Evaluation e;
  e.evalid = evalid;
  e.statecd = 44;
  e.type = type;
  e.reportYear = reportYear;
  e.startInvyr = reportYear - panels + 1;
  e.endInvyr = reportYear;
  t.evaluations.rows.push_back(e);
  std::vector<std::string> strata;
  for (int u = 0; u < units; ++u) {
    const std::string unit = "U" + std::to_string(evalid) + "_" + std::to_string(u);
    t.estimationUnits.rows.push_back({unit, evalid, rng.rounded(500, 20000, 10)});
    const int k = strataPerUnit[static_cast<std::size_t>(u)];
    std::vector<double> w(static_cast<std::size_t>(k));
    double sum = 0;
    for (auto& x : w) sum += (x = rng.rounded(1, 10, 1));
    double used = 0;
    for (int h = 0; h < k; ++h) {
      Stratum s;
      s.cn = unit + "_S" + std::to_string(h);
      s.estnUnitCn = unit;
      // The last weight absorbs rounding so the unit sums to exactly 1.
      s.weight = h + 1 == k ? 1.0 - used : w[static_cast<std::size_t>(h)] / sum;
      used += s.weight;
      s.adjSubp = rng.rounded(1.0, 1.2, 0.01);
      s.adjMicr = rng.rounded(1.0, 1.3, 0.01);
      s.adjMacr = rng.rounded(1.0, 1.2, 0.01);
      t.strata.rows.push_back(s);
      strata.push_back(s.cn);
    }
  }
  return strata;
}

}  // namespace

ForestDatabase randomDatabase(std::uint64_t seed, const RandomDbLimits& limits) {
  Rng rng(seed);
  Tables t;
  const int nPlots = rng.integer(8, limits.maxPlots);
  const int units = rng.integer(1, limits.maxUnits);
  std::vector<int> strataPerUnit(static_cast<std::size_t>(units), 1);
  int strataLeft = limits.maxStrata - units;
  for (auto& k : strataPerUnit) {
    const int extra = rng.integer(0, strataLeft);
    k += extra;
    strataLeft -= extra;
  }
  const int panels = rng.integer(1, 5);
  const int reportYear = 2018;

  for (int i = 0; i < nPlots; ++i) {
    PlotRecord p;
    p.cn = "R" + std::to_string(i);
    p.statecd = 44;
    p.plot = i + 1;
    p.lon = rng.rounded(-71.9, -71.1, 0.001);
    p.lat = rng.rounded(41.1, 42.0, 0.001);
    p.remper = rng.chance(0.97) ? std::optional<double>(rng.rounded(4.5, 6.5, 0.1)) : std::nullopt;
    p.plotStatus = 1;
    p.designcd = 1;
    p.invasiveSampling = rng.chance(0.7) ? 1 : 0;
    t.plots.rows.push_back(p);

    const int nCond = rng.integer(1, 3);
    double left = 1.0;
    for (int c = 1; c <= nCond; ++c) {
      ConditionRecord cond;
      cond.cn = p.cn + "C" + std::to_string(c);
      cond.pltCn = p.cn;
      cond.condid = c;
      cond.condStatus = rng.chance(0.8) ? 1 : 2;
      const double prop = c == nCond ? left : std::min(left, rng.rounded(0.1, 0.6, 0.05));
      left -= prop;
      cond.condpropUnadj = std::max(0.0, std::round(prop * 100) / 100);
      cond.fortypcd = rng.chance(0.5) ? 500 : 800;
      cond.owncd = rng.pick(kOwners);
      if (rng.chance(0.8)) cond.stdage = rng.integer(5, 120);
      t.conditions.rows.push_back(cond);
    }

    const int nTrees = rng.integer(0, 8);
    for (int k = 0; k < nTrees; ++k) {
      TreeRecord tr;
      tr.cn = p.cn + "T" + std::to_string(k);
      tr.pltCn = p.cn;
      tr.condid = rng.integer(1, nCond);
      const double u = rng.uniform(0, 1);
      tr.statuscd = u < 0.8 ? 1 : u < 0.92 ? 2 : 3;
      tr.spcd = rng.pick(kSpecies);
      const bool sapling = rng.chance(0.3);
      tr.dia = sapling ? rng.rounded(1.0, 4.9, 0.1) : rng.rounded(5.0, 30.0, 0.1);
      tr.basis = sapling ? TreeBasis::Microplot : TreeBasis::Subplot;
      tr.tpaUnadj = sapling ? 74.965 : 6.018;
      if (!sapling) {
        tr.volcfnet = rng.rounded(1, 80, 0.5) * (*tr.dia / 10);
        tr.volcsnet = rng.chance(0.6) ? std::optional<double>(*tr.volcfnet * 0.7) : std::nullopt;
      }
      tr.drybioAg = rng.rounded(10, 3000, 1);
      tr.drybioBg = std::round(*tr.drybioAg * 0.2);
      tr.carbonAg = std::round(*tr.drybioAg * 0.5);
      tr.carbonBg = std::round(*tr.drybioBg * 0.5);
      if (tr.statuscd == 1) {
        if (rng.chance(0.8)) {
          tr.component = Component::Survivor;
          tr.prevdia = std::max(1.0, *tr.dia - rng.rounded(0.1, 1.5, 0.1));
          tr.tpagrowUnadj = *tr.tpaUnadj;
          if (tr.volcfnet) tr.prevVolcfnet = std::max(0.0, *tr.volcfnet - rng.rounded(0.5, 5, 0.5));
          tr.prevDrybioAg = std::max(0.0, *tr.drybioAg - rng.rounded(5, 100, 1));
        } else {
          tr.component = Component::Ingrowth;
          tr.tpagrowUnadj = *tr.tpaUnadj;
        }
      } else if (tr.statuscd == 2) {
        tr.component = Component::Mortality;
        tr.tpamortUnadj = *tr.tpaUnadj;
      } else {
        tr.component = Component::Cut;
        tr.tparemvUnadj = *tr.tpaUnadj;
      }
      t.trees.rows.push_back(tr);
    }

    for (int c = 1; c <= nCond; ++c) {
      if (rng.chance(0.4)) {
        const int count = rng.integer(1, 2);
        std::vector<int> used;
        for (int k = 0; k < count; ++k) {
          const int sp = rng.pick(kSpecies);
          if (std::find(used.begin(), used.end(), sp) != used.end()) continue;
          used.push_back(sp);
          t.seedlings.rows.push_back({p.cn, c, sp, static_cast<double>(rng.integer(1, 12)), 74.965});
        }
      }
      if (rng.chance(0.5)) {
        for (FuelType f : kFuels)
          if (rng.chance(0.5))
            t.dwm.rows.push_back({p.cn, c, f, rng.rounded(0, 400, 0.5), rng.rounded(0, 10, 0.01),
                                  rng.rounded(0, 5, 0.01)});
      }
      if (*p.invasiveSampling == 1 && rng.chance(0.4)) {
        std::vector<std::string> used;
        for (int k = 0; k < rng.integer(1, 2); ++k) {
          const std::string sp = rng.pick(kInvasives);
          if (std::find(used.begin(), used.end(), sp) != used.end()) continue;
          used.push_back(sp);
          t.invasives.rows.push_back({p.cn, c, sp, rng.rounded(0, 100, 0.5)});
        }
      }
    }
  }

  // Panel year per plot, shared by every evaluation of the cycle.
  std::vector<int> panelYear;
  for (int i = 0; i < nPlots; ++i) panelYear.push_back(reportYear - panels + 1 + rng.integer(0, panels - 1));
  for (int i = 0; i < nPlots; ++i) {
    t.plots.rows[static_cast<std::size_t>(i)].invyr = panelYear[static_cast<std::size_t>(i)];
    t.plots.rows[static_cast<std::size_t>(i)].measyear = panelYear[static_cast<std::size_t>(i)];
  }

  // Some strata are left empty or nearly so to exercise the edge cases.
  const bool starve = rng.chance(0.3);
  auto assign = [&](const std::vector<std::string>& strata, double keep) {
    for (int i = 0; i < nPlots; ++i) {
      if (keep < 1.0 && !rng.chance(keep)) continue;
      std::size_t h = static_cast<std::size_t>(rng.integer(0, static_cast<int>(strata.size()) - 1));
      if (starve && strata.size() > 1 && h == strata.size() - 1 && i > 0) h = 0;
      t.assignments.rows.push_back({"R" + std::to_string(i), strata[h], panelYear[static_cast<std::size_t>(i)]});
    }
  };
  assign(addDesign(t, rng, 441801, EvalType::Vol, reportYear, panels, units, strataPerUnit), 1.0);
  assign(addDesign(t, rng, 441803, EvalType::Grm, reportYear, panels, units, strataPerUnit), 1.0);
  assign(addDesign(t, rng, 441807, EvalType::Dwm, reportYear, panels, units, strataPerUnit), 1.0);
  if (rng.chance(0.3)) {
    // An older VOL evaluation over part of the plots; its report year is a separate slice.
    assign(addDesign(t, rng, 441701, EvalType::Vol, reportYear - 1, panels, units, strataPerUnit), 0.7);
  }

  t.species.rows = {{12, "balsam fir", "Abies", "Abies balsamea"},
                    {129, "eastern white pine", "Pinus", "Pinus strobus"},
                    {316, "red maple", "Acer", "Acer rubrum"},
                    {833, "northern red oak", "Quercus", "Quercus rubra"}};
  return ForestDatabase(std::move(t));
}

}  // namespace timberline::synth
