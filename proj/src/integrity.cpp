#include <cmath>
#include <map>
#include <set>
#include <string>

#include "timberline/database.hpp"
#include "timberline/value.hpp"

namespace timberline {

namespace {

class Report {
 public:
  void add(std::string table, std::string key, std::string rule) {
    out_.push_back({std::move(table), std::move(key), std::move(rule)});
  }
  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

std::string condKey(const std::string& pltCn, int condid) { return pltCn + "/" + std::to_string(condid); }

}  // namespace

std::vector<Violation> validateIntegrity(const ForestDatabase& db) {
  const Tables& t = db.tables();
  Report r;

  {
    std::set<std::string> seen;
    for (const auto& p : t.plots.rows) {
      if (!seen.insert(p.cn).second) r.add("PLOT", p.cn, "duplicate CN");
      if (p.remper && !(*p.remper > 0)) r.add("PLOT", p.cn, "REMPER > 0");
      if (p.lat && !(*p.lat >= -90 && *p.lat <= 90)) r.add("PLOT", p.cn, "LAT in [-90, 90]");
      if (p.lon && !(*p.lon >= -180 && *p.lon <= 180)) r.add("PLOT", p.cn, "LON in [-180, 180]");
    }
  }

  {
    std::set<std::string> seen;
    std::map<std::string, double> propByPlot;
    for (const auto& c : t.conditions.rows) {
      const std::string key = condKey(c.pltCn, c.condid);
      if (!seen.insert(key).second) r.add("COND", key, "duplicate (PLT_CN, CONDID)");
      if (!db.plotIndex(c.pltCn)) r.add("COND", key, "cond→plot");
      if (c.condpropUnadj) {
        if (!(*c.condpropUnadj >= 0 && *c.condpropUnadj <= 1)) r.add("COND", key, "CONDPROP_UNADJ in [0, 1]");
        propByPlot[c.pltCn] += *c.condpropUnadj;
      }
    }
    for (const auto& [plt, sum] : propByPlot)
      if (sum > 1 + 1e-6) r.add("COND", plt, "Σ CONDPROP_UNADJ ≤ 1");
  }

  {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.trees.size(); ++i) {
      const auto& tr = t.trees.rows[i];
      if (!seen.insert(tr.cn).second) r.add("TREE", tr.cn, "duplicate CN");
      if (!db.plotIndex(tr.pltCn)) r.add("TREE", tr.cn, "tree→plot");
      else if (!db.conditionOfTree(i)) r.add("TREE", tr.cn, "tree→cond");
      if (tr.dia && !(*tr.dia > 0)) r.add("TREE", tr.cn, "DIA > 0");
      if (tr.tpaUnadj && !(*tr.tpaUnadj >= 0)) r.add("TREE", tr.cn, "TPA_UNADJ ≥ 0");
      if (tr.basis && tr.dia && *tr.dia > 0) {
        const bool sapling = *tr.dia >= 1.0 && *tr.dia < 5.0;
        if (*tr.basis == TreeBasis::Microplot && !sapling)
          r.add("TREE", tr.cn, "MICR basis requires 1.0 ≤ DIA < 5.0");
        if (*tr.basis != TreeBasis::Microplot && *tr.dia < 5.0)
          r.add("TREE", tr.cn, "SUBP/MACR basis requires DIA ≥ 5.0");
      }
    }
  }

  for (std::size_t i = 0; i < t.seedlings.size(); ++i) {
    const auto& s = t.seedlings.rows[i];
    const std::string key = condKey(s.pltCn, s.condid) + "/" + std::to_string(s.spcd);
    if (!db.plotIndex(s.pltCn)) r.add("SEEDLING", key, "seedling→plot");
    else if (!db.conditionOfSeedling(i)) r.add("SEEDLING", key, "seedling→cond");
    if (!(s.treecount >= 1)) r.add("SEEDLING", key, "TREECOUNT ≥ 1");
    if (!(s.tpaUnadj > 0)) r.add("SEEDLING", key, "TPA_UNADJ > 0");
  }

  {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.dwm.size(); ++i) {
      const auto& d = t.dwm.rows[i];
      const std::string key = condKey(d.pltCn, d.condid) + "/" + std::string(toString(d.fuelType));
      if (!seen.insert(key).second) r.add("COND_DWM_CALC", key, "duplicate (PLT_CN, CONDID, FUEL_TYPE)");
      if (!db.plotIndex(d.pltCn)) r.add("COND_DWM_CALC", key, "dwm→plot");
      else if (!db.conditionOfDwm(i)) r.add("COND_DWM_CALC", key, "dwm→cond");
      if (!(d.volAcre >= 0 && d.bioAcre >= 0 && d.carbAcre >= 0))
        r.add("COND_DWM_CALC", key, "per-acre values ≥ 0");
    }
  }

  for (std::size_t i = 0; i < t.invasives.size(); ++i) {
    const auto& v = t.invasives.rows[i];
    const std::string key = condKey(v.pltCn, v.condid) + "/" + v.spcd;
    if (!db.plotIndex(v.pltCn)) r.add("INVASIVE_SUBPLOT_SPP", key, "invasive→plot");
    else if (!db.conditionOfInvasive(i)) r.add("INVASIVE_SUBPLOT_SPP", key, "invasive→cond");
    if (!(v.coverPct >= 0 && v.coverPct <= 100)) r.add("INVASIVE_SUBPLOT_SPP", key, "COVER_PCT in [0, 100]");
  }

  {
    std::set<int> seen;
    for (const auto& e : t.evaluations.rows)
      if (!seen.insert(e.evalid).second) r.add("POP_EVAL", std::to_string(e.evalid), "duplicate EVALID");
  }

  {
    std::set<std::string> seen;
    for (const auto& u : t.estimationUnits.rows) {
      if (!seen.insert(u.cn).second) r.add("POP_ESTN_UNIT", u.cn, "duplicate CN");
      if (!db.evaluationIndex(u.evalid)) r.add("POP_ESTN_UNIT", u.cn, "unit→evaluation");
      if (!(u.areaUsed >= 0)) r.add("POP_ESTN_UNIT", u.cn, "AREA_USED ≥ 0");
    }
  }

  {
    std::set<std::string> seen;
    std::map<std::string, double> weightByUnit;
    for (const auto& s : t.strata.rows) {
      if (!seen.insert(s.cn).second) r.add("POP_STRATUM", s.cn, "duplicate CN");
      if (!db.unitIndex(s.estnUnitCn)) r.add("POP_STRATUM", s.cn, "stratum→unit");
      if (!(s.weight > 0 && s.weight <= 1)) r.add("POP_STRATUM", s.cn, "STRATUM_WGT in (0, 1]");
      if (!(s.adjSubp > 0 && s.adjMicr > 0 && s.adjMacr > 0)) r.add("POP_STRATUM", s.cn, "adjustment factors > 0");
      weightByUnit[s.estnUnitCn] += s.weight;
    }
    for (const auto& [unit, sum] : weightByUnit)
      if (std::abs(sum - 1.0) > 1e-9) r.add("POP_STRATUM", unit, "Σ W_h ≠ 1");
  }

  {
    // Each plot may appear in many evaluations but in one stratum per evaluation.
    std::map<std::pair<std::string, int>, int> perEval;
    for (const auto& a : t.assignments.rows) {
      const std::string key = a.pltCn + "@" + a.stratumCn;
      if (!db.plotIndex(a.pltCn)) r.add("POP_PLOT_STRATUM_ASSGN", key, "assignment→plot");
      auto s = db.stratumIndex(a.stratumCn);
      if (!s) {
        r.add("POP_PLOT_STRATUM_ASSGN", key, "assignment→stratum");
        continue;
      }
      auto u = db.unitIndex(t.strata.rows[*s].estnUnitCn);
      if (!u) continue;
      const int evalid = t.estimationUnits.rows[*u].evalid;
      if (++perEval[{a.pltCn, evalid}] == 2)
        r.add("POP_PLOT_STRATUM_ASSGN", a.pltCn + "@" + std::to_string(evalid), "one stratum per plot per evaluation");
    }
  }

  {
    std::set<int> seen;
    for (const auto& s : t.species.rows)
      if (!seen.insert(s.spcd).second) r.add("REF_SPECIES", std::to_string(s.spcd), "duplicate SPCD");
  }

  return r.take();
}

}  // namespace timberline
