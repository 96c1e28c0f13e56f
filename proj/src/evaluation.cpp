#include "timberline/evaluation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "timberline/error.hpp"

namespace timberline {

std::vector<int> findEvaluations(const ForestDatabase& db, std::optional<int> year, std::optional<EvalType> type) {
  std::vector<int> out;
  for (const auto& e : db.tables().evaluations.rows)
    if ((!year || e.reportYear == *year) && (!type || e.type == *type)) out.push_back(e.evalid);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

template <class R, class Keep>
Table<R> subset(const Table<R>& in, Keep keep) {
  Table<R> out;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (keep(in.rows[i])) rows.push_back(i);
  out.rows.reserve(rows.size());
  for (auto i : rows) out.rows.push_back(in.rows[i]);
  for (const auto& e : in.extras) {
    ExtraColumn c{e.name, e.type, {}};
    c.values.reserve(rows.size());
    for (auto i : rows) c.values.push_back(e.values[i]);
    out.extras.push_back(std::move(c));
  }
  return out;
}

std::set<int> selectEvaluations(const Tables& t, const ClipOptions& o) {
  std::set<int> chosen;
  const auto& evals = t.evaluations.rows;

  if (!o.evalids.empty()) {
    std::set<int> known;
    for (const auto& e : evals) known.insert(e.evalid);
    for (int id : o.evalids) {
      if (!known.count(id)) {
        std::string list;
        for (int k : known) list += (list.empty() ? "" : ", ") + std::to_string(k);
        throw DataError("unknown evalid " + std::to_string(id) + " (known: " + (list.empty() ? "none" : list) + ")");
      }
      chosen.insert(id);
    }
  } else {
    for (const auto& e : evals) chosen.insert(e.evalid);
  }

  auto stateYears = [&]() {
    std::map<int, std::set<int>> years;
    for (const auto& e : evals)
      if (chosen.count(e.evalid)) years[e.statecd].insert(e.reportYear);
    return years;
  };

  if (o.matchEval) {
    auto years = stateYears();
    std::set<int> common;
    bool first = true;
    for (const auto& [state, ys] : years) {
      if (first) common = ys;
      else {
        std::set<int> next;
        std::set_intersection(common.begin(), common.end(), ys.begin(), ys.end(), std::inserter(next, next.end()));
        common = std::move(next);
      }
      first = false;
    }
    for (const auto& e : evals)
      if (!common.count(e.reportYear)) chosen.erase(e.evalid);
  }

  if (o.year)
    for (const auto& e : evals)
      if (e.reportYear != *o.year) chosen.erase(e.evalid);

  if (o.mostRecent) {
    auto years = stateYears();
    for (const auto& e : evals)
      if (chosen.count(e.evalid) && e.reportYear != *years[e.statecd].rbegin()) chosen.erase(e.evalid);
  }
  return chosen;
}

}  // namespace

ForestDatabase clip(const ForestDatabase& db, const ClipOptions& o) {
  const int exclusive = int(o.mostRecent) + int(!o.evalids.empty()) + int(o.year.has_value());
  if (exclusive > 1) throw UsageError("choose at most one of most-recent, evalid, and year");

  const Tables& t = db.tables();
  const std::set<int> evals = selectEvaluations(t, o);

  std::unordered_set<std::string> units, strata, plots;
  for (const auto& u : t.estimationUnits.rows)
    if (evals.count(u.evalid)) units.insert(u.cn);
  for (const auto& s : t.strata.rows)
    if (units.count(s.estnUnitCn)) strata.insert(s.cn);

  auto plotKept = [&](const std::string& cn) {
    auto p = db.plotIndex(cn);
    if (!p) return false;
    if (!o.mask) return true;
    const auto& rec = t.plots.rows[*p];
    if (!rec.lat || !rec.lon) return false;
    return o.mask->locate({*rec.lon, *rec.lat}).has_value();
  };
  for (const auto& a : t.assignments.rows)
    if (strata.count(a.stratumCn) && plotKept(a.pltCn)) plots.insert(a.pltCn);

  Tables out;
  out.evaluations = subset(t.evaluations, [&](const Evaluation& e) { return evals.count(e.evalid) > 0; });
  out.estimationUnits = subset(t.estimationUnits, [&](const EstimationUnit& u) { return units.count(u.cn) > 0; });
  out.strata = subset(t.strata, [&](const Stratum& s) { return strata.count(s.cn) > 0; });
  out.assignments = subset(t.assignments, [&](const StratumAssignment& a) {
    return strata.count(a.stratumCn) && plots.count(a.pltCn);
  });
  out.plots = subset(t.plots, [&](const PlotRecord& p) { return plots.count(p.cn) > 0; });
  out.conditions = subset(t.conditions, [&](const ConditionRecord& c) { return plots.count(c.pltCn) > 0; });
  out.trees = subset(t.trees, [&](const TreeRecord& r) { return plots.count(r.pltCn) > 0; });
  out.seedlings = subset(t.seedlings, [&](const SeedlingRecord& r) { return plots.count(r.pltCn) > 0; });
  out.dwm = subset(t.dwm, [&](const DwmConditionRecord& r) { return plots.count(r.pltCn) > 0; });
  out.invasives = subset(t.invasives, [&](const InvasiveRecord& r) { return plots.count(r.pltCn) > 0; });
  out.species = t.species;
  return ForestDatabase(std::move(out));
}

}  // namespace timberline
