#include "timberline/engine.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "timberline/error.hpp"
#include "timberline/parallel.hpp"

namespace timberline::engine {

bool KeyLess::operator()(const Key& a, const Key& b) const {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = compareValues(a[i].sort, b[i].sort); c != 0) return c < 0;
    if (auto c = compareValues(a[i].label, b[i].label); c != 0) return c < 0;
  }
  return a.size() < b.size();
}

KeyPart sizeClassPart(std::optional<double> value, double width, double lower) {
  if (!value) return {};
  if (*value < lower) return {-1e308, "(-Inf, " + formatNumber(lower) + ")"};
  const double a = lower + width * std::floor((*value - lower) / width);
  return {a, "[" + formatNumber(a) + ", " + formatNumber(a + width) + ")"};
}

namespace {

// ---- group key layout --------------------------------------------------------

struct PartSpec {
  enum class Source { Polygon, Column, Predicate, Species, SizeClass } source;
  std::string column;
  bool areaLevel = true;
  domain::ColumnBinding binding{ColumnType::Number, 0};
  domain::BoundExpression predicate;
};

bool isIdentifier(const std::string& s) {
  static const std::regex ident("^[A-Za-z_][A-Za-z0-9_]*(\\.[A-Za-z_][A-Za-z0-9_]*)?$");
  return std::regex_match(s, ident);
}

std::vector<PartSpec> buildParts(const ForestDatabase& db, const FamilySpec& family, const EngineRequest& req) {
  const ColumnCatalog catalog(db, family.groupLeaf);
  std::vector<PartSpec> parts;
  if (req.polys) parts.push_back({PartSpec::Source::Polygon, "POLY_ID", true, {}, {}});
  for (const auto& g : req.grpBy) {
    PartSpec p{PartSpec::Source::Column, g, true, {}, {}};
    if (isIdentifier(g)) {
      p.binding = catalog.require(g, "grouping");
      p.areaLevel = ColumnCatalog::isAreaLevel(p.binding.slot);
    } else {
      const auto expr = domain::parse(g);
      p.source = PartSpec::Source::Predicate;
      p.predicate = domain::bind(expr, catalog.resolver(), "grouping expression");
      for (const auto& c : domain::referencedColumns(expr))
        if (!ColumnCatalog::isAreaLevel(catalog.require(c, "grouping expression").slot)) p.areaLevel = false;
    }
    parts.push_back(std::move(p));
  }
  if (req.bySpecies) {
    if (family.groupLeaf != RecordLevel::Tree && family.groupLeaf != RecordLevel::Seedling)
      throw UsageError(family.name + " does not support grouping by species");
    parts.push_back({PartSpec::Source::Species, "SPCD", false, {}, {}});
  }
  if (req.bySizeClass) {
    if (family.groupLeaf != RecordLevel::Tree) throw UsageError(family.name + " does not support size classes");
    parts.push_back({PartSpec::Source::SizeClass, "sizeClass", false, {}, {}});
  }
  std::set<std::string> seen;
  for (const auto& p : parts)
    if (!seen.insert(p.column).second) throw UsageError("grouping column " + p.column + " listed twice");
  for (const auto& k : family.familyKeys)
    if (seen.count(k)) throw UsageError("grouping column " + k + " is already part of " + family.name + " output");
  return parts;
}

// ---- evaluation slices and sample design -------------------------------------

struct StratumInfo {
  double weight = 0;
  std::string label;
  std::size_t row = 0;
  std::size_t n = 0;
  std::vector<std::size_t> nByPanel;
};

struct UnitInfo {
  double area = 0;
  std::string label;
  std::vector<StratumInfo> strata;
};

struct PlotInfo {
  std::size_t plot = 0;
  std::size_t unit = 0;
  std::size_t stratum = 0;
  std::size_t panel = 0;
};

struct Design {
  const Evaluation* eval = nullptr;
  std::vector<UnitInfo> units;
  std::vector<PlotInfo> plots;  // ascending plot index
  std::size_t panels = 1;
  std::vector<bool> panelPresent;
};

struct Slice {
  int year = 0;
  std::vector<Design> designs;
};

Design buildDesign(const ForestDatabase& db, const Evaluation& eval) {
  const Tables& t = db.tables();
  Design d;
  d.eval = &eval;
  std::map<std::string, std::size_t> unitOf;
  for (const auto& u : t.estimationUnits.rows) {
    if (u.evalid != eval.evalid) continue;
    unitOf[u.cn] = d.units.size();
    d.units.push_back({u.areaUsed, u.cn, {}});
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> stratumOf;
  for (std::size_t i = 0; i < t.strata.size(); ++i) {
    const auto& s = t.strata.rows[i];
    auto u = unitOf.find(s.estnUnitCn);
    if (u == unitOf.end()) continue;
    auto& unit = d.units[u->second];
    stratumOf[s.cn] = {u->second, unit.strata.size()};
    unit.strata.push_back({s.weight, s.cn, i, 0, {}});
  }

  struct Raw {
    std::size_t plot, unit, stratum;
    int year;
  };
  std::vector<Raw> raw;
  std::set<std::size_t> seen;
  for (const auto& a : t.assignments.rows) {
    auto s = stratumOf.find(a.stratumCn);
    if (s == stratumOf.end()) continue;
    auto p = db.plotIndex(a.pltCn);
    if (!p) throw IntegrityError("evaluation " + std::to_string(eval.evalid) + " assigns missing plot " + a.pltCn);
    if (!seen.insert(*p).second)
      throw IntegrityError("plot " + a.pltCn + " is assigned to more than one stratum in evaluation " +
                           std::to_string(eval.evalid));
    const auto& plot = t.plots.rows[*p];
    if (!isAnnualDesign(plot.designcd))
      throw DataError("plot " + plot.cn + " uses DESIGNCD " + std::to_string(*plot.designcd) +
                      "; only annual inventory designs are supported");
    raw.push_back({*p, s->second.first, s->second.second, a.panelYear});
  }
  std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.plot < b.plot; });

  // Panel p = INVYR - START_INVYR within the cycle; otherwise rank of distinct years.
  bool cycle = eval.startInvyr && eval.endInvyr && *eval.endInvyr >= *eval.startInvyr;
  if (cycle)
    for (const auto& r : raw)
      if (r.year < *eval.startInvyr || r.year > *eval.endInvyr) cycle = false;
  std::vector<int> years;
  if (cycle) {
    d.panels = static_cast<std::size_t>(*eval.endInvyr - *eval.startInvyr + 1);
  } else {
    std::set<int> ys;
    for (const auto& r : raw) ys.insert(r.year);
    years.assign(ys.begin(), ys.end());
    d.panels = std::max<std::size_t>(1, years.size());
  }
  d.panelPresent.assign(d.panels, false);
  for (auto& u : d.units)
    for (auto& s : u.strata) s.nByPanel.assign(d.panels, 0);
  for (const auto& r : raw) {
    const std::size_t panel =
        cycle ? static_cast<std::size_t>(r.year - *eval.startInvyr)
              : static_cast<std::size_t>(std::lower_bound(years.begin(), years.end(), r.year) - years.begin());
    d.plots.push_back({r.plot, r.unit, r.stratum, panel});
    auto& s = d.units[r.unit].strata[r.stratum];
    ++s.n;
    ++s.nByPanel[panel];
    d.panelPresent[panel] = true;
  }
  return d;
}

std::vector<Slice> selectSlices(const ForestDatabase& db, const FamilySpec& family, const EngineRequest& req,
                                Diagnostics& diag) {
  const auto& evals = db.tables().evaluations.rows;
  auto ofType = [&](EvalType type) {
    std::vector<const Evaluation*> out;
    for (const auto& e : evals)
      if (e.type == type) out.push_back(&e);
    return out;
  };
  auto chosen = ofType(family.evalType);
  if (chosen.empty() && family.fallbackToVol) {
    chosen = ofType(EvalType::Vol);
    if (!chosen.empty())
      diag.add("no " + std::string(toString(family.evalType)) + " evaluation found; using VOL evaluations");
  }
  if (chosen.empty())
    throw DataError(family.name + " needs a " + std::string(toString(family.evalType)) +
                    " evaluation and the database has none");

  if (!req.evalids.empty()) {
    std::erase_if(chosen, [&](const Evaluation* e) {
      return std::find(req.evalids.begin(), req.evalids.end(), e->evalid) == req.evalids.end();
    });
    if (chosen.empty())
      throw DataError("none of the requested evalids is a " + std::string(toString(family.evalType)) + " evaluation");
  }
  if (req.year) {
    std::erase_if(chosen, [&](const Evaluation* e) { return e->reportYear != *req.year; });
    if (chosen.empty()) throw DataError("no evaluation reports year " + std::to_string(*req.year));
  }

  std::map<int, std::vector<const Evaluation*>> byYear;
  for (const auto* e : chosen) {
    auto& list = byYear[e->reportYear];
    for (const auto* other : list)
      if (other->statecd == e->statecd)
        throw DataError("evaluations " + std::to_string(other->evalid) + " and " + std::to_string(e->evalid) +
                        " both report " + std::to_string(e->reportYear) + " for state " + std::to_string(e->statecd) +
                        "; select one with an evalid");
    list.push_back(e);
  }
  std::vector<Slice> out;
  for (auto& [year, list] : byYear) {
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->evalid < b->evalid; });
    Slice s{year, {}};
    for (const auto* e : list) s.designs.push_back(buildDesign(db, *e));
    out.push_back(std::move(s));
  }
  return out;
}

// ---- per-plot evaluation -------------------------------------------------------

using SlotMap = std::map<Key, std::vector<double>, KeyLess>;

struct PlotOut {
  std::vector<std::pair<Key, std::vector<double>>> full;
  std::vector<std::pair<Key, std::vector<double>>> area;
};

struct Shared {
  const ForestDatabase* db;
  const FamilySpec* family;
  const std::vector<PartSpec>* parts;
  std::vector<std::size_t> areaPositions;
  domain::BoundExpression recordDomain;
  domain::BoundExpression areaDomain;
  bool recordDomainTrivial = true;
  bool areaDomainTrivial = true;
  std::vector<std::optional<std::size_t>> polygonOf;  // by plot index
};

}  // namespace

struct PlotScope::Impl {
  const Shared& shared;
  std::size_t plot;
  const Stratum& stratum;
  JoinedRow areaRow;
  JoinedRow recordRow;
  JoinedRow groupRow;
  SlotMap full;
  SlotMap area;
  Diagnostics diag;

  Impl(const Shared& s, std::size_t p, const Stratum& st)
      : shared(s),
        plot(p),
        stratum(st),
        areaRow(*s.db, RecordLevel::None),
        recordRow(*s.db, s.family->leaf),
        groupRow(*s.db, s.family->groupLeaf) {}

  KeyPart part(const PartSpec& spec, std::size_t cond, std::optional<std::size_t> record) {
    const Tables& t = shared.db->tables();
    switch (spec.source) {
      case PartSpec::Source::Polygon:
        return {};  // stamped after evaluation
      case PartSpec::Source::Column: {
        groupRow.set(plot, cond, shared.family->groupLeaf == RecordLevel::None ? std::nullopt : record);
        Value v = groupRow.value(spec.binding.slot);
        return {v, v};
      }
      case PartSpec::Source::Predicate: {
        groupRow.set(plot, cond, shared.family->groupLeaf == RecordLevel::None ? std::nullopt : record);
        const double v = spec.predicate.evaluate(groupRow);
        return {v, v};
      }
      case PartSpec::Source::Species: {
        if (!record) return {};
        const double sp = shared.family->groupLeaf == RecordLevel::Seedling ? t.seedlings.rows[*record].spcd
                                                                             : t.trees.rows[*record].spcd;
        return {sp, sp};
      }
      case PartSpec::Source::SizeClass:
        if (!record) return {};
        return sizeClassPart(t.trees.rows[*record].dia, 2.0, 1.0);
    }
    return {};
  }
};

namespace {

Value polygonLabel(const Shared& s, const PolygonSet& polys, std::size_t plot) {
  const auto idx = s.polygonOf[plot];
  return idx ? polys.features()[*idx].id : Value{};
}

}  // namespace

const ForestDatabase& PlotScope::db() const { return *impl_.shared.db; }
std::size_t PlotScope::plot() const { return impl_.plot; }
const PlotRecord& PlotScope::plotRecord() const { return impl_.shared.db->tables().plots.rows[impl_.plot]; }
const Stratum& PlotScope::stratum() const { return impl_.stratum; }
Diagnostics& PlotScope::diagnostics() { return impl_.diag; }

bool PlotScope::areaOk(std::size_t cond) {
  const auto& c = impl_.shared.db->tables().conditions.rows[cond];
  if (c.condStatus != kForestCondStatus) return false;
  if (impl_.shared.areaDomainTrivial) return true;
  impl_.areaRow.set(impl_.plot, cond, std::nullopt);
  return impl_.shared.areaDomain.evaluate(impl_.areaRow) == 1;
}

bool PlotScope::recordOk(std::size_t cond, std::size_t record) {
  if (impl_.shared.recordDomainTrivial) return true;
  impl_.recordRow.set(impl_.plot, cond, record);
  return impl_.shared.recordDomain.evaluate(impl_.recordRow) == 1;
}

double PlotScope::condArea(std::size_t cond) const {
  const auto& c = impl_.shared.db->tables().conditions.rows[cond];
  return c.condpropUnadj.value_or(0.0) * impl_.stratum.adjSubp;
}

double PlotScope::treeAdjustment(const TreeRecord& tree) const {
  TreeBasis basis = TreeBasis::Subplot;
  if (tree.basis) basis = *tree.basis;
  else if (tree.dia && *tree.dia < 5.0) basis = TreeBasis::Microplot;
  switch (basis) {
    case TreeBasis::Microplot: return impl_.stratum.adjMicr;
    case TreeBasis::Macroplot: return impl_.stratum.adjMacr;
    case TreeBasis::Subplot: break;
  }
  return impl_.stratum.adjSubp;
}

namespace {

[[noreturn]] void orphan(const std::string& what, const std::string& plt, int condid) {
  throw IntegrityError(what + " on plot " + plt + " references missing condition " + std::to_string(condid));
}

}  // namespace

std::size_t PlotScope::treeCondition(std::size_t tree) const {
  if (auto c = impl_.shared.db->conditionOfTree(tree)) return *c;
  const auto& r = impl_.shared.db->tables().trees.rows[tree];
  orphan("tree " + r.cn, r.pltCn, r.condid);
}

std::size_t PlotScope::seedlingCondition(std::size_t row) const {
  if (auto c = impl_.shared.db->conditionOfSeedling(row)) return *c;
  const auto& r = impl_.shared.db->tables().seedlings.rows[row];
  orphan("seedling record", r.pltCn, r.condid);
}

std::size_t PlotScope::dwmCondition(std::size_t row) const {
  if (auto c = impl_.shared.db->conditionOfDwm(row)) return *c;
  const auto& r = impl_.shared.db->tables().dwm.rows[row];
  orphan("down woody material record", r.pltCn, r.condid);
}

std::size_t PlotScope::invasiveCondition(std::size_t row) const {
  if (auto c = impl_.shared.db->conditionOfInvasive(row)) return *c;
  const auto& r = impl_.shared.db->tables().invasives.rows[row];
  orphan("invasive record", r.pltCn, r.condid);
}

Key PlotScope::areaKey(std::size_t cond) {
  Key k;
  for (std::size_t pos : impl_.shared.areaPositions) {
    const auto& spec = (*impl_.shared.parts)[pos];
    k.push_back(spec.source == PartSpec::Source::Polygon ? KeyPart{} : impl_.part(spec, cond, std::nullopt));
  }
  return k;
}

Key PlotScope::fullKey(std::size_t cond, std::optional<std::size_t> record) {
  Key k;
  for (const auto& spec : *impl_.shared.parts)
    k.push_back(spec.source == PartSpec::Source::Polygon ? KeyPart{} : impl_.part(spec, cond, record));
  return k;
}

Key PlotScope::project(const Key& full) const {
  Key k;
  for (std::size_t pos : impl_.shared.areaPositions) k.push_back(full[pos]);
  return k;
}

void PlotScope::num(const Key& full, std::size_t slot, double value) {
  if (value == 0) return;
  auto [it, fresh] = impl_.full.try_emplace(full);
  if (fresh) it->second.assign(impl_.shared.family->fullSlots, 0.0);
  it->second[slot] += value;
}

void PlotScope::area(const Key& key, std::size_t slot, double value) {
  if (value == 0) return;
  auto [it, fresh] = impl_.area.try_emplace(key);
  if (fresh) it->second.assign(impl_.shared.family->areaSlots, 0.0);
  it->second[slot] += value;
}

namespace {

// Polygon ids are filled in after evaluation so families never see them.
void stampPolygon(Key& k, std::size_t pos, const Value& id) {
  if (pos < k.size()) k[pos] = {id, id};
}

PlotOut evaluatePlot(const Shared& shared, const PolygonSet* polys, const Design& design, const PlotInfo& info,
                     Diagnostics& diag) {
  PlotOut out;
  if (polys && !shared.polygonOf[info.plot]) return out;
  const auto& stratumRow = shared.db->tables().strata.rows[design.units[info.unit].strata[info.stratum].row];
  PlotScope::Impl impl(shared, info.plot, stratumRow);
  PlotScope scope(impl);
  shared.family->evaluate(scope);
  diag.merge(impl.diag);

  const bool hasPoly = polys != nullptr;
  const Value id = hasPoly ? polygonLabel(shared, *polys, info.plot) : Value{};
  // Re-key so polygon ids participate in ordering.
  SlotMap full, area;
  for (auto& [k, v] : impl.full) {
    Key key = k;
    if (hasPoly) stampPolygon(key, 0, id);
    auto [it, fresh] = full.try_emplace(std::move(key), v);
    if (!fresh)
      for (std::size_t i = 0; i < v.size(); ++i) it->second[i] += v[i];
  }
  for (auto& [k, v] : impl.area) {
    Key key = k;
    if (hasPoly) stampPolygon(key, 0, id);
    auto [it, fresh] = area.try_emplace(std::move(key), v);
    if (!fresh)
      for (std::size_t i = 0; i < v.size(); ++i) it->second[i] += v[i];
  }
  out.full.assign(std::make_move_iterator(full.begin()), std::make_move_iterator(full.end()));
  out.area.assign(std::make_move_iterator(area.begin()), std::make_move_iterator(area.end()));
  return out;
}

// ---- group estimation ----------------------------------------------------------

struct Entry {
  std::size_t ordinal;
  const double* values;
};

using Index = std::map<Key, std::vector<Entry>, KeyLess>;

struct DesignData {
  const Design* design;
  std::vector<PlotOut> plots;
  Index full;
  Index area;
};

std::vector<UnitSample> skeleton(const Design& d, std::optional<std::size_t> panel) {
  std::vector<UnitSample> units;
  units.reserve(d.units.size());
  for (const auto& u : d.units) {
    UnitSample us;
    us.area = u.area;
    us.label = u.label;
    for (const auto& s : u.strata) {
      StratumSample ss;
      ss.weight = s.weight;
      ss.plots = panel ? s.nByPanel[*panel] : s.n;
      ss.label = s.label;
      us.strata.push_back(std::move(ss));
    }
    units.push_back(std::move(us));
  }
  return units;
}

const std::vector<Entry>* find(const Index& idx, const Key& k) {
  auto it = idx.find(k);
  return it == idx.end() ? nullptr : &it->second;
}

/// Adds observations for plots with a nonzero y or x, walking both sorted lists.
void fill(std::vector<UnitSample>& units, const Design& d, const std::vector<Entry>* ys, std::size_t ySlot,
          const std::vector<Entry>* xs, std::size_t xSlot, std::optional<std::size_t> panel) {
  static const std::vector<Entry> empty;
  const auto& a = ys ? *ys : empty;
  const auto& b = xs ? *xs : empty;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    std::size_t ord;
    double y = 0, x = 0;
    if (j >= b.size() || (i < a.size() && a[i].ordinal < b[j].ordinal)) {
      ord = a[i].ordinal;
      y = a[i++].values[ySlot];
    } else if (i >= a.size() || b[j].ordinal < a[i].ordinal) {
      ord = b[j].ordinal;
      x = b[j++].values[xSlot];
    } else {
      ord = a[i].ordinal;
      y = a[i++].values[ySlot];
      x = b[j++].values[xSlot];
    }
    if (y == 0 && x == 0) continue;
    const PlotInfo& p = d.plots[ord];
    if (panel && p.panel != *panel) continue;
    units[p.unit].strata[p.stratum].nonzero.push_back({y, x});
  }
}

void accumulate(PairEstimate& into, const PairEstimate& e) {
  into.num.total += e.num.total;
  into.num.variance += e.num.variance;
  into.num.nNonZero += e.num.nNonZero;
  into.num.nPlots += e.num.nPlots;
  into.den.total += e.den.total;
  into.den.variance += e.den.variance;
  into.den.nNonZero += e.den.nNonZero;
  into.den.nPlots += e.den.nPlots;
  into.covariance += e.covariance;
}

}  // namespace

EngineResult run(const ForestDatabase& db, const FamilySpec& family, const EngineRequest& req) {
  EngineResult result;
  const unsigned workers = std::max(1u, req.workers);

  const auto parts = buildParts(db, family, req);
  Shared shared{&db, &family, &parts, {}, {}, {}, true, true, {}};
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].areaLevel) shared.areaPositions.push_back(i);

  const std::string recordText = req.recordDomain.value_or(family.defaultRecordDomain);
  if (!recordText.empty()) {
    if (family.leaf == RecordLevel::None && req.recordDomain)
      throw UsageError(family.name + " has no record-level domain; use an area domain");
    const auto expr = domain::parse(recordText);
    if (!expr.isConstantTrue()) {
      shared.recordDomain = domain::bind(expr, ColumnCatalog(db, family.leaf).resolver(), "tree domain");
      shared.recordDomainTrivial = false;
    }
  }
  if (req.areaDomain && !req.areaDomain->empty()) {
    const auto expr = domain::parse(*req.areaDomain);
    if (!expr.isConstantTrue()) {
      shared.areaDomain = domain::bind(expr, ColumnCatalog(db, RecordLevel::None).resolver(), "area domain");
      shared.areaDomainTrivial = false;
    }
  }

  for (const auto& p : parts) {
    result.keyColumns.push_back(p.column);
    result.speciesColumn.push_back(p.source == PartSpec::Source::Species);
  }
  for (const auto& k : family.familyKeys) {
    result.keyColumns.push_back(k);
    result.speciesColumn.push_back(false);
  }

  if (req.polys) {
    std::vector<std::optional<LonLat>> points;
    for (const auto& p : db.tables().plots.rows)
      points.push_back(p.lat && p.lon ? std::optional<LonLat>(LonLat{*p.lon, *p.lat}) : std::nullopt);
    shared.polygonOf = assignPlots(points, *req.polys, workers);
  }

  const std::vector<double> lambdas =
      req.method == Method::EMA ? normalizeLambdas(req.lambdas) : std::vector<double>{0.0};
  result.hasLambda = req.method == Method::EMA && !req.byPlot;

  const auto slices = selectSlices(db, family, req, result.diagnostics);

  // Plot values per slice and design.
  std::vector<std::vector<DesignData>> data(slices.size());
  for (std::size_t si = 0; si < slices.size(); ++si) {
    for (const auto& design : slices[si].designs) {
      DesignData dd{&design, std::vector<PlotOut>(design.plots.size()), {}, {}};
      std::vector<Diagnostics> diags(design.plots.size());
      parallelFor(design.plots.size(), workers, [&](std::size_t i) {
        dd.plots[i] = evaluatePlot(shared, req.polys.get(), design, design.plots[i], diags[i]);
      });
      for (const auto& d : diags) result.diagnostics.merge(d);
      for (std::size_t i = 0; i < dd.plots.size(); ++i) {
        for (const auto& [k, v] : dd.plots[i].full) dd.full[k].push_back({i, v.data()});
        for (const auto& [k, v] : dd.plots[i].area) dd.area[k].push_back({i, v.data()});
      }
      data[si].push_back(std::move(dd));
    }
  }

  auto projectKey = [&](const Key& full) {
    Key k;
    for (std::size_t pos : shared.areaPositions) k.push_back(full[pos]);
    return k;
  };
  auto counted = [&](const double* v) {
    return std::any_of(family.countSlots.begin(), family.countSlots.end(), [&](std::size_t s) { return v[s] != 0; });
  };

  if (req.byPlot) {
    std::set<std::string> seen;
    const auto& plots = db.tables().plots.rows;
    for (std::size_t si = slices.size(); si-- > 0;) {
      for (const auto& dd : data[si]) {
        for (std::size_t i = 0; i < dd.plots.size(); ++i) {
          const auto& rec = plots[dd.design->plots[i].plot];
          if (req.polys && !shared.polygonOf[dd.design->plots[i].plot]) continue;
          if (!seen.insert(rec.cn).second) continue;
          const int year = rec.measyear.value_or(rec.invyr);
          const PlotOut& po = dd.plots[i];
          auto areaAt = [&](const Key& ak) -> double {
            for (const auto& [k, v] : po.area)
              if (!KeyLess{}(k, ak) && !KeyLess{}(ak, k)) return v[family.denCountSlot];
            return 0.0;
          };
          auto row = [&](const Key& key, const std::vector<double>* full) {
            PlotRow r{rec.cn, year, key, {}, std::nullopt};
            const Key ak = projectKey(key);
            double areaValue = full ? areaAt(ak) : 0.0;
            if (!full)
              for (const auto& [k, v] : po.area) areaValue += v[family.denCountSlot];
            for (const auto& m : family.measures) {
              const double num = full ? (*full)[m.num] : 0.0;
              double den = 0;
              if (m.den == DenKind::Full) den = full ? (*full)[m.denSlot] : 0.0;
              else if (m.den == DenKind::Area) {
                den = 0;
                if (full) {
                  for (const auto& [k, v] : po.area)
                    if (!KeyLess{}(k, ak) && !KeyLess{}(ak, k)) den = v[m.denSlot];
                } else {
                  for (const auto& [k, v] : po.area) den += v[m.denSlot];
                }
              }
              if (m.plotRatio || m.den == DenKind::Full) {
                r.values.push_back(den != 0 ? std::optional<double>(num / den * m.scale) : std::nullopt);
              } else {
                r.values.push_back(num * m.scale);
              }
            }
            if (!family.denCountName.empty()) r.area = areaValue;
            result.plotRows.push_back(std::move(r));
          };
          if (po.full.empty()) {
            row(Key(result.keyColumns.size()), nullptr);
          } else {
            for (const auto& [k, v] : po.full) row(k, &v);
          }
        }
      }
    }
    std::stable_sort(result.plotRows.begin(), result.plotRows.end(), [](const PlotRow& a, const PlotRow& b) {
      if (a.year != b.year) return a.year < b.year;
      if (a.pltCn != b.pltCn) return a.pltCn < b.pltCn;
      return KeyLess{}(a.key, b.key);
    });
    return result;
  }

  for (std::size_t si = 0; si < slices.size(); ++si) {
    // Groups with at least one counted plot in any design of the slice.
    std::set<Key, KeyLess> groupSet;
    for (const auto& dd : data[si])
      for (const auto& [k, entries] : dd.full)
        if (std::any_of(entries.begin(), entries.end(), [&](const Entry& e) { return counted(e.values); }))
          groupSet.insert(k);
    const std::vector<Key> groups(groupSet.begin(), groupSet.end());

    std::vector<std::vector<GroupResult>> perGroup(groups.size());
    std::vector<Diagnostics> diags(groups.size());
    parallelFor(groups.size(), workers, [&](std::size_t gi) {
      const Key& key = groups[gi];
      const Key ak = projectKey(key);
      std::vector<GroupResult> out(lambdas.size());
      for (std::size_t li = 0; li < lambdas.size(); ++li) {
        out[li].key = key;
        out[li].year = slices[si].year;
        if (req.method == Method::EMA) out[li].lambda = lambdas[li];
        out[li].measures.assign(family.measures.size(), PairEstimate{});
      }
      for (const auto& dd : data[si]) {
        const Design& d = *dd.design;
        const auto* ys = find(dd.full, key);
        const auto* xsArea = find(dd.area, ak);
        std::size_t numCount = 0, denCount = 0;
        if (ys)
          for (const auto& e : *ys) numCount += counted(e.values);
        if (xsArea && !family.denCountName.empty())
          for (const auto& e : *xsArea) denCount += e.values[family.denCountSlot] != 0;

        auto pass = [&](const Measure& m, std::optional<std::size_t> panel) {
          auto units = skeleton(d, panel);
          switch (m.den) {
            case DenKind::None: fill(units, d, ys, m.num, nullptr, 0, panel); break;
            case DenKind::Full: fill(units, d, ys, m.num, ys, m.denSlot, panel); break;
            case DenKind::Area: fill(units, d, ys, m.num, xsArea, m.denSlot, panel); break;
          }
          return postStratifiedPair(units, &diags[gi]);
        };

        for (std::size_t mi = 0; mi < family.measures.size(); ++mi) {
          const Measure& m = family.measures[mi];
          if (req.method == Method::TI) {
            accumulate(out[0].measures[mi], pass(m, std::nullopt));
            continue;
          }
          std::vector<std::optional<PairEstimate>> perPanel(d.panels);
          for (std::size_t p = 0; p < d.panels; ++p)
            if (d.panelPresent[p]) perPanel[p] = pass(m, p);
          for (std::size_t li = 0; li < lambdas.size(); ++li) {
            std::vector<double> w;
            if (req.method == Method::Annual) {
              w.assign(d.panels, 0.0);
              std::size_t last = d.panels - 1;
              while (last > 0 && !d.panelPresent[last]) --last;
              if (last != d.panels - 1)
                diags[gi].add("most recent panel of evaluation " + std::to_string(d.eval->evalid) +
                              " has no plots; ANNUAL uses the latest measured panel");
              w[last] = 1.0;
            } else {
              w = panelWeights(req.method, static_cast<int>(d.panels), lambdas[li]);
            }
            if (auto c = combinePanels(perPanel, w, &diags[gi])) accumulate(out[li].measures[mi], *c);
          }
        }
        for (auto& g : out) {
          g.numCount += numCount;
          g.denCount += denCount;
        }
      }
      perGroup[gi] = std::move(out);
    });
    for (const auto& d : diags) result.diagnostics.merge(d);
    for (auto& list : perGroup)
      for (auto& g : list) result.groups.push_back(std::move(g));
  }

  std::stable_sort(result.groups.begin(), result.groups.end(), [](const GroupResult& a, const GroupResult& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.year != b.year) return a.year < b.year;
    return KeyLess{}(a.key, b.key);
  });
  return result;
}

}  // namespace timberline::engine
