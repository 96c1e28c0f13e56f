#include "timberline/database.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <stdexcept>

#include "timberline/csv.hpp"
#include "timberline/error.hpp"
#include "timberline/schema.hpp"
#include "timberline/states.hpp"

namespace fs = std::filesystem;

namespace timberline {

namespace {

std::string condKey(std::string_view pltCn, int condid) {
  std::string k(pltCn);
  k.push_back('\x1f');
  k += std::to_string(condid);
  return k;
}

}  // namespace

// ---- ForestDatabase ----------------------------------------------------------

ForestDatabase::ForestDatabase() { buildIndexes(); }

ForestDatabase::ForestDatabase(Tables tables) : tables_(std::move(tables)) { buildIndexes(); }

void ForestDatabase::buildIndexes() {
  const auto& t = tables_;
  for (std::size_t i = 0; i < t.plots.size(); ++i) plotByCn_.emplace(t.plots.rows[i].cn, i);
  for (std::size_t i = 0; i < t.conditions.size(); ++i) {
    const auto& c = t.conditions.rows[i];
    condByKey_.emplace(condKey(c.pltCn, c.condid), i);
  }
  for (std::size_t i = 0; i < t.evaluations.size(); ++i) evalById_.emplace(t.evaluations.rows[i].evalid, i);
  for (std::size_t i = 0; i < t.estimationUnits.size(); ++i) unitByCn_.emplace(t.estimationUnits.rows[i].cn, i);
  for (std::size_t i = 0; i < t.strata.size(); ++i) stratumByCn_.emplace(t.strata.rows[i].cn, i);
  for (std::size_t i = 0; i < t.species.size(); ++i) speciesByCode_.emplace(t.species.rows[i].spcd, i);

  const std::size_t nPlots = t.plots.size();
  condsByPlot_.assign(nPlots, {});
  treesByPlot_.assign(nPlots, {});
  seedlingsByPlot_.assign(nPlots, {});
  dwmByPlot_.assign(nPlots, {});
  invasivesByPlot_.assign(nPlots, {});

  for (std::size_t i = 0; i < t.conditions.size(); ++i)
    if (auto p = plotIndex(t.conditions.rows[i].pltCn)) condsByPlot_[*p].push_back(i);

  auto link = [&](const auto& rows, auto& byPlot, auto& condOf) {
    condOf.assign(rows.size(), std::nullopt);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (auto p = plotIndex(rows[i].pltCn)) byPlot[*p].push_back(i);
      condOf[i] = conditionIndex(rows[i].pltCn, rows[i].condid);
    }
  };
  link(t.trees.rows, treesByPlot_, treeCond_);
  link(t.seedlings.rows, seedlingsByPlot_, seedlingCond_);
  link(t.dwm.rows, dwmByPlot_, dwmCond_);
  link(t.invasives.rows, invasivesByPlot_, invasiveCond_);
}

std::optional<std::size_t> ForestDatabase::plotIndex(std::string_view cn) const {
  auto it = plotByCn_.find(std::string(cn));
  if (it == plotByCn_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ForestDatabase::conditionIndex(std::string_view pltCn, int condid) const {
  auto it = condByKey_.find(condKey(pltCn, condid));
  if (it == condByKey_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ForestDatabase::evaluationIndex(int evalid) const {
  auto it = evalById_.find(evalid);
  if (it == evalById_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ForestDatabase::unitIndex(std::string_view cn) const {
  auto it = unitByCn_.find(std::string(cn));
  if (it == unitByCn_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ForestDatabase::stratumIndex(std::string_view cn) const {
  auto it = stratumByCn_.find(std::string(cn));
  if (it == stratumByCn_.end()) return std::nullopt;
  return it->second;
}

const Species* ForestDatabase::species(int spcd) const {
  auto it = speciesByCode_.find(spcd);
  if (it == speciesByCode_.end()) return nullptr;
  return &tables_.species.rows[it->second];
}

std::vector<int> ForestDatabase::states() const {
  std::set<int> s;
  for (const auto& p : tables_.plots.rows) s.insert(p.statecd);
  for (const auto& e : tables_.evaluations.rows) s.insert(e.statecd);
  return {s.begin(), s.end()};
}

bool isAnnualDesign(std::optional<int> designcd) {
  if (!designcd) return true;
  const int c = *designcd;
  return c == 1 || (c >= 111 && c <= 118) || (c >= 501 && c <= 505);
}

// ---- loading -----------------------------------------------------------------

namespace {

/// Text-valued extras before type inference.
template <class R>
Table<R> parseTable(const csv::Document& doc, const std::string& source) {
  const auto fields = fieldsOf<R>();
  std::vector<int> columnField(doc.header.size(), -1);
  std::vector<bool> present(fields.size(), false);
  Table<R> table;
  std::vector<std::size_t> extraColumns;

  for (std::size_t c = 0; c < doc.header.size(); ++c) {
    const std::string& name = doc.header[c];
    bool known = false;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (fields[f].name == name) {
        if (present[f]) throw DataError(source + ": duplicate column " + name);
        columnField[c] = static_cast<int>(f);
        present[f] = true;
        known = true;
        break;
      }
    }
    if (!known) {
      extraColumns.push_back(c);
      table.extras.push_back(ExtraColumn{name, ColumnType::Text, {}});
    }
  }
  for (std::size_t f = 0; f < fields.size(); ++f)
    if (fields[f].required && !present[f])
      throw DataError(source + ": missing required column " + std::string(fields[f].name));

  table.rows.reserve(doc.records.size());
  for (auto& ex : table.extras) ex.values.reserve(doc.records.size());

  for (std::size_t r = 0; r < doc.records.size(); ++r) {
    const auto& rec = doc.records[r];
    const std::size_t line = r + 2;
    if (rec.size() != doc.header.size())
      throw DataError(source + " row " + std::to_string(line) + ": expected " +
                      std::to_string(doc.header.size()) + " fields, found " + std::to_string(rec.size()));
    R row{};
    for (std::size_t f = 0; f < fields.size(); ++f)
      if (!present[f]) fields[f].set(row, Value{});
    for (std::size_t c = 0; c < rec.size(); ++c) {
      if (columnField[c] < 0) continue;
      const auto& def = fields[static_cast<std::size_t>(columnField[c])];
      const auto& cell = rec[c];
      Value v;
      if (!cell.isNull()) {
        if (def.type == ColumnType::Number) {
          auto d = parseNumber(cell.text);
          if (!d)
            throw DataError(source + " row " + std::to_string(line) + ", column " + std::string(def.name) +
                            ": cannot parse '" + cell.text + "' as a number");
          v = *d;
        } else {
          v = cell.text;
        }
      }
      try {
        def.set(row, v);
      } catch (const std::invalid_argument& e) {
        throw DataError(source + " row " + std::to_string(line) + ", column " + std::string(def.name) + ": " +
                        e.what());
      }
    }
    for (std::size_t e = 0; e < extraColumns.size(); ++e) {
      const auto& cell = rec[extraColumns[e]];
      table.extras[e].values.push_back(cell.isNull() ? Value{} : Value{cell.text});
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

template <class R>
void appendTable(Table<R>& into, Table<R>&& from) {
  const std::size_t before = into.rows.size();
  for (auto& ex : into.extras) ex.values.resize(before + from.rows.size());
  for (auto& ex : from.extras) {
    auto it = std::find_if(into.extras.begin(), into.extras.end(),
                           [&](const ExtraColumn& c) { return c.name == ex.name; });
    if (it == into.extras.end()) {
      into.extras.push_back(ExtraColumn{ex.name, ColumnType::Text, {}});
      it = std::prev(into.extras.end());
      it->values.resize(before + from.rows.size());
    }
    std::move(ex.values.begin(), ex.values.end(), it->values.begin() + static_cast<std::ptrdiff_t>(before));
  }
  std::move(from.rows.begin(), from.rows.end(), std::back_inserter(into.rows));
}

template <class R>
void inferExtraTypes(Table<R>& table) {
  for (auto& ex : table.extras) {
    bool numeric = true;
    for (const auto& v : ex.values) {
      if (const auto* s = std::get_if<std::string>(&v); s && !parseNumber(*s)) {
        numeric = false;
        break;
      }
    }
    if (!numeric) continue;
    ex.type = ColumnType::Number;
    for (auto& v : ex.values)
      if (const auto* s = std::get_if<std::string>(&v)) v = *parseNumber(*s);
  }
}

const ExtraColumn* findExtra(const std::vector<ExtraColumn>& extras, std::string_view name) {
  for (const auto& e : extras)
    if (e.name == name) return &e;
  return nullptr;
}

struct StateFiles {
  Table<PlotRecord> plots;
  Table<ConditionRecord> conditions;
  Table<TreeRecord> trees;
  Table<SeedlingRecord> seedlings;
  Table<DwmConditionRecord> dwm;
  Table<InvasiveRecord> invasives;
  Table<Evaluation> evaluations;
  Table<EstimationUnit> units;
  Table<Stratum> strata;
  Table<StratumAssignment> assignments;
  bool evalTypePresent = false;
  bool evalStatePresent = false;
  bool evalYearPresent = false;
  bool stratumWeightPresent = false;
};

template <class R>
Table<R> readOne(const fs::path& dir, const std::string& state, bool mandatory, bool* headerHas = nullptr,
                 std::string_view probe = {}) {
  const std::string file = state + "_" + std::string(tableNameOf<R>()) + ".csv";
  const fs::path path = dir / file;
  if (!fs::is_regular_file(path)) {
    if (mandatory) throw DataError("missing mandatory table file " + file + " in " + dir.string());
    return {};
  }
  auto doc = csv::readFile(path);
  if (headerHas) *headerHas = std::find(doc.header.begin(), doc.header.end(), probe) != doc.header.end();
  return parseTable<R>(doc, file);
}

StateFiles readState(const fs::path& dir, const std::string& state) {
  StateFiles s;
  // Files are independent; parse them concurrently.
  auto plots = std::async(std::launch::async, [&] { return readOne<PlotRecord>(dir, state, true); });
  auto conds = std::async(std::launch::async, [&] { return readOne<ConditionRecord>(dir, state, true); });
  auto trees = std::async(std::launch::async, [&] { return readOne<TreeRecord>(dir, state, false); });
  s.seedlings = readOne<SeedlingRecord>(dir, state, false);
  s.dwm = readOne<DwmConditionRecord>(dir, state, false);
  s.invasives = readOne<InvasiveRecord>(dir, state, false);
  {
    const fs::path path = dir / (state + "_POP_EVAL.csv");
    if (!fs::is_regular_file(path)) throw DataError("missing mandatory table file " + path.filename().string() + " in " + dir.string());
    auto doc = csv::readFile(path);
    auto has = [&](std::string_view c) { return std::find(doc.header.begin(), doc.header.end(), c) != doc.header.end(); };
    s.evalTypePresent = has("EVAL_TYP");
    s.evalStatePresent = has("STATECD");
    s.evalYearPresent = has("REPORT_YEAR");
    s.evaluations = parseTable<Evaluation>(doc, path.filename().string());
  }
  s.units = readOne<EstimationUnit>(dir, state, true);
  s.strata = readOne<Stratum>(dir, state, true, &s.stratumWeightPresent, "STRATUM_WGT");
  s.assignments = readOne<StratumAssignment>(dir, state, true);
  s.plots = plots.get();
  s.conditions = conds.get();
  s.trees = trees.get();
  return s;
}

EvalType evalTypeFromId(int evalid) {
  switch (evalid % 100) {
    case 3: return EvalType::Grm;
    case 2: return EvalType::Chng;
    case 7: return EvalType::Dwm;
    default: return EvalType::Vol;
  }
}

void deriveEvaluationFields(StateFiles& s) {
  for (auto& e : s.evaluations.rows) {
    if (!s.evalStatePresent || e.statecd == 0) e.statecd = e.evalid / 10000;
    if (!s.evalTypePresent) e.type = evalTypeFromId(e.evalid);
    if (!s.evalYearPresent || e.reportYear == 0)
      e.reportYear = e.endInvyr ? *e.endInvyr : 2000 + (e.evalid / 100) % 100;
  }
}

void deriveStratumWeights(Table<Stratum>& strata, bool weightColumnPresent) {
  const ExtraColumn* p1 = findExtra(strata.extras, "P1POINTCNT");
  bool needs = false;
  for (const auto& s : strata.rows) needs = needs || s.weight < 0;
  if (!needs) return;
  if (!p1) {
    throw DataError(weightColumnPresent ? "POP_STRATUM: STRATUM_WGT is blank and P1POINTCNT is unavailable"
                                        : "POP_STRATUM: needs STRATUM_WGT or P1POINTCNT");
  }
  std::map<std::string, double> unitTotals;
  auto count = [&](std::size_t i) -> double {
    const auto* d = std::get_if<double>(&p1->values[i]);
    if (!d) throw DataError("POP_STRATUM row " + std::to_string(i + 2) + ": P1POINTCNT is blank");
    return *d;
  };
  for (std::size_t i = 0; i < strata.rows.size(); ++i) unitTotals[strata.rows[i].estnUnitCn] += count(i);
  for (std::size_t i = 0; i < strata.rows.size(); ++i) {
    auto& s = strata.rows[i];
    if (s.weight >= 0) continue;
    const double total = unitTotals[s.estnUnitCn];
    s.weight = total > 0 ? count(i) / total : 0.0;
  }
}

void deriveTreeBasis(Table<TreeRecord>& trees) {
  for (auto& t : trees.rows)
    if (!t.basis && t.dia) t.basis = *t.dia < 5.0 ? TreeBasis::Microplot : TreeBasis::Subplot;
}

std::vector<std::string> discoverStates(const fs::path& dir) {
  std::set<std::string> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    const std::string suffix = "_PLOT.csv";
    if (name.size() > suffix.size() && name.ends_with(suffix)) found.insert(name.substr(0, name.size() - suffix.size()));
  }
  return {found.begin(), found.end()};
}

}  // namespace

ForestDatabase loadDatabase(const fs::path& directory, const std::vector<std::string>& requested) {
  if (!fs::is_directory(directory)) throw DataError("not a directory: " + directory.string());
  std::vector<std::string> states = requested.empty() ? discoverStates(directory) : requested;
  if (states.empty()) throw DataError("no <STATE>_PLOT.csv files in " + directory.string());

  Tables t;
  for (const auto& state : states) {
    StateFiles s = readState(directory, state);
    deriveEvaluationFields(s);
    deriveStratumWeights(s.strata, s.stratumWeightPresent);
    appendTable(t.plots, std::move(s.plots));
    appendTable(t.conditions, std::move(s.conditions));
    appendTable(t.trees, std::move(s.trees));
    appendTable(t.seedlings, std::move(s.seedlings));
    appendTable(t.dwm, std::move(s.dwm));
    appendTable(t.invasives, std::move(s.invasives));
    appendTable(t.evaluations, std::move(s.evaluations));
    appendTable(t.estimationUnits, std::move(s.units));
    appendTable(t.strata, std::move(s.strata));
    appendTable(t.assignments, std::move(s.assignments));
  }
  if (fs::is_regular_file(directory / kSpeciesFile)) {
    auto doc = csv::readFile(directory / kSpeciesFile);
    t.species = parseTable<Species>(doc, std::string(kSpeciesFile));
  }
  deriveTreeBasis(t.trees);

  inferExtraTypes(t.plots);
  inferExtraTypes(t.conditions);
  inferExtraTypes(t.trees);
  inferExtraTypes(t.seedlings);
  inferExtraTypes(t.dwm);
  inferExtraTypes(t.invasives);
  inferExtraTypes(t.evaluations);
  inferExtraTypes(t.estimationUnits);
  inferExtraTypes(t.strata);
  inferExtraTypes(t.assignments);
  inferExtraTypes(t.species);
  return ForestDatabase(std::move(t));
}

// ---- writing -----------------------------------------------------------------

namespace {

template <class R>
void writeTable(const fs::path& path, const Table<R>& table, const std::vector<std::size_t>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const auto fields = fieldsOf<R>();
  std::vector<std::optional<std::string>> cells;
  for (const auto& f : fields) cells.emplace_back(std::string(f.name));
  for (const auto& e : table.extras) cells.emplace_back(e.name);
  csv::writeRow(out, cells);
  for (std::size_t r : rows) {
    cells.clear();
    for (const auto& f : fields) {
      Value v = f.get(table.rows[r]);
      cells.push_back(isNull(v) ? std::nullopt : std::optional<std::string>(formatValue(v)));
    }
    for (const auto& e : table.extras) {
      const Value& v = e.values[r];
      cells.push_back(isNull(v) ? std::nullopt : std::optional<std::string>(formatValue(v)));
    }
    csv::writeRow(out, cells);
  }
  out.flush();
  if (!out) throw DataError("I/O failure writing " + path.string());
}

std::string prefixForState(int fips) {
  auto abbr = stateAbbreviation(fips);
  if (!abbr) throw DataError("no postal abbreviation for state code " + std::to_string(fips));
  return *abbr;
}

}  // namespace

void writeDatabase(const ForestDatabase& db, const fs::path& directory, const WriteOptions& options) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (!fs::is_directory(directory)) throw DataError("cannot create directory " + directory.string());

  const Tables& t = db.tables();

  // Resolve a state prefix for every row.
  std::vector<std::string> plotState(t.plots.size());
  std::set<std::string> prefixes;
  if (options.prefix) prefixes.insert(*options.prefix);
  auto stateOf = [&](int fips) { return options.prefix ? *options.prefix : prefixForState(fips); };
  for (std::size_t i = 0; i < t.plots.size(); ++i) prefixes.insert(plotState[i] = stateOf(t.plots.rows[i].statecd));
  std::map<int, std::string> evalState;
  for (const auto& e : t.evaluations.rows) prefixes.insert(evalState[e.evalid] = stateOf(e.statecd));
  if (prefixes.empty())
    throw UsageError("cannot infer a state prefix for an empty database; set WriteOptions::prefix");
  const std::string fallback = *prefixes.begin();

  auto byPlot = [&](std::string_view pltCn) {
    auto p = db.plotIndex(pltCn);
    return p ? plotState[*p] : fallback;
  };
  auto byEval = [&](int evalid) {
    auto it = evalState.find(evalid);
    return it == evalState.end() ? fallback : it->second;
  };
  auto byUnit = [&](std::string_view cn) {
    auto u = db.unitIndex(cn);
    return u ? byEval(t.estimationUnits.rows[*u].evalid) : fallback;
  };
  auto byStratum = [&](std::string_view cn) {
    auto s = db.stratumIndex(cn);
    return s ? byUnit(t.strata.rows[*s].estnUnitCn) : fallback;
  };

  auto emit = [&](const auto& table, bool mandatory, auto&& stateOfRow) {
    using R = typename std::decay_t<decltype(table.rows)>::value_type;
    if (!mandatory && table.empty()) return;
    std::map<std::string, std::vector<std::size_t>> split;
    if (mandatory)
      for (const auto& p : prefixes) split[p];
    for (std::size_t i = 0; i < table.size(); ++i) split[stateOfRow(table.rows[i])].push_back(i);
    for (const auto& [prefix, rows] : split)
      writeTable(directory / (prefix + "_" + std::string(tableNameOf<R>()) + ".csv"), table, rows);
  };

  emit(t.plots, true, [&](const PlotRecord& r) { return stateOf(r.statecd); });
  emit(t.conditions, true, [&](const ConditionRecord& r) { return byPlot(r.pltCn); });
  emit(t.trees, false, [&](const TreeRecord& r) { return byPlot(r.pltCn); });
  emit(t.seedlings, false, [&](const SeedlingRecord& r) { return byPlot(r.pltCn); });
  emit(t.dwm, false, [&](const DwmConditionRecord& r) { return byPlot(r.pltCn); });
  emit(t.invasives, false, [&](const InvasiveRecord& r) { return byPlot(r.pltCn); });
  emit(t.evaluations, true, [&](const Evaluation& r) { return byEval(r.evalid); });
  emit(t.estimationUnits, true, [&](const EstimationUnit& r) { return byEval(r.evalid); });
  emit(t.strata, true, [&](const Stratum& r) { return byUnit(r.estnUnitCn); });
  emit(t.assignments, true, [&](const StratumAssignment& r) { return byStratum(r.stratumCn); });

  if (!t.species.empty()) {
    std::vector<std::size_t> all(t.species.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    writeTable(directory / kSpeciesFile, t.species, all);
  }
}

}  // namespace timberline
