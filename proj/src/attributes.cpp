#include "timberline/attributes.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <tuple>

#include "timberline/engine.hpp"
#include "timberline/error.hpp"

namespace timberline {

using engine::DenKind;
using engine::FamilySpec;
using engine::Key;
using engine::KeyPart;
using engine::Measure;
using engine::PlotScope;

namespace {

constexpr double kBasalAreaFactor = 0.005454;  // ft^2 per in^2 of DBH squared
constexpr double kPoundsPerTon = 2000.0;
constexpr int kLive = 1;

double basalArea(double dia) { return kBasalAreaFactor * dia * dia; }

/// Records forest area of every condition inside the area domain.
void emitForestArea(PlotScope& s) {
  for (std::size_t c : s.db().conditionsOfPlot(s.plot()))
    if (s.areaOk(c)) s.area(s.areaKey(c), 0, s.condArea(c));
}

/// Live trees passing the forest-land and record filters.
template <class Fn>
void forLiveTrees(PlotScope& s, Fn&& fn) {
  const auto& trees = s.db().tables().trees.rows;
  for (std::size_t t : s.db().treesOfPlot(s.plot())) {
    const auto& tree = trees[t];
    if (tree.statuscd != kLive) continue;
    const std::size_t c = s.treeCondition(t);
    if (!s.areaOk(c) || !s.recordOk(c, t)) continue;
    fn(t, tree, c);
  }
}

Measure perAcre(std::string name, std::size_t slot, std::string total = {}) {
  Measure m;
  m.name = std::move(name);
  m.num = slot;
  m.den = DenKind::Area;
  m.denSlot = 0;
  m.totalName = std::move(total);
  return m;
}

FamilySpec tpaFamily() {
  FamilySpec f;
  f.name = "tpa";
  f.fullSlots = 2;
  f.areaSlots = 1;
  f.measures = {perAcre("TPA", 0, "TREE_TOTAL"), perAcre("BAA", 1, "BA_TOTAL")};
  f.countSlots = {0};
  f.numCountName = "nPlots_TREE";
  f.denCountName = "nPlots_AREA";
  f.defaultRecordDomain = "DIA >= 1";
  f.evaluate = [](PlotScope& s) {
    emitForestArea(s);
    forLiveTrees(s, [&](std::size_t t, const TreeRecord& tree, std::size_t c) {
      const double tpa = tree.tpaUnadj.value_or(0.0) * s.treeAdjustment(tree);
      const Key k = s.fullKey(c, t);
      s.num(k, 0, tpa);
      s.num(k, 1, tpa * basalArea(tree.dia.value_or(0.0)));
    });
  };
  return f;
}

FamilySpec biomassFamily() {
  FamilySpec f;
  f.name = "biomass";
  f.fullSlots = 8;
  f.areaSlots = 1;
  f.measures = {perAcre("NETVOL_ACRE", 0, "NETVOL_TOTAL"), perAcre("SAWVOL_ACRE", 1, "SAWVOL_TOTAL"),
                perAcre("BIO_AG_ACRE", 2, "BIO_AG_TOTAL"),  perAcre("BIO_BG_ACRE", 3, "BIO_BG_TOTAL"),
                perAcre("BIO_ACRE", 4, "BIO_TOTAL"),        perAcre("CARB_AG_ACRE", 5, "CARB_AG_TOTAL"),
                perAcre("CARB_BG_ACRE", 6, "CARB_BG_TOTAL"), perAcre("CARB_ACRE", 7, "CARB_TOTAL")};
  Measure bf = perAcre("SAWVOL_BF_ACRE", 1);
  bf.scale = kBoardFeetPerCubicFoot;
  f.measures.push_back(bf);
  f.countSlots = {0, 1, 2, 3, 4, 5, 6, 7};
  f.numCountName = "nPlots_VOL";
  f.denCountName = "nPlots_AREA";
  f.defaultRecordDomain = "DIA >= 1";
  f.evaluate = [](PlotScope& s) {
    emitForestArea(s);
    forLiveTrees(s, [&](std::size_t t, const TreeRecord& tree, std::size_t c) {
      const double tpa = tree.tpaUnadj.value_or(0.0) * s.treeAdjustment(tree);
      const Key k = s.fullKey(c, t);
      const double bioAg = tree.drybioAg.value_or(0.0) / kPoundsPerTon;
      const double bioBg = tree.drybioBg.value_or(0.0) / kPoundsPerTon;
      const double carbAg = tree.carbonAg.value_or(0.0) / kPoundsPerTon;
      const double carbBg = tree.carbonBg.value_or(0.0) / kPoundsPerTon;
      s.num(k, 0, tpa * tree.volcfnet.value_or(0.0));
      s.num(k, 1, tpa * tree.volcsnet.value_or(0.0));
      s.num(k, 2, tpa * bioAg);
      s.num(k, 3, tpa * bioBg);
      s.num(k, 4, tpa * (bioAg + bioBg));
      s.num(k, 5, tpa * carbAg);
      s.num(k, 6, tpa * carbBg);
      s.num(k, 7, tpa * (carbAg + carbBg));
    });
  };
  return f;
}

FamilySpec areaFamily() {
  FamilySpec f;
  f.name = "area";
  f.leaf = RecordLevel::None;
  f.groupLeaf = RecordLevel::None;
  f.fullSlots = 1;
  f.areaSlots = 1;
  Measure m;
  m.name = "AREA_TOTAL";
  m.num = 0;
  m.den = DenKind::None;
  f.measures = {m};
  f.countSlots = {0};
  f.numCountName = "nPlots_AREA";
  f.evaluate = [](PlotScope& s) {
    for (std::size_t c : s.db().conditionsOfPlot(s.plot())) {
      if (!s.areaOk(c)) continue;
      const double a = s.condArea(c);
      s.num(s.fullKey(c, std::nullopt), 0, a);
      s.area(s.areaKey(c), 0, a);
    }
  };
  return f;
}

FamilySpec growMortFamily() {
  FamilySpec f;
  f.name = "growMort";
  f.evalType = EvalType::Grm;
  f.fullSlots = 3;
  f.areaSlots = 1;
  f.measures = {perAcre("RECR_TPA", 0, "RECR_TOTAL"), perAcre("MORT_TPA", 1, "MORT_TOTAL"),
                perAcre("REMV_TPA", 2, "REMV_TOTAL")};
  f.countSlots = {0, 1, 2};
  f.numCountName = "nPlots_TREE";
  f.denCountName = "nPlots_AREA";
  f.defaultRecordDomain = "DIA >= 5";
  f.evaluate = [](PlotScope& s) {
    emitForestArea(s);
    const auto& plot = s.plotRecord();
    if (!plot.remper) {
      bool any = false;
      for (std::size_t t : s.db().treesOfPlot(s.plot()))
        any = any || s.db().tables().trees.rows[t].component.value_or(Component::None) != Component::None;
      if (any) s.diagnostics().add("plot " + plot.cn + " has no REMPER; its change components are skipped");
      return;
    }
    const double remper = *plot.remper;
    const auto& trees = s.db().tables().trees.rows;
    for (std::size_t t : s.db().treesOfPlot(s.plot())) {
      const auto& tree = trees[t];
      const Component comp = tree.component.value_or(Component::None);
      std::size_t slot;
      std::optional<double> factor;
      switch (comp) {
        case Component::Ingrowth:
          slot = 0;
          factor = tree.tpagrowUnadj ? tree.tpagrowUnadj : tree.tpaUnadj;
          break;
        case Component::Mortality:
          slot = 1;
          factor = tree.tpamortUnadj;
          break;
        case Component::Cut:
          slot = 2;
          factor = tree.tparemvUnadj;
          break;
        default: continue;
      }
      const std::size_t c = s.treeCondition(t);
      if (!s.areaOk(c) || !s.recordOk(c, t)) continue;
      s.num(s.fullKey(c, t), slot, factor.value_or(0.0) * s.treeAdjustment(tree) / remper);
    }
  };
  return f;
}

FamilySpec vitalRatesFamily() {
  FamilySpec f;
  f.name = "vitalRates";
  f.evalType = EvalType::Grm;
  f.fullSlots = 7;
  f.areaSlots = 1;
  auto perTree = [](std::string name, std::size_t num, std::size_t den) {
    Measure m;
    m.name = std::move(name);
    m.num = num;
    m.den = DenKind::Full;
    m.denSlot = den;
    return m;
  };
  f.measures = {perTree("DIA_GROW", 0, 4),
                perTree("BA_GROW", 1, 4),
                perTree("NETVOL_GROW", 2, 5),
                perTree("BIO_GROW", 3, 6),
                perAcre("BA_GROW_AC", 1, "BA_GROW_TOTAL"),
                perAcre("NETVOL_GROW_AC", 2, "NETVOL_GROW_TOTAL"),
                perAcre("BIO_GROW_AC", 3, "BIO_GROW_TOTAL")};
  f.countSlots = {4, 5, 6};
  f.numCountName = "nPlots_TREE";
  f.denCountName = "nPlots_AREA";
  f.defaultRecordDomain = "DIA >= 5";
  f.evaluate = [](PlotScope& s) {
    emitForestArea(s);
    const auto& plot = s.plotRecord();
    const auto& trees = s.db().tables().trees.rows;
    for (std::size_t t : s.db().treesOfPlot(s.plot())) {
      const auto& tree = trees[t];
      if (tree.component != Component::Survivor) continue;
      if (!plot.remper) {
        s.diagnostics().add("plot " + plot.cn + " has no REMPER; its survivor growth is skipped");
        return;
      }
      const std::size_t c = s.treeCondition(t);
      if (!s.areaOk(c) || !s.recordOk(c, t)) continue;
      const double remper = *plot.remper;
      const double w = (tree.tpagrowUnadj ? *tree.tpagrowUnadj : tree.tpaUnadj.value_or(0.0)) * s.treeAdjustment(tree);
      const Key k = s.fullKey(c, t);
      if (tree.dia && tree.prevdia) {
        s.num(k, 0, w * (*tree.dia - *tree.prevdia) / remper);
        s.num(k, 1, w * (basalArea(*tree.dia) - basalArea(*tree.prevdia)) / remper);
        s.num(k, 4, w);
      }
      if (tree.volcfnet && tree.prevVolcfnet) {
        s.num(k, 2, w * (*tree.volcfnet - *tree.prevVolcfnet) / remper);
        s.num(k, 5, w);
      }
      if (tree.drybioAg && tree.prevDrybioAg) {
        s.num(k, 3, w * (*tree.drybioAg - *tree.prevDrybioAg) / kPoundsPerTon / remper);
        s.num(k, 6, w);
      }
    }
  };
  return f;
}

FamilySpec dwmFamily() {
  FamilySpec f;
  f.name = "dwm";
  f.evalType = EvalType::Dwm;
  f.fallbackToVol = true;
  f.leaf = RecordLevel::Dwm;
  f.groupLeaf = RecordLevel::Dwm;
  f.familyKeys = {"FUEL_TYPE"};
  f.fullSlots = 3;
  f.areaSlots = 1;
  f.measures = {perAcre("VOL_ACRE", 0, "VOL_TOTAL"), perAcre("BIO_ACRE", 1, "BIO_TOTAL"),
                perAcre("CARB_ACRE", 2, "CARB_TOTAL")};
  f.countSlots = {0, 1, 2};
  f.numCountName = "nPlots_DWM";
  f.denCountName = "nPlots_AREA";
  f.evaluate = [](PlotScope& s) {
    emitForestArea(s);
    const auto& rows = s.db().tables().dwm.rows;
    for (std::size_t r : s.db().dwmOfPlot(s.plot())) {
      const auto& d = rows[r];
      const std::size_t c = s.dwmCondition(r);
      if (!s.areaOk(c) || !s.recordOk(c, r)) continue;
      Key k = s.fullKey(c, r);
      k.push_back({static_cast<double>(d.fuelType), std::string(toString(d.fuelType))});
      const double a = s.condArea(c);
      s.num(k, 0, a * d.volAcre);
      s.num(k, 1, a * d.bioAcre);
      s.num(k, 2, a * d.carbAcre);
    }
  };
  return f;
}

FamilySpec invasiveFamily() {
  FamilySpec f;
  f.name = "invasive";
  f.leaf = RecordLevel::Invasive;
  f.groupLeaf = RecordLevel::Invasive;
  f.familyKeys = {"VEG_SPCD"};
  f.fullSlots = 1;
  f.areaSlots = 1;
  Measure m = perAcre("COVER_PCT", 0, "COVER_AREA");
  m.scale = 100.0;
  m.plotRatio = true;
  f.measures = {m};
  f.countSlots = {0};
  f.numCountName = "nPlots_INV";
  f.denCountName = "nPlots_AREA";
  f.evaluate = [](PlotScope& s) {
    // Only plots surveyed under the invasive protocol enter either side.
    if (s.plotRecord().invasiveSampling != 1) return;
    emitForestArea(s);
    const auto& rows = s.db().tables().invasives.rows;
    for (std::size_t r : s.db().invasivesOfPlot(s.plot())) {
      const auto& v = rows[r];
      const std::size_t c = s.invasiveCondition(r);
      if (!s.areaOk(c) || !s.recordOk(c, r)) continue;
      Key k = s.fullKey(c, r);
      k.push_back({v.spcd, v.spcd});
      s.num(k, 0, v.coverPct / 100.0 * s.condArea(c));
    }
  };
  return f;
}

FamilySpec seedlingFamily() {
  FamilySpec f;
  f.name = "seedling";
  f.leaf = RecordLevel::Seedling;
  f.groupLeaf = RecordLevel::Seedling;
  f.fullSlots = 1;
  f.areaSlots = 1;
  f.measures = {perAcre("TPA", 0, "TREE_TOTAL")};
  f.countSlots = {0};
  f.numCountName = "nPlots_SEEDLING";
  f.denCountName = "nPlots_AREA";
  f.evaluate = [](PlotScope& s) {
    emitForestArea(s);
    const auto& rows = s.db().tables().seedlings.rows;
    for (std::size_t r : s.db().seedlingsOfPlot(s.plot())) {
      const auto& sd = rows[r];
      const std::size_t c = s.seedlingCondition(r);
      if (!s.areaOk(c) || !s.recordOk(c, r)) continue;
      s.num(s.fullKey(c, r), 0, sd.treecount * sd.tpaUnadj * s.stratum().adjMicr);
    }
  };
  return f;
}

enum class Stage { Pole, Mature, Late, Mosaic };

constexpr const char* kStageNames[] = {"POLE", "MATURE", "LATE", "MOSAIC"};
constexpr double kStageDominance = 0.67;

FamilySpec standStructFamily() {
  FamilySpec f;
  f.name = "standStruct";
  f.groupLeaf = RecordLevel::None;
  f.familyKeys = {"STAGE"};
  f.fullSlots = 1;
  f.areaSlots = 1;
  Measure m = perAcre("PERC", 0, "STAGE_AREA");
  m.scale = 100.0;
  m.plotRatio = true;
  f.measures = {m};
  f.countSlots = {0};
  f.numCountName = "nPlots_STAGE";
  f.denCountName = "nPlots_AREA";
  f.evaluate = [](PlotScope& s) {
    const auto& db = s.db();
    const auto& trees = db.tables().trees.rows;
    std::map<std::size_t, std::array<double, 3>> ba;
    for (std::size_t c : db.conditionsOfPlot(s.plot()))
      if (s.areaOk(c)) ba[c] = {0, 0, 0};
    for (std::size_t t : db.treesOfPlot(s.plot())) {
      const auto& tree = trees[t];
      if (tree.statuscd != kLive || !tree.dia || *tree.dia < 5.0) continue;
      const std::size_t c = s.treeCondition(t);
      auto it = ba.find(c);
      if (it == ba.end() || !s.recordOk(c, t)) continue;
      const double dia = *tree.dia;
      const std::size_t cls = dia < 11.0 ? 0 : dia < 19.0 ? 1 : 2;
      it->second[cls] += tree.tpaUnadj.value_or(0.0) * s.treeAdjustment(tree) * basalArea(dia);
    }
    for (const auto& [c, classes] : ba) {
      const double total = classes[0] + classes[1] + classes[2];
      if (total <= 0) {
        s.diagnostics().add("conditions without live basal area have no structural stage and are excluded");
        continue;
      }
      Stage stage = Stage::Mosaic;
      for (std::size_t i = 0; i < 3; ++i)
        if (classes[i] / total >= kStageDominance) stage = static_cast<Stage>(i);
      // Staged area is the denominator so stage shares add to 100.
      const double a = s.condArea(c);
      s.area(s.areaKey(c), 0, a);
      Key k = s.fullKey(c, std::nullopt);
      k.push_back({static_cast<double>(stage), kStageNames[static_cast<int>(stage)]});
      s.num(k, 0, a);
    }
  };
  return f;
}

/// Stand-level indices: per plot and group, H/S/Eh weighted by the group's forest area.
FamilySpec diversityFamily(DiversityBasis basis) {
  FamilySpec f;
  f.name = "diversity";
  f.fullSlots = 4;
  f.areaSlots = 1;
  auto weighted = [](std::string name, std::size_t num) {
    Measure m;
    m.name = std::move(name);
    m.num = num;
    m.den = DenKind::Full;
    m.denSlot = 3;
    return m;
  };
  f.measures = {weighted("H_a", 0), weighted("S_a", 1), weighted("Eh_a", 2)};
  f.countSlots = {3};
  f.numCountName = "nPlots_TREE";
  f.denCountName = "nPlots_AREA";
  f.defaultRecordDomain = "DIA >= 1";
  f.evaluate = [basis](PlotScope& s) {
    emitForestArea(s);
    std::map<Key, std::map<int, double>, engine::KeyLess> abundance;
    forLiveTrees(s, [&](std::size_t t, const TreeRecord& tree, std::size_t c) {
      double v = tree.tpaUnadj.value_or(0.0) * s.treeAdjustment(tree);
      if (basis == DiversityBasis::BasalArea) v *= basalArea(tree.dia.value_or(0.0));
      if (v > 0) abundance[s.fullKey(c, t)][tree.spcd] += v;
    });
    if (abundance.empty()) return;
    std::map<Key, double, engine::KeyLess> areaAt;
    for (std::size_t c : s.db().conditionsOfPlot(s.plot()))
      if (s.areaOk(c)) areaAt[s.areaKey(c)] += s.condArea(c);
    for (const auto& [k, species] : abundance) {
      double total = 0;
      for (const auto& [sp, v] : species) total += v;
      double h = 0;
      for (const auto& [sp, v] : species) {
        const double p = v / total;
        h -= p * std::log(p);
      }
      const double richness = static_cast<double>(species.size());
      const double eh = species.size() > 1 ? h / std::log(richness) : 0.0;
      const double a = areaAt[s.project(k)];
      s.num(k, 0, h * a);
      s.num(k, 1, richness * a);
      s.num(k, 2, eh * a);
      s.num(k, 3, a);
    }
  };
  return f;
}

/// Population abundance totals by group and species, for the pooled indices.
FamilySpec abundanceFamily(DiversityBasis basis) {
  FamilySpec f;
  f.name = "diversity";
  f.familyKeys = {"SPCD"};
  f.fullSlots = 1;
  f.areaSlots = 1;
  Measure m;
  m.name = "ABUNDANCE";
  m.den = DenKind::None;
  f.measures = {m};
  f.countSlots = {0};
  f.defaultRecordDomain = "DIA >= 1";
  f.evaluate = [basis](PlotScope& s) {
    forLiveTrees(s, [&](std::size_t t, const TreeRecord& tree, std::size_t c) {
      double v = tree.tpaUnadj.value_or(0.0) * s.treeAdjustment(tree);
      if (basis == DiversityBasis::BasalArea) v *= basalArea(tree.dia.value_or(0.0));
      Key k = s.fullKey(c, t);
      k.push_back({static_cast<double>(tree.spcd), static_cast<double>(tree.spcd)});
      s.num(k, 0, v);
    });
  };
  return f;
}

FamilySpec familySpec(const EstimatorRequest& req) {
  switch (req.family) {
    case Family::Tpa: return tpaFamily();
    case Family::Biomass: return biomassFamily();
    case Family::Area: return areaFamily();
    case Family::GrowMort: return growMortFamily();
    case Family::VitalRates: return vitalRatesFamily();
    case Family::Dwm: return dwmFamily();
    case Family::Diversity: return diversityFamily(req.diversityBasis);
    case Family::Invasive: return invasiveFamily();
    case Family::Seedling: return seedlingFamily();
    case Family::StandStruct: return standStructFamily();
  }
  throw UsageError("unknown attribute family");
}

engine::EngineRequest engineRequest(const EstimatorRequest& req) {
  engine::EngineRequest e;
  e.grpBy = req.grpBy;
  e.polys = req.polys;
  e.bySpecies = req.bySpecies;
  e.bySizeClass = req.bySizeClass;
  e.byPlot = req.byPlot;
  e.recordDomain = req.treeDomain;
  e.areaDomain = req.areaDomain;
  e.method = req.method;
  e.lambdas = req.lambdas;
  e.workers = req.workers;
  e.year = req.year;
  e.evalids = req.evalids;
  return e;
}

// ---- output assembly -----------------------------------------------------------

struct KeyLayout {
  std::vector<std::string> columns;
  std::vector<bool> species;
};

KeyLayout keyLayout(const engine::EngineResult& r) {
  KeyLayout l;
  for (std::size_t i = 0; i < r.keyColumns.size(); ++i) {
    l.columns.push_back(r.keyColumns[i]);
    l.species.push_back(r.speciesColumn[i]);
    if (r.speciesColumn[i]) {
      l.columns.push_back("COMMON_NAME");
      l.columns.push_back("SCIENTIFIC_NAME");
    }
  }
  return l;
}

void appendKey(const ForestDatabase& db, const KeyLayout& layout, const Key& key, std::vector<Value>& out) {
  for (std::size_t i = 0; i < key.size(); ++i) {
    out.push_back(key[i].label);
    if (!layout.species[i]) continue;
    const Species* sp = nullptr;
    if (const double* code = std::get_if<double>(&key[i].label)) sp = db.species(static_cast<int>(*code));
    out.push_back(sp ? Value{sp->commonName} : Value{});
    out.push_back(sp ? Value{sp->scientificName} : Value{});
  }
}

struct Cell {
  std::optional<double> value;
  double variance = 0;
  std::optional<double> se;
};

Cell measureCell(const Measure& m, const PairEstimate& e) {
  Cell c;
  if (m.den == DenKind::None) {
    c.value = e.num.total * m.scale;
    c.variance = e.num.variance * m.scale * m.scale;
  } else {
    const RatioEstimate r = ratioEstimate(e.num, e.den, e.covariance);
    if (r.value) {
      c.value = *r.value * m.scale;
      c.variance = r.variance * m.scale * m.scale;
    }
  }
  if (c.value) c.se = samplingErrorPct(*c.value, c.variance, e.num.nNonZero);
  return c;
}

Cell totalCell(const TotalEstimate& t) {
  return {t.total, t.variance, samplingErrorPct(t.total, t.variance, t.nNonZero)};
}

struct Extra {
  std::vector<std::string> columns;
  std::function<std::vector<std::optional<double>>(const engine::GroupResult&)> values;
};

EstimateTable assemble(const ForestDatabase& db, const FamilySpec& f, const engine::EngineResult& r,
                       const EstimatorRequest& req, const Extra* extra = nullptr) {
  EstimateTable table;
  const KeyLayout layout = keyLayout(r);
  table.diagnostics = r.diagnostics.messages();

  if (req.byPlot) {
    table.keyColumns = {"PLT_CN", "YEAR"};
    table.keyColumns.insert(table.keyColumns.end(), layout.columns.begin(), layout.columns.end());
    for (const auto& m : f.measures) table.valueColumns.push_back(m.name);
    if (!f.denCountName.empty()) table.valueColumns.push_back("PROP_FOREST");
    for (const auto& pr : r.plotRows) {
      EstimateTable::Row row;
      row.keys = {Value{pr.pltCn}, Value{static_cast<double>(pr.year)}};
      appendKey(db, layout, pr.key, row.keys);
      row.values = pr.values;
      if (!f.denCountName.empty()) row.values.push_back(pr.area);
      table.rows.push_back(std::move(row));
    }
    return table;
  }

  if (r.hasLambda) table.keyColumns.push_back("lambda");
  table.keyColumns.push_back("YEAR");
  table.keyColumns.insert(table.keyColumns.end(), layout.columns.begin(), layout.columns.end());

  auto addColumns = [&](const std::string& name) {
    table.valueColumns.push_back(name);
    table.valueColumns.push_back(name + "_SE");
    if (req.variance) table.valueColumns.push_back(name + "_VAR");
  };
  for (const auto& m : f.measures) addColumns(m.name);
  std::optional<std::size_t> areaMeasure;
  if (req.totals) {
    for (std::size_t i = 0; i < f.measures.size(); ++i) {
      if (!f.measures[i].totalName.empty()) addColumns(f.measures[i].totalName);
      if (!areaMeasure && f.measures[i].den == DenKind::Area) areaMeasure = i;
    }
    if (areaMeasure) addColumns("AREA_TOTAL");
  }
  if (extra)
    for (const auto& c : extra->columns) table.valueColumns.push_back(c);
  if (!f.numCountName.empty()) table.valueColumns.push_back(f.numCountName);
  if (!f.denCountName.empty()) table.valueColumns.push_back(f.denCountName);

  for (const auto& g : r.groups) {
    EstimateTable::Row row;
    if (r.hasLambda) row.keys.push_back(g.lambda.value_or(0.0));
    row.keys.push_back(static_cast<double>(g.year));
    appendKey(db, layout, g.key, row.keys);
    auto push = [&](const Cell& c) {
      row.values.push_back(c.value);
      row.values.push_back(c.se);
      if (req.variance) row.values.push_back(c.value ? std::optional<double>(c.variance) : std::nullopt);
    };
    for (std::size_t i = 0; i < f.measures.size(); ++i) push(measureCell(f.measures[i], g.measures[i]));
    if (req.totals) {
      for (std::size_t i = 0; i < f.measures.size(); ++i)
        if (!f.measures[i].totalName.empty()) push(totalCell(g.measures[i].num));
      if (areaMeasure) push(totalCell(g.measures[*areaMeasure].den));
    }
    if (extra)
      for (auto& v : extra->values(g)) row.values.push_back(v);
    if (!f.numCountName.empty()) row.values.push_back(static_cast<double>(g.numCount));
    if (!f.denCountName.empty()) row.values.push_back(static_cast<double>(g.denCount));
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Pooled Shannon index, richness, and evenness from species abundance totals.
std::array<double, 3> pooledIndices(const std::vector<double>& totals) {
  double sum = 0;
  std::size_t richness = 0;
  for (double v : totals)
    if (v > 0) {
      sum += v;
      ++richness;
    }
  double h = 0;
  for (double v : totals)
    if (v > 0) h -= v / sum * std::log(v / sum);
  const double eh = richness > 1 ? h / std::log(static_cast<double>(richness)) : 0.0;
  return {h, static_cast<double>(richness), eh};
}

EstimateTable diversityTable(const ForestDatabase& db, const EstimatorRequest& req) {
  if (req.bySpecies) throw UsageError("diversity indices cannot be grouped by species");
  const FamilySpec stand = diversityFamily(req.diversityBasis);
  const auto e = engineRequest(req);
  const auto standResult = engine::run(db, stand, e);
  if (req.byPlot) return assemble(db, stand, standResult, req);

  const FamilySpec pooled = abundanceFamily(req.diversityBasis);
  const auto pooledResult = engine::run(db, pooled, e);
  // (lambda, year, key) -> species abundance totals
  using GroupId = std::tuple<double, int, Key>;
  struct GroupIdLess {
    bool operator()(const GroupId& a, const GroupId& b) const {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return engine::KeyLess{}(std::get<2>(a), std::get<2>(b));
    }
  };
  std::map<GroupId, std::vector<double>, GroupIdLess> totals;
  for (const auto& g : pooledResult.groups) {
    Key key(g.key.begin(), g.key.end() - 1);
    const auto& m = g.measures[0];
    totals[{g.lambda.value_or(0.0), g.year, std::move(key)}].push_back(m.num.total);
  }
  Extra extra;
  extra.columns = {"H_g", "S_g", "Eh_g"};
  extra.values = [&](const engine::GroupResult& g) -> std::vector<std::optional<double>> {
    auto it = totals.find({g.lambda.value_or(0.0), g.year, g.key});
    if (it == totals.end()) return {std::nullopt, std::nullopt, std::nullopt};
    const auto idx = pooledIndices(it->second);
    return {idx[0], idx[1], idx[2]};
  };
  EstimateTable table = assemble(db, stand, standResult, req, &extra);
  for (const auto& d : pooledResult.diagnostics.messages())
    if (std::find(table.diagnostics.begin(), table.diagnostics.end(), d) == table.diagnostics.end())
      table.diagnostics.push_back(d);
  return table;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

std::string_view toString(Family f) {
  switch (f) {
    case Family::Tpa: return "tpa";
    case Family::Biomass: return "biomass";
    case Family::Area: return "area";
    case Family::GrowMort: return "growmort";
    case Family::VitalRates: return "vitalrates";
    case Family::Dwm: return "dwm";
    case Family::Diversity: return "diversity";
    case Family::Invasive: return "invasive";
    case Family::Seedling: return "seedling";
    case Family::StandStruct: return "standstruct";
  }
  return "?";
}

Family parseFamily(std::string_view name) {
  const std::string n = lower(name);
  for (int i = 0; i <= static_cast<int>(Family::StandStruct); ++i)
    if (toString(static_cast<Family>(i)) == n) return static_cast<Family>(i);
  throw UsageError("unknown estimator '" + std::string(name) + "'");
}

FamilyInfo familyInfo(Family f) {
  switch (f) {
    case Family::Tpa:
      return {"tpa", "VOL", "DIA >= 1", "trees and basal area per forested acre (live trees)"};
    case Family::Biomass:
      return {"biomass", "VOL", "DIA >= 1", "volume, biomass (short tons), and carbon per forested acre (live trees)"};
    case Family::Area: return {"area", "VOL", "", "forest land area in acres"};
    case Family::GrowMort:
      return {"growmort", "GRM", "DIA >= 5", "annual recruitment, mortality, and removals in trees per acre"};
    case Family::VitalRates:
      return {"vitalrates", "GRM", "DIA >= 5", "annual growth of surviving trees, per tree and per acre"};
    case Family::Dwm:
      return {"dwm", "DWM (VOL fallback)", "", "down woody material volume, biomass, and carbon per acre by fuel class"};
    case Family::Diversity:
      return {"diversity", "VOL", "DIA >= 1", "Shannon index, richness, and evenness (stand level and pooled)"};
    case Family::Invasive:
      return {"invasive", "VOL", "", "percent cover of invasive species over sampled forest area"};
    case Family::Seedling: return {"seedling", "VOL", "", "seedlings per forested acre"};
    case Family::StandStruct:
      return {"standstruct", "VOL", "", "percent of forest area by structural stage (live trees DIA >= 5)"};
  }
  return {};
}

EstimateTable estimate(const ForestDatabase& db, const EstimatorRequest& request) {
  if (request.workers == 0) throw UsageError("workers must be at least 1");
  EstimateTable table;
  if (request.family == Family::Diversity) {
    table = diversityTable(db, request);
  } else {
    if (request.family == Family::Area && request.treeDomain)
      throw UsageError("area has no tree domain; use an area domain");
    const FamilySpec spec = familySpec(request);
    table = assemble(db, spec, engine::run(db, spec, engineRequest(request)), request);
  }
  if (!request.tidy && !request.byPlot) {
    if (request.family == Family::Dwm) return pivotWide(table, "FUEL_TYPE");
    if (request.family == Family::StandStruct) return pivotWide(table, "STAGE");
  }
  return table;
}

namespace {
EstimateTable as(Family f, const ForestDatabase& db, EstimatorRequest r) {
  r.family = f;
  return estimate(db, r);
}
}  // namespace

EstimateTable tpa(const ForestDatabase& db, EstimatorRequest r) { return as(Family::Tpa, db, std::move(r)); }
EstimateTable biomass(const ForestDatabase& db, EstimatorRequest r) { return as(Family::Biomass, db, std::move(r)); }
EstimateTable area(const ForestDatabase& db, EstimatorRequest r) { return as(Family::Area, db, std::move(r)); }
EstimateTable growMort(const ForestDatabase& db, EstimatorRequest r) { return as(Family::GrowMort, db, std::move(r)); }
EstimateTable vitalRates(const ForestDatabase& db, EstimatorRequest r) {
  return as(Family::VitalRates, db, std::move(r));
}
EstimateTable dwm(const ForestDatabase& db, EstimatorRequest r) { return as(Family::Dwm, db, std::move(r)); }
EstimateTable diversity(const ForestDatabase& db, EstimatorRequest r) {
  return as(Family::Diversity, db, std::move(r));
}
EstimateTable invasive(const ForestDatabase& db, EstimatorRequest r) { return as(Family::Invasive, db, std::move(r)); }
EstimateTable seedling(const ForestDatabase& db, EstimatorRequest r) { return as(Family::Seedling, db, std::move(r)); }
EstimateTable standStruct(const ForestDatabase& db, EstimatorRequest r) {
  return as(Family::StandStruct, db, std::move(r));
}

std::string makeClasses(double value, double width, double lowerBound) {
  if (!(width > 0)) throw UsageError("class width must be positive");
  return std::get<std::string>(engine::sizeClassPart(value, width, lowerBound).label);
}

}  // namespace timberline
