#include "fixtures.hpp"

#include <stdexcept>
#include <string>

namespace timberline::synth {

namespace {

PlotRecord plot(std::string cn, int number, int year, double lon, double lat) {
  PlotRecord p;
  p.cn = std::move(cn);
  p.statecd = 9;
  p.plot = number;
  p.invyr = year;
  p.measyear = year;
  p.lon = lon;
  p.lat = lat;
  p.plotStatus = 1;
  p.designcd = 1;
  return p;
}

ConditionRecord forest(const std::string& plt, int owncd) {
  ConditionRecord c;
  c.cn = "C" + plt;
  c.pltCn = plt;
  c.condid = 1;
  c.condStatus = 1;
  c.condpropUnadj = 1.0;
  c.fortypcd = 800;
  c.owncd = owncd;
  return c;
}

TreeRecord liveTree(std::string cn, const std::string& plt, int spcd, double dia, double tpa) {
  TreeRecord t;
  t.cn = std::move(cn);
  t.pltCn = plt;
  t.condid = 1;
  t.statuscd = 1;
  t.spcd = spcd;
  t.dia = dia;
  t.tpaUnadj = tpa;
  t.basis = dia < 5.0 ? TreeBasis::Microplot : TreeBasis::Subplot;
  return t;
}

TreeRecord synth1Tree(std::string cn, const std::string& plt, int spcd, double dia) {
  TreeRecord t = liveTree(std::move(cn), plt, spcd, dia, 6.0);
  t.volcfnet = 100;
  t.volcsnet = 80;
  t.drybioAg = 1000;
  t.drybioBg = 200;
  t.carbonAg = 500;
  t.carbonBg = 100;
  return t;
}

void addSpecies(Tables& t) {
  t.species.rows = {{129, "eastern white pine", "Pinus", "Pinus strobus"},
                    {316, "red maple", "Acer", "Acer rubrum"}};
}

void addDesign(Tables& t, int evalid, EvalType type, int start, int end, double area,
               const std::vector<std::pair<double, std::vector<std::string>>>& strata,
               const std::vector<int>& panelYears) {
  Evaluation e;
  e.evalid = evalid;
  e.statecd = 9;
  e.type = type;
  e.reportYear = end;
  e.startInvyr = start;
  e.endInvyr = end;
  t.evaluations.rows.push_back(e);
  const std::string unit = "EU" + std::to_string(evalid);
  t.estimationUnits.rows.push_back({unit, evalid, area});
  std::size_t k = 0;
  for (std::size_t h = 0; h < strata.size(); ++h) {
    const std::string cn = "S" + std::to_string(evalid) + "_" + std::to_string(h + 1);
    t.strata.rows.push_back({cn, unit, strata[h].first, 1.0, 1.0, 1.0});
    for (const auto& plt : strata[h].second) t.assignments.rows.push_back({plt, cn, panelYears[k++]});
  }
}

Tables synth1() {
  Tables t;
  t.plots.rows = {plot("P1", 1, 2018, -72.5, 41.5), plot("P2", 2, 2018, -72.4, 41.6),
                  plot("P3", 3, 2018, -71.5, 41.5), plot("P4", 4, 2018, -71.4, 41.6)};
  t.conditions.rows = {forest("P1", 31), forest("P2", 31), forest("P3", 46), forest("P4", 46)};
  t.trees.rows = {synth1Tree("T1", "P1", 316, 10), synth1Tree("T2", "P1", 316, 10),
                  synth1Tree("T3", "P2", 129, 20), synth1Tree("T4", "P4", 316, 6)};
  addDesign(t, 91801, EvalType::Vol, 2018, 2018, 1000, {{1.0, {"P1", "P2", "P3", "P4"}}}, {2018, 2018, 2018, 2018});
  addSpecies(t);
  return t;
}

Tables synth5Panel() {
  Tables t;
  std::vector<std::string> s1, s2;
  std::vector<int> years;
  for (int i = 1; i <= 20; ++i) {
    const std::string cn = "Q" + std::to_string(i);
    const int year = 2014 + (i - 1) % 5;
    t.plots.rows.push_back(plot(cn, i, year, -72.0 + 0.01 * i, 41.0 + 0.01 * i));
    t.conditions.rows.push_back(forest(cn, i % 2 ? 31 : 46));
    for (int k = 0; k < 1 + i % 3; ++k)
      t.trees.rows.push_back(liveTree(cn + "T" + std::to_string(k + 1), cn, 316, 8 + i % 7, 6.0));
    (i <= 12 ? s1 : s2).push_back(cn);
  }
  for (const auto& cn : s1) years.push_back(2014 + (std::stoi(cn.substr(1)) - 1) % 5);
  for (const auto& cn : s2) years.push_back(2014 + (std::stoi(cn.substr(1)) - 1) % 5);
  addDesign(t, 91801, EvalType::Vol, 2014, 2018, 5000, {{0.6, s1}, {0.4, s2}}, years);
  addSpecies(t);
  return t;
}

Tables synthGrm() {
  Tables t = synth1();
  t.trees.rows.clear();
  for (auto& p : t.plots.rows) p.remper = 5.0;

  TreeRecord mort = liveTree("G1", "P1", 316, 8, 6);
  mort.statuscd = 2;
  mort.component = Component::Mortality;
  mort.tpamortUnadj = 6;

  TreeRecord surv = liveTree("G2", "P2", 316, 11, 6);
  surv.prevdia = 10;
  surv.component = Component::Survivor;
  surv.tpagrowUnadj = 6;
  surv.volcfnet = 20;
  surv.prevVolcfnet = 15;
  surv.drybioAg = 300;
  surv.prevDrybioAg = 250;

  TreeRecord cut = liveTree("G3", "P3", 129, 12, 6);
  cut.statuscd = 3;
  cut.component = Component::Cut;
  cut.tparemvUnadj = 6;

  TreeRecord ingrowth = liveTree("G4", "P4", 316, 5.5, 6);
  ingrowth.component = Component::Ingrowth;
  ingrowth.tpagrowUnadj = 6;

  TreeRecord sapling = liveTree("G5", "P4", 316, 1.2, 74.965);
  sapling.component = Component::Ingrowth;
  sapling.tpagrowUnadj = 74.965;

  t.trees.rows = {mort, surv, cut, ingrowth, sapling};
  addDesign(t, 91803, EvalType::Grm, 2018, 2018, 1000, {{1.0, {"P1", "P2", "P3", "P4"}}}, {2018, 2018, 2018, 2018});
  return t;
}

Tables synthInv() {
  Tables t = synth1();
  for (auto& p : t.plots.rows) p.invasiveSampling = p.cn == "P3" ? 0 : 1;
  t.invasives.rows = {{"P1", 1, "ALPE4", 40}, {"P2", 1, "ALPE4", 10}, {"P2", 1, "CEOR7", 25}};
  t.seedlings.rows = {{"P2", 1, 316, 2, 74.97}};
  t.dwm.rows = {{"P1", 1, FuelType::Hr1000, 50, 0.8, 0.4}};
  return t;
}

}  // namespace

Tables synth1Tables() { return synth1(); }

ForestDatabase buildFixture(std::string_view name) {
  if (name == "SYNTH-1") return ForestDatabase(synth1());
  if (name == "SYNTH-5PANEL") return ForestDatabase(synth5Panel());
  if (name == "SYNTH-GRM") return ForestDatabase(synthGrm());
  if (name == "SYNTH-INV") return ForestDatabase(synthInv());
  throw std::invalid_argument("unknown fixture " + std::string(name));
}

}  // namespace timberline::synth
