#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "random_db.hpp"
#include "timberline/database.hpp"
#include "timberline/error.hpp"

using namespace timberline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("timberline-test-" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

bool hasRule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

/// SYNTH-1 rows moved to another state (RI, 44) with distinct keys.
Tables rhodeIslandCopy() {
  Tables t = synth::synth1Tables();
  auto re = [](std::string s) { return "RI" + s; };
  for (auto& p : t.plots.rows) {
    p.cn = re(p.cn);
    p.statecd = 44;
  }
  for (auto& c : t.conditions.rows) {
    c.cn = re(c.cn);
    c.pltCn = re(c.pltCn);
  }
  for (auto& tr : t.trees.rows) {
    tr.cn = re(tr.cn);
    tr.pltCn = re(tr.pltCn);
  }
  for (auto& e : t.evaluations.rows) {
    e.evalid = 441801;
    e.statecd = 44;
  }
  for (auto& u : t.estimationUnits.rows) {
    u.cn = re(u.cn);
    u.evalid = 441801;
  }
  for (auto& s : t.strata.rows) {
    s.cn = re(s.cn);
    s.estnUnitCn = re(s.estnUnitCn);
  }
  for (auto& a : t.assignments.rows) {
    a.pltCn = re(a.pltCn);
    a.stratumCn = re(a.stratumCn);
  }
  return t;
}

template <class R>
void sortRows(Table<R>& t, auto key) {
  std::sort(t.rows.begin(), t.rows.end(), [&](const R& a, const R& b) { return key(a) < key(b); });
}

}  // namespace

TEST_CASE("SYNTH-1 fixture directory loads with the documented row counts") {
  const auto db = loadDatabase(fs::path(TIMBERLINE_FIXTURE_DIR) / "SYNTH-1");
  CHECK(db.tables().plots.size() == 4);
  CHECK(db.tables().conditions.size() == 4);
  CHECK(db.tables().trees.size() == 4);
  CHECK(validateIntegrity(db).empty());
}

TEST_CASE("write then load round-trips every field") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto db = synth::randomDatabase(seed);
    TempDir dir("roundtrip");
    writeDatabase(db, dir.path);
    const auto back = loadDatabase(dir.path);
    CHECK(back == db);
  }
  for (auto name : synth::kFixtureNames) {
    const auto db = synth::buildFixture(name);
    TempDir dir("roundtrip-fixture");
    writeDatabase(db, dir.path);
    CHECK(loadDatabase(dir.path) == db);
  }
}

TEST_CASE("empty database writes header-only mandatory files and omits optional ones") {
  TempDir dir("empty");
  writeDatabase(ForestDatabase(Tables{}), dir.path, WriteOptions{"CT"});
  CHECK(fs::exists(dir.path / "CT_PLOT.csv"));
  CHECK(fs::exists(dir.path / "CT_POP_STRATUM.csv"));
  CHECK_FALSE(fs::exists(dir.path / "CT_SEEDLING.csv"));
  std::ifstream in(dir.path / "CT_PLOT.csv");
  std::string header, extra;
  std::getline(in, header);
  CHECK(header.rfind("CN,", 0) == 0);
  CHECK_FALSE(std::getline(in, extra));
  CHECK(loadDatabase(dir.path).tables().plots.size() == 0);
}

TEST_CASE("state merge is a union and order-independent") {
  TempDir dir("merge");
  writeDatabase(synth::buildFixture("SYNTH-1"), dir.path);
  writeDatabase(ForestDatabase(rhodeIslandCopy()), dir.path);
  const auto ct = loadDatabase(dir.path, {"CT"});
  const auto both = loadDatabase(dir.path, {"RI", "CT"});
  const auto reversed = loadDatabase(dir.path, {"CT", "RI"});
  CHECK(ct.tables().plots.size() == 4);
  CHECK(both.tables().plots.size() == 8);
  Tables a = both.tables(), b = reversed.tables();
  auto cn = [](const auto& r) { return r.cn; };
  sortRows(a.plots, cn);
  sortRows(b.plots, cn);
  sortRows(a.trees, cn);
  sortRows(b.trees, cn);
  CHECK(a.plots == b.plots);
  CHECK(a.trees == b.trees);
  CHECK(validateIntegrity(both).empty());
}

TEST_CASE("missing mandatory table and bad cells are data errors") {
  TempDir dir("broken");
  writeDatabase(synth::buildFixture("SYNTH-1"), dir.path);
  fs::remove(dir.path / "CT_POP_STRATUM.csv");
  CHECK_THROWS_AS(loadDatabase(dir.path), DataError);

  TempDir dir2("badcell");
  writeDatabase(synth::buildFixture("SYNTH-1"), dir2.path);
  std::ofstream(dir2.path / "CT_PLOT.csv", std::ios::app) << "PX,9,5,notayear,,,,,,,\n";
  CHECK_THROWS_AS(loadDatabase(dir2.path), DataError);
}

TEST_CASE("passthrough columns survive a round trip") {
  Tables t = synth::synth1Tables();
  ExtraColumn extra;
  extra.name = "ECOSUBCD";
  extra.type = ColumnType::Text;
  for (std::size_t i = 0; i < t.plots.size(); ++i) extra.values.push_back(std::string("221A") + char('a' + i));
  t.plots.extras.push_back(extra);
  const ForestDatabase db(std::move(t));
  TempDir dir("extras");
  writeDatabase(db, dir.path);
  CHECK(loadDatabase(dir.path) == db);
}

TEST_CASE("integrity: SYNTH-1 is valid") { CHECK(validateIntegrity(synth::buildFixture("SYNTH-1")).empty()); }

TEST_CASE("integrity: dangling tree plot") {
  Tables t = synth::synth1Tables();
  t.trees.rows[0].pltCn = "NOPE";
  const auto v = validateIntegrity(ForestDatabase(std::move(t)));
  CHECK(hasRule(v, "tree→plot"));
}

TEST_CASE("integrity: stratum weights summing to 0.9") {
  Tables t = synth::synth1Tables();
  t.strata.rows[0].weight = 0.9;
  const auto v = validateIntegrity(ForestDatabase(std::move(t)));
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "Σ W_h ≠ 1");
}

TEST_CASE("integrity: each listed invariant is checked") {
  {
    Tables t = synth::synth1Tables();
    t.plots.rows[1].cn = t.plots.rows[0].cn;
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "duplicate CN"));
  }
  {
    Tables t = synth::synth1Tables();
    t.plots.rows[0].remper = 0.0;
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "REMPER > 0"));
  }
  {
    Tables t = synth::synth1Tables();
    t.plots.rows[0].lat = 95;
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "LAT in [-90, 90]"));
  }
  {
    Tables t = synth::synth1Tables();
    t.conditions.rows[0].condpropUnadj = 1.2;
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "CONDPROP_UNADJ in [0, 1]"));
  }
  {
    Tables t = synth::synth1Tables();
    auto c = t.conditions.rows[0];
    c.cn = "CP1b";
    c.condid = 2;
    c.condpropUnadj = 0.5;
    t.conditions.rows.push_back(c);
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "Σ CONDPROP_UNADJ ≤ 1"));
  }
  {
    Tables t = synth::synth1Tables();
    t.trees.rows[0].basis = TreeBasis::Microplot;
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "MICR basis requires 1.0 ≤ DIA < 5.0"));
  }
  {
    Tables t = synth::synth1Tables();
    t.trees.rows[0].condid = 7;
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "tree→cond"));
  }
  {
    Tables t = synth::synth1Tables();
    t.assignments.rows.push_back(t.assignments.rows[0]);
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "one stratum per plot per evaluation"));
  }
  {
    Tables t = synth::synth1Tables();
    t.strata.rows[0].adjSubp = 0;
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "adjustment factors > 0"));
  }
  {
    Tables t = synth::synth1Tables();
    t.seedlings.rows.push_back({"P1", 1, 316, 0, 74.97});
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "TREECOUNT ≥ 1"));
  }
  {
    Tables t = synth::synth1Tables();
    t.dwm.rows.push_back({"P1", 1, FuelType::Hr1000, -1, 0, 0});
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "per-acre values ≥ 0"));
  }
  {
    Tables t = synth::synth1Tables();
    t.invasives.rows.push_back({"P1", 1, "ALPE4", 150});
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "COVER_PCT in [0, 100]"));
  }
  {
    Tables t = synth::synth1Tables();
    t.species.rows.push_back(t.species.rows[0]);
    CHECK(hasRule(validateIntegrity(ForestDatabase(std::move(t))), "duplicate SPCD"));
  }
}

TEST_CASE("annual design codes") {
  CHECK(isAnnualDesign(std::nullopt));
  CHECK(isAnnualDesign(1));
  CHECK(isAnnualDesign(111));
  CHECK(isAnnualDesign(501));
  CHECK_FALSE(isAnnualDesign(999));
}
