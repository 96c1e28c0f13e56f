#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include <json.hpp>

#include "timberline/table.hpp"

using namespace timberline;

namespace {

EstimateTable sample() {
  EstimateTable t;
  t.keyColumns = {"YEAR", "FUEL_TYPE"};
  t.valueColumns = {"VOL_ACRE", "nPlots_VOL"};
  t.rows.push_back({{Value(2018.0), Value(std::string("1HR"))}, {1.23456, 3.0}});
  t.rows.push_back({{Value(2018.0), Value(std::string("1000HR"))}, {50.0, 1.0}});
  t.rows.push_back({{Value(2019.0), Value(std::string("1HR"))}, {std::nullopt, 0.0}});
  t.diagnostics = {"stratum S1 has no plots"};
  return t;
}

}  // namespace

TEST_CASE("column lookup") {
  const auto t = sample();
  CHECK(t.keyIndex("FUEL_TYPE") == std::optional<std::size_t>(1));
  CHECK(t.valueIndex("nPlots_VOL") == std::optional<std::size_t>(1));
  CHECK_FALSE(t.keyIndex("VOL_ACRE").has_value());
  CHECK_FALSE(t.valueIndex("missing").has_value());
}

TEST_CASE("csv output") {
  std::ostringstream out;
  writeCsv(out, sample());
  CHECK(out.str() ==
        "YEAR,FUEL_TYPE,VOL_ACRE,nPlots_VOL\n"
        "2018,1HR,1.23456,3\n"
        "2018,1000HR,50,1\n"
        "2019,1HR,,0\n");
}

TEST_CASE("pretty rounding leaves counts alone") {
  TableFormat pretty{true};
  CHECK(formatCell("VOL_ACRE", 1.23456, pretty) == "1.23");
  CHECK(formatCell("nPlots_VOL", 3.0, pretty) == "3");
  CHECK(formatCell("VOL_ACRE", std::nullopt, pretty).empty());
  CHECK(formatCell("VOL_ACRE", 0.1, {}) == "0.1");
  std::ostringstream out;
  writeCsv(out, sample(), pretty);
  CHECK(out.str().find("2018,1HR,1.23,3\n") != std::string::npos);
  CHECK(out.str().find("2018,1000HR,50.00,1\n") != std::string::npos);
}

TEST_CASE("json output") {
  std::ostringstream out;
  writeJson(out, sample());
  const auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["columns"] == nlohmann::json({"YEAR", "FUEL_TYPE", "VOL_ACRE", "nPlots_VOL"}));
  REQUIRE(doc["rows"].size() == 3);
  CHECK(doc["rows"][0]["YEAR"] == 2018);
  CHECK(doc["rows"][0]["FUEL_TYPE"] == "1HR");
  CHECK(doc["rows"][0]["VOL_ACRE"].get<double>() == 1.23456);
  CHECK(doc["rows"][2]["VOL_ACRE"].is_null());
  CHECK(doc["diagnostics"][0] == "stratum S1 has no plots");

  std::ostringstream pretty;
  writeJson(pretty, sample(), TableFormat{true});
  const auto p = nlohmann::json::parse(pretty.str());
  CHECK(p["rows"][0]["VOL_ACRE"].get<double>() == doctest::Approx(1.23));
}

TEST_CASE("pivotWide spreads a key into columns") {
  const auto wide = pivotWide(sample(), "FUEL_TYPE");
  CHECK(wide.keyColumns == std::vector<std::string>{"YEAR"});
  REQUIRE(wide.valueColumns.size() == 4);
  // Levels appear in first-seen row order.
  CHECK(wide.valueColumns[0] == "VOL_ACRE_1HR");
  CHECK(wide.valueColumns[1] == "nPlots_VOL_1HR");
  CHECK(wide.valueColumns[2] == "VOL_ACRE_1000HR");
  CHECK(wide.valueColumns[3] == "nPlots_VOL_1000HR");
  REQUIRE(wide.rows.size() == 2);
  CHECK(wide.rows[0].values[0] == std::optional<double>(1.23456));
  CHECK(wide.rows[0].values[2] == std::optional<double>(50.0));
  CHECK_FALSE(wide.rows[1].values[0].has_value());
  CHECK(wide.rows[1].values[1] == std::optional<double>(0.0));
  CHECK_FALSE(wide.rows[1].values[2].has_value());
  CHECK(wide.diagnostics == sample().diagnostics);
}

TEST_CASE("pivotWide without the key is the identity") {
  const auto t = sample();
  const auto same = pivotWide(t, "STAGE");
  CHECK(same.keyColumns == t.keyColumns);
  CHECK(same.rows == t.rows);
}
