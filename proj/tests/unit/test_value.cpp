#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "timberline/states.hpp"
#include "timberline/value.hpp"

using namespace timberline;

TEST_CASE("formatNumber is shortest round-trip text") {
  CHECK(formatNumber(6.0) == "6");
  CHECK(formatNumber(0.1) == "0.1");
  CHECK(formatNumber(-2.5) == "-2.5");
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = d(gen);
    CHECK(parseNumber(formatNumber(x)).value() == x);
  }
}

TEST_CASE("formatFixed") {
  CHECK(formatFixed(40.824829, 2) == "40.82");
  CHECK(formatFixed(3.0, 2) == "3.00");
}

TEST_CASE("parseNumber is strict") {
  CHECK(parseNumber("12") == 12.0);
  CHECK(parseNumber("-1.5e2") == -150.0);
  CHECK_FALSE(parseNumber(" 12"));
  CHECK_FALSE(parseNumber("12 "));
  CHECK_FALSE(parseNumber("12a"));
  CHECK_FALSE(parseNumber(""));
}

TEST_CASE("value ordering puts null before numbers before text") {
  const Value null{}, one{1.0}, two{2.0}, text{std::string("a")};
  CHECK(compareValues(null, one) < 0);
  CHECK(compareValues(one, two) < 0);
  CHECK(compareValues(two, text) < 0);
  CHECK(compareValues(text, text) == 0);
  CHECK(formatValue(null).empty());
  CHECK(formatValue(two) == "2");
}

TEST_CASE("state codes") {
  CHECK(stateFips("CT") == 9);
  CHECK(stateFips("ri") == 44);
  CHECK_FALSE(stateFips("XX"));
  CHECK(stateAbbreviation(9) == "CT");
  CHECK_FALSE(stateAbbreviation(99));
}
