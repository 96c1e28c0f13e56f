#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace timberline {

/// FIPS code for a two-letter postal abbreviation (case-insensitive).
std::optional<int> stateFips(std::string_view abbreviation);

/// Upper-case postal abbreviation for a FIPS code.
std::optional<std::string> stateAbbreviation(int fips);

}  // namespace timberline
