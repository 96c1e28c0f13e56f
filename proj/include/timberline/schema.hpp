#pragma once

#include <span>
#include <string_view>

#include "timberline/records.hpp"
#include "timberline/value.hpp"

namespace timberline {

/// Column descriptor for one typed field of a DataMart table. `set` throws
/// std::invalid_argument when the value is missing or out of the field's domain.
template <class R>
struct FieldDef {
  std::string_view name;
  ColumnType type;
  bool required;
  Value (*get)(const R&);
  void (*set)(R&, const Value&);
};

template <class R>
std::span<const FieldDef<R>> fieldsOf();

/// Table name as it appears in `<STATE>_<TABLE>.csv`.
template <class R>
std::string_view tableNameOf();

template <class R>
const FieldDef<R>* findField(std::string_view name) {
  for (const auto& f : fieldsOf<R>())
    if (f.name == name) return &f;
  return nullptr;
}

/// Tables that must be present for loadDatabase to succeed.
inline constexpr std::string_view kMandatoryTables[] = {
    "PLOT", "COND", "POP_EVAL", "POP_ESTN_UNIT", "POP_STRATUM", "POP_PLOT_STRATUM_ASSGN"};

inline constexpr std::string_view kOptionalTables[] = {
    "TREE", "SEEDLING", "COND_DWM_CALC", "INVASIVE_SUBPLOT_SPP"};

/// Reference table shared by all states; stored without a state prefix.
inline constexpr std::string_view kSpeciesFile = "REF_SPECIES.csv";

}  // namespace timberline
