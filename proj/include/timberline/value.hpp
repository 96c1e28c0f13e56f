#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace timberline {

enum class ColumnType { Number, Text };

/// A nullable cell: null, a number, or text.
using Value = std::variant<std::monostate, double, std::string>;

inline bool isNull(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Shortest decimal text that parses back to the same double.
std::string formatNumber(double x);

/// Fixed-point with `decimals` digits after the point.
std::string formatFixed(double x, int decimals);

/// Empty string for null.
std::string formatValue(const Value& v);

/// Strict full-string parse; leading/trailing blanks are rejected.
std::optional<double> parseNumber(std::string_view text);

/// Total order: null < numbers < text.
std::strong_ordering compareValues(const Value& a, const Value& b);

}  // namespace timberline
