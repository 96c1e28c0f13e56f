#include "timberline/value.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace timberline {

std::string formatNumber(double x) {
  if (x == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

std::string formatFixed(double x, int decimals) {
  std::array<char, 128> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::fixed, decimals);
  std::string s(buf.data(), end);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string formatValue(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return formatNumber(*d);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return {};
}

std::optional<double> parseNumber(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') {
    ++first;
    if (first == last || *first == '-') return std::nullopt;
  }
  double out = 0;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || !std::isfinite(out)) return std::nullopt;
  return out;
}

std::strong_ordering compareValues(const Value& a, const Value& b) {
  if (a.index() != b.index()) return a.index() <=> b.index();
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    if (*x < y) return std::strong_ordering::less;
    if (*x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  if (const auto* s = std::get_if<std::string>(&a)) return s->compare(std::get<std::string>(b)) <=> 0;
  return std::strong_ordering::equal;
}

}  // namespace timberline
