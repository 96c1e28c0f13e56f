#include "timberline/columns.hpp"

#include <algorithm>
#include <cctype>

#include "timberline/error.hpp"
#include "timberline/schema.hpp"

namespace timberline {

namespace {

// Slot layout: table in bits 16+, passthrough flag in bit 15, column index below.
enum TableId : std::size_t { kPlot = 0, kCond = 1, kTree = 2, kSeedling = 3, kDwm = 4, kInvasive = 5 };
constexpr std::size_t kExtraBit = std::size_t{1} << 15;

std::size_t makeSlot(std::size_t table, bool extra, std::size_t index) {
  return (table << 16) | (extra ? kExtraBit : 0) | index;
}

template <class R>
std::optional<domain::ColumnBinding> find(const Table<R>& table, std::size_t id, std::string_view name) {
  const auto fields = fieldsOf<R>();
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == name) return domain::ColumnBinding{fields[i].type, makeSlot(id, false, i)};
  for (std::size_t i = 0; i < table.extras.size(); ++i)
    if (table.extras[i].name == name) return domain::ColumnBinding{table.extras[i].type, makeSlot(id, true, i)};
  return std::nullopt;
}

template <class R>
Value read(const Table<R>& table, std::size_t slot, std::size_t row) {
  const std::size_t index = slot & (kExtraBit - 1);
  if (slot & kExtraBit) return table.extras[index].values[row];
  return fieldsOf<R>()[index].get(table.rows[row]);
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
  return out;
}

}  // namespace

std::string_view tableName(RecordLevel level) {
  switch (level) {
    case RecordLevel::Tree: return "TREE";
    case RecordLevel::Seedling: return "SEEDLING";
    case RecordLevel::Dwm: return "COND_DWM_CALC";
    case RecordLevel::Invasive: return "INVASIVE_SUBPLOT_SPP";
    case RecordLevel::None: break;
  }
  return "";
}

ColumnCatalog::ColumnCatalog(const ForestDatabase& db, RecordLevel leaf) : db_(&db), leaf_(leaf) {}

std::optional<domain::ColumnBinding> ColumnCatalog::resolve(std::string_view rawName) const {
  const Tables& t = db_->tables();
  const std::string name = upper(rawName);
  auto inLeaf = [&](std::string_view col) -> std::optional<domain::ColumnBinding> {
    switch (leaf_) {
      case RecordLevel::Tree: return find(t.trees, kTree, col);
      case RecordLevel::Seedling: return find(t.seedlings, kSeedling, col);
      case RecordLevel::Dwm: return find(t.dwm, kDwm, col);
      case RecordLevel::Invasive: return find(t.invasives, kInvasive, col);
      case RecordLevel::None: return std::nullopt;
    }
    return std::nullopt;
  };
  if (const auto dot = name.find('.'); dot != std::string::npos) {
    const std::string_view qual = std::string_view(name).substr(0, dot);
    const std::string_view col = std::string_view(name).substr(dot + 1);
    if (qual == "PLOT") return find(t.plots, kPlot, col);
    if (qual == "COND") return find(t.conditions, kCond, col);
    if (leaf_ != RecordLevel::None && qual == tableName(leaf_)) return inLeaf(col);
    return std::nullopt;
  }
  if (auto b = inLeaf(name)) return b;
  if (auto b = find(t.conditions, kCond, name)) return b;
  return find(t.plots, kPlot, name);
}

domain::Resolver ColumnCatalog::resolver() const {
  return [this](std::string_view n) { return resolve(n); };
}

domain::ColumnBinding ColumnCatalog::require(std::string_view name, std::string_view context) const {
  auto b = resolve(name);
  if (!b) {
    std::string where = "PLOT or COND";
    if (leaf_ != RecordLevel::None) where = std::string(tableName(leaf_)) + ", COND, or PLOT";
    throw BindError("unknown column '" + std::string(name) + "' in " + std::string(context) + " (not found in " +
                    where + ")");
  }
  return *b;
}

bool ColumnCatalog::isAreaLevel(std::size_t slot) { return (slot >> 16) <= kCond; }

Value JoinedRow::value(std::size_t slot) const {
  const Tables& t = db_->tables();
  switch (slot >> 16) {
    case kPlot: return read(t.plots, slot, plot_);
    case kCond: return cond_ ? read(t.conditions, slot, *cond_) : Value{};
    default: break;
  }
  if (!record_) return {};
  switch (slot >> 16) {
    case kTree: return read(t.trees, slot, *record_);
    case kSeedling: return read(t.seedlings, slot, *record_);
    case kDwm: return read(t.dwm, slot, *record_);
    case kInvasive: return read(t.invasives, slot, *record_);
    default: return {};
  }
}

}  // namespace timberline
