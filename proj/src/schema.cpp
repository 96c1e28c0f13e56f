#include "timberline/schema.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace timberline {

// ---- enum text forms ------------------------------------------------------

std::string_view toString(TreeBasis b) {
  switch (b) {
    case TreeBasis::Microplot: return "MICR";
    case TreeBasis::Subplot: return "SUBP";
    case TreeBasis::Macroplot: return "MACR";
  }
  return "SUBP";
}

std::string_view toString(Component c) {
  switch (c) {
    case Component::None: return "NONE";
    case Component::Survivor: return "SURVIVOR";
    case Component::Mortality: return "MORTALITY";
    case Component::Cut: return "CUT";
    case Component::Ingrowth: return "INGROWTH";
  }
  return "NONE";
}

std::string_view toString(FuelType f) {
  switch (f) {
    case FuelType::Hr1: return "1HR";
    case FuelType::Hr10: return "10HR";
    case FuelType::Hr100: return "100HR";
    case FuelType::Hr1000: return "1000HR";
    case FuelType::Duff: return "DUFF";
    case FuelType::Litter: return "LITTER";
    case FuelType::Pile: return "PILE";
  }
  return "1HR";
}

std::string_view toString(EvalType t) {
  switch (t) {
    case EvalType::Vol: return "VOL";
    case EvalType::Grm: return "GRM";
    case EvalType::Chng: return "CHNG";
    case EvalType::Dwm: return "DWM";
  }
  return "VOL";
}

std::optional<TreeBasis> parseTreeBasis(std::string_view t) {
  if (t == "MICR" || t == "MICROPLOT") return TreeBasis::Microplot;
  if (t == "SUBP" || t == "SUBPLOT") return TreeBasis::Subplot;
  if (t == "MACR" || t == "MACROPLOT") return TreeBasis::Macroplot;
  return std::nullopt;
}

std::optional<Component> parseComponent(std::string_view t) {
  // DataMart splits some components by measurement (MORTALITY1, CUT2, ...).
  while (!t.empty() && t.back() >= '0' && t.back() <= '9') t.remove_suffix(1);
  if (t == "NONE" || t == "NOT USED" || t == "REVERSION" || t == "DIVERSION") return Component::None;
  if (t == "SURVIVOR") return Component::Survivor;
  if (t == "MORTALITY") return Component::Mortality;
  if (t == "CUT") return Component::Cut;
  if (t == "INGROWTH") return Component::Ingrowth;
  return std::nullopt;
}

std::optional<FuelType> parseFuelType(std::string_view t) {
  for (auto f : {FuelType::Hr1, FuelType::Hr10, FuelType::Hr100, FuelType::Hr1000, FuelType::Duff,
                 FuelType::Litter, FuelType::Pile})
    if (toString(f) == t) return f;
  return std::nullopt;
}

std::optional<EvalType> parseEvalType(std::string_view t) {
  if (t == "VOL" || t == "EXPVOL" || t == "EXPCURR") return EvalType::Vol;
  if (t == "GRM" || t == "EXPGROW" || t == "EXPMORT" || t == "EXPREMV") return EvalType::Grm;
  if (t == "CHNG" || t == "EXPCHNG") return EvalType::Chng;
  if (t == "DWM" || t == "EXPDWM") return EvalType::Dwm;
  return std::nullopt;
}

namespace {

using std::optional;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

optional<double> optNum(const Value& v) {
  if (isNull(v)) return std::nullopt;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  fail("expected a number");
}

double num(const Value& v) {
  auto d = optNum(v);
  if (!d) fail("value is required");
  return *d;
}

int asInt(double d) {
  if (std::floor(d) != d || std::abs(d) > 2e9) fail("expected an integer, got " + formatNumber(d));
  return static_cast<int>(d);
}

optional<int> optInt(const Value& v) {
  auto d = optNum(v);
  if (!d) return std::nullopt;
  return asInt(*d);
}

int reqInt(const Value& v) { return asInt(num(v)); }

std::string text(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* d = std::get_if<double>(&v)) return formatNumber(*d);
  fail("value is required");
}

optional<std::string> optText(const Value& v) {
  if (isNull(v)) return std::nullopt;
  return text(v);
}

Value of(double d) { return d; }
Value of(int i) { return static_cast<double>(i); }
Value of(const std::string& s) { return s; }
Value of(const optional<double>& d) { return d ? Value{*d} : Value{}; }
Value of(const optional<int>& i) { return i ? Value{static_cast<double>(*i)} : Value{}; }
template <class E>
Value ofEnum(const optional<E>& e) {
  return e ? Value{std::string(toString(*e))} : Value{};
}

template <class E>
E reqEnum(const Value& v, optional<E> (*parse)(std::string_view)) {
  const std::string s = text(v);
  auto e = parse(s);
  if (!e) fail("unrecognized code '" + s + "'");
  return *e;
}

template <class E>
optional<E> optEnum(const Value& v, optional<E> (*parse)(std::string_view)) {
  if (isNull(v)) return std::nullopt;
  return reqEnum(v, parse);
}

constexpr auto N = ColumnType::Number;
constexpr auto T = ColumnType::Text;

const FieldDef<PlotRecord> kPlotFields[] = {
    {"CN", T, true, [](const PlotRecord& r) { return of(r.cn); }, [](PlotRecord& r, const Value& v) { r.cn = text(v); }},
    {"STATECD", N, true, [](const PlotRecord& r) { return of(r.statecd); }, [](PlotRecord& r, const Value& v) { r.statecd = reqInt(v); }},
    {"PLOT", N, true, [](const PlotRecord& r) { return of(r.plot); }, [](PlotRecord& r, const Value& v) { r.plot = reqInt(v); }},
    {"INVYR", N, true, [](const PlotRecord& r) { return of(r.invyr); }, [](PlotRecord& r, const Value& v) { r.invyr = reqInt(v); }},
    {"MEASYEAR", N, false, [](const PlotRecord& r) { return of(r.measyear); }, [](PlotRecord& r, const Value& v) { r.measyear = optInt(v); }},
    {"LAT", N, false, [](const PlotRecord& r) { return of(r.lat); }, [](PlotRecord& r, const Value& v) { r.lat = optNum(v); }},
    {"LON", N, false, [](const PlotRecord& r) { return of(r.lon); }, [](PlotRecord& r, const Value& v) { r.lon = optNum(v); }},
    {"REMPER", N, false, [](const PlotRecord& r) { return of(r.remper); }, [](PlotRecord& r, const Value& v) { r.remper = optNum(v); }},
    {"PLOT_STATUS_CD", N, false, [](const PlotRecord& r) { return of(r.plotStatus); }, [](PlotRecord& r, const Value& v) { r.plotStatus = optInt(v); }},
    {"DESIGNCD", N, false, [](const PlotRecord& r) { return of(r.designcd); }, [](PlotRecord& r, const Value& v) { r.designcd = optInt(v); }},
    {"INVASIVE_SAMPLING_STATUS_CD", N, false, [](const PlotRecord& r) { return of(r.invasiveSampling); }, [](PlotRecord& r, const Value& v) { r.invasiveSampling = optInt(v); }},
};

const FieldDef<ConditionRecord> kCondFields[] = {
    {"CN", T, true, [](const ConditionRecord& r) { return of(r.cn); }, [](ConditionRecord& r, const Value& v) { r.cn = text(v); }},
    {"PLT_CN", T, true, [](const ConditionRecord& r) { return of(r.pltCn); }, [](ConditionRecord& r, const Value& v) { r.pltCn = text(v); }},
    {"CONDID", N, true, [](const ConditionRecord& r) { return of(r.condid); }, [](ConditionRecord& r, const Value& v) { r.condid = reqInt(v); }},
    {"COND_STATUS_CD", N, true, [](const ConditionRecord& r) { return of(r.condStatus); }, [](ConditionRecord& r, const Value& v) { r.condStatus = reqInt(v); }},
    {"CONDPROP_UNADJ", N, false, [](const ConditionRecord& r) { return of(r.condpropUnadj); }, [](ConditionRecord& r, const Value& v) { r.condpropUnadj = optNum(v); }},
    {"FORTYPCD", N, false, [](const ConditionRecord& r) { return of(r.fortypcd); }, [](ConditionRecord& r, const Value& v) { r.fortypcd = optInt(v); }},
    {"OWNCD", N, false, [](const ConditionRecord& r) { return of(r.owncd); }, [](ConditionRecord& r, const Value& v) { r.owncd = optInt(v); }},
    {"STDAGE", N, false, [](const ConditionRecord& r) { return of(r.stdage); }, [](ConditionRecord& r, const Value& v) { r.stdage = optNum(v); }},
};

const FieldDef<TreeRecord> kTreeFields[] = {
    {"CN", T, true, [](const TreeRecord& r) { return of(r.cn); }, [](TreeRecord& r, const Value& v) { r.cn = text(v); }},
    {"PLT_CN", T, true, [](const TreeRecord& r) { return of(r.pltCn); }, [](TreeRecord& r, const Value& v) { r.pltCn = text(v); }},
    {"CONDID", N, true, [](const TreeRecord& r) { return of(r.condid); }, [](TreeRecord& r, const Value& v) { r.condid = reqInt(v); }},
    {"STATUSCD", N, true, [](const TreeRecord& r) { return of(r.statuscd); }, [](TreeRecord& r, const Value& v) { r.statuscd = reqInt(v); }},
    {"SPCD", N, true, [](const TreeRecord& r) { return of(r.spcd); }, [](TreeRecord& r, const Value& v) { r.spcd = reqInt(v); }},
    {"DIA", N, false, [](const TreeRecord& r) { return of(r.dia); }, [](TreeRecord& r, const Value& v) { r.dia = optNum(v); }},
    {"TPA_UNADJ", N, false, [](const TreeRecord& r) { return of(r.tpaUnadj); }, [](TreeRecord& r, const Value& v) { r.tpaUnadj = optNum(v); }},
    {"TREE_BASIS", T, false, [](const TreeRecord& r) { return ofEnum(r.basis); }, [](TreeRecord& r, const Value& v) { r.basis = optEnum<TreeBasis>(v, parseTreeBasis); }},
    {"VOLCFNET", N, false, [](const TreeRecord& r) { return of(r.volcfnet); }, [](TreeRecord& r, const Value& v) { r.volcfnet = optNum(v); }},
    {"VOLCSNET", N, false, [](const TreeRecord& r) { return of(r.volcsnet); }, [](TreeRecord& r, const Value& v) { r.volcsnet = optNum(v); }},
    {"DRYBIO_AG", N, false, [](const TreeRecord& r) { return of(r.drybioAg); }, [](TreeRecord& r, const Value& v) { r.drybioAg = optNum(v); }},
    {"DRYBIO_BG", N, false, [](const TreeRecord& r) { return of(r.drybioBg); }, [](TreeRecord& r, const Value& v) { r.drybioBg = optNum(v); }},
    {"CARBON_AG", N, false, [](const TreeRecord& r) { return of(r.carbonAg); }, [](TreeRecord& r, const Value& v) { r.carbonAg = optNum(v); }},
    {"CARBON_BG", N, false, [](const TreeRecord& r) { return of(r.carbonBg); }, [](TreeRecord& r, const Value& v) { r.carbonBg = optNum(v); }},
    {"PREVDIA", N, false, [](const TreeRecord& r) { return of(r.prevdia); }, [](TreeRecord& r, const Value& v) { r.prevdia = optNum(v); }},
    {"PREV_VOLCFNET", N, false, [](const TreeRecord& r) { return of(r.prevVolcfnet); }, [](TreeRecord& r, const Value& v) { r.prevVolcfnet = optNum(v); }},
    {"PREV_DRYBIO_AG", N, false, [](const TreeRecord& r) { return of(r.prevDrybioAg); }, [](TreeRecord& r, const Value& v) { r.prevDrybioAg = optNum(v); }},
    {"COMPONENT", T, false, [](const TreeRecord& r) { return ofEnum(r.component); }, [](TreeRecord& r, const Value& v) { r.component = optEnum<Component>(v, parseComponent); }},
    {"TPAMORT_UNADJ", N, false, [](const TreeRecord& r) { return of(r.tpamortUnadj); }, [](TreeRecord& r, const Value& v) { r.tpamortUnadj = optNum(v); }},
    {"TPAREMV_UNADJ", N, false, [](const TreeRecord& r) { return of(r.tparemvUnadj); }, [](TreeRecord& r, const Value& v) { r.tparemvUnadj = optNum(v); }},
    {"TPAGROW_UNADJ", N, false, [](const TreeRecord& r) { return of(r.tpagrowUnadj); }, [](TreeRecord& r, const Value& v) { r.tpagrowUnadj = optNum(v); }},
};

const FieldDef<SeedlingRecord> kSeedlingFields[] = {
    {"PLT_CN", T, true, [](const SeedlingRecord& r) { return of(r.pltCn); }, [](SeedlingRecord& r, const Value& v) { r.pltCn = text(v); }},
    {"CONDID", N, true, [](const SeedlingRecord& r) { return of(r.condid); }, [](SeedlingRecord& r, const Value& v) { r.condid = reqInt(v); }},
    {"SPCD", N, true, [](const SeedlingRecord& r) { return of(r.spcd); }, [](SeedlingRecord& r, const Value& v) { r.spcd = reqInt(v); }},
    {"TREECOUNT", N, true, [](const SeedlingRecord& r) { return of(r.treecount); }, [](SeedlingRecord& r, const Value& v) { r.treecount = num(v); }},
    {"TPA_UNADJ", N, true, [](const SeedlingRecord& r) { return of(r.tpaUnadj); }, [](SeedlingRecord& r, const Value& v) { r.tpaUnadj = num(v); }},
};

const FieldDef<DwmConditionRecord> kDwmFields[] = {
    {"PLT_CN", T, true, [](const DwmConditionRecord& r) { return of(r.pltCn); }, [](DwmConditionRecord& r, const Value& v) { r.pltCn = text(v); }},
    {"CONDID", N, true, [](const DwmConditionRecord& r) { return of(r.condid); }, [](DwmConditionRecord& r, const Value& v) { r.condid = reqInt(v); }},
    {"FUEL_TYPE", T, true, [](const DwmConditionRecord& r) { return Value{std::string(toString(r.fuelType))}; }, [](DwmConditionRecord& r, const Value& v) { r.fuelType = reqEnum<FuelType>(v, parseFuelType); }},
    {"VOL_ACRE", N, true, [](const DwmConditionRecord& r) { return of(r.volAcre); }, [](DwmConditionRecord& r, const Value& v) { r.volAcre = num(v); }},
    {"BIO_ACRE", N, true, [](const DwmConditionRecord& r) { return of(r.bioAcre); }, [](DwmConditionRecord& r, const Value& v) { r.bioAcre = num(v); }},
    {"CARB_ACRE", N, true, [](const DwmConditionRecord& r) { return of(r.carbAcre); }, [](DwmConditionRecord& r, const Value& v) { r.carbAcre = num(v); }},
};

const FieldDef<InvasiveRecord> kInvasiveFields[] = {
    {"PLT_CN", T, true, [](const InvasiveRecord& r) { return of(r.pltCn); }, [](InvasiveRecord& r, const Value& v) { r.pltCn = text(v); }},
    {"CONDID", N, true, [](const InvasiveRecord& r) { return of(r.condid); }, [](InvasiveRecord& r, const Value& v) { r.condid = reqInt(v); }},
    {"VEG_SPCD", T, true, [](const InvasiveRecord& r) { return of(r.spcd); }, [](InvasiveRecord& r, const Value& v) { r.spcd = text(v); }},
    {"COVER_PCT", N, true, [](const InvasiveRecord& r) { return of(r.coverPct); }, [](InvasiveRecord& r, const Value& v) { r.coverPct = num(v); }},
};

const FieldDef<Evaluation> kEvalFields[] = {
    {"EVALID", N, true, [](const Evaluation& r) { return of(r.evalid); }, [](Evaluation& r, const Value& v) { r.evalid = reqInt(v); }},
    {"STATECD", N, false, [](const Evaluation& r) { return of(r.statecd); }, [](Evaluation& r, const Value& v) { r.statecd = optInt(v).value_or(0); }},
    {"EVAL_TYP", T, false, [](const Evaluation& r) { return Value{std::string(toString(r.type))}; }, [](Evaluation& r, const Value& v) {
       if (!isNull(v)) r.type = reqEnum<EvalType>(v, parseEvalType);
     }},
    {"REPORT_YEAR", N, false, [](const Evaluation& r) { return of(r.reportYear); }, [](Evaluation& r, const Value& v) { r.reportYear = optInt(v).value_or(0); }},
    {"START_INVYR", N, false, [](const Evaluation& r) { return of(r.startInvyr); }, [](Evaluation& r, const Value& v) { r.startInvyr = optInt(v); }},
    {"END_INVYR", N, false, [](const Evaluation& r) { return of(r.endInvyr); }, [](Evaluation& r, const Value& v) { r.endInvyr = optInt(v); }},
};

const FieldDef<EstimationUnit> kUnitFields[] = {
    {"CN", T, true, [](const EstimationUnit& r) { return of(r.cn); }, [](EstimationUnit& r, const Value& v) { r.cn = text(v); }},
    {"EVALID", N, true, [](const EstimationUnit& r) { return of(r.evalid); }, [](EstimationUnit& r, const Value& v) { r.evalid = reqInt(v); }},
    {"AREA_USED", N, true, [](const EstimationUnit& r) { return of(r.areaUsed); }, [](EstimationUnit& r, const Value& v) { r.areaUsed = num(v); }},
};

const FieldDef<Stratum> kStratumFields[] = {
    {"CN", T, true, [](const Stratum& r) { return of(r.cn); }, [](Stratum& r, const Value& v) { r.cn = text(v); }},
    {"ESTN_UNIT_CN", T, true, [](const Stratum& r) { return of(r.estnUnitCn); }, [](Stratum& r, const Value& v) { r.estnUnitCn = text(v); }},
    // Either STRATUM_WGT or P1POINTCNT must be present; the loader derives the weight.
    {"STRATUM_WGT", N, false, [](const Stratum& r) { return of(r.weight); }, [](Stratum& r, const Value& v) { r.weight = optNum(v).value_or(-1.0); }},
    {"ADJ_FACTOR_SUBP", N, true, [](const Stratum& r) { return of(r.adjSubp); }, [](Stratum& r, const Value& v) { r.adjSubp = optNum(v).value_or(0.0); }},
    {"ADJ_FACTOR_MICR", N, true, [](const Stratum& r) { return of(r.adjMicr); }, [](Stratum& r, const Value& v) { r.adjMicr = optNum(v).value_or(0.0); }},
    {"ADJ_FACTOR_MACR", N, true, [](const Stratum& r) { return of(r.adjMacr); }, [](Stratum& r, const Value& v) { r.adjMacr = optNum(v).value_or(0.0); }},
};

const FieldDef<StratumAssignment> kAssignFields[] = {
    {"PLT_CN", T, true, [](const StratumAssignment& r) { return of(r.pltCn); }, [](StratumAssignment& r, const Value& v) { r.pltCn = text(v); }},
    {"STRATUM_CN", T, true, [](const StratumAssignment& r) { return of(r.stratumCn); }, [](StratumAssignment& r, const Value& v) { r.stratumCn = text(v); }},
    {"INVYR", N, true, [](const StratumAssignment& r) { return of(r.panelYear); }, [](StratumAssignment& r, const Value& v) { r.panelYear = reqInt(v); }},
};

const FieldDef<Species> kSpeciesFields[] = {
    {"SPCD", N, true, [](const Species& r) { return of(r.spcd); }, [](Species& r, const Value& v) { r.spcd = reqInt(v); }},
    {"COMMON_NAME", T, false, [](const Species& r) { return of(r.commonName); }, [](Species& r, const Value& v) { r.commonName = optText(v).value_or(""); }},
    {"GENUS", T, false, [](const Species& r) { return of(r.genus); }, [](Species& r, const Value& v) { r.genus = optText(v).value_or(""); }},
    {"SCIENTIFIC_NAME", T, false, [](const Species& r) { return of(r.scientificName); }, [](Species& r, const Value& v) { r.scientificName = optText(v).value_or(""); }},
};

}  // namespace

template <> std::span<const FieldDef<PlotRecord>> fieldsOf<PlotRecord>() { return kPlotFields; }
template <> std::span<const FieldDef<ConditionRecord>> fieldsOf<ConditionRecord>() { return kCondFields; }
template <> std::span<const FieldDef<TreeRecord>> fieldsOf<TreeRecord>() { return kTreeFields; }
template <> std::span<const FieldDef<SeedlingRecord>> fieldsOf<SeedlingRecord>() { return kSeedlingFields; }
template <> std::span<const FieldDef<DwmConditionRecord>> fieldsOf<DwmConditionRecord>() { return kDwmFields; }
template <> std::span<const FieldDef<InvasiveRecord>> fieldsOf<InvasiveRecord>() { return kInvasiveFields; }
template <> std::span<const FieldDef<Evaluation>> fieldsOf<Evaluation>() { return kEvalFields; }
template <> std::span<const FieldDef<EstimationUnit>> fieldsOf<EstimationUnit>() { return kUnitFields; }
template <> std::span<const FieldDef<Stratum>> fieldsOf<Stratum>() { return kStratumFields; }
template <> std::span<const FieldDef<StratumAssignment>> fieldsOf<StratumAssignment>() { return kAssignFields; }
template <> std::span<const FieldDef<Species>> fieldsOf<Species>() { return kSpeciesFields; }

template <> std::string_view tableNameOf<PlotRecord>() { return "PLOT"; }
template <> std::string_view tableNameOf<ConditionRecord>() { return "COND"; }
template <> std::string_view tableNameOf<TreeRecord>() { return "TREE"; }
template <> std::string_view tableNameOf<SeedlingRecord>() { return "SEEDLING"; }
template <> std::string_view tableNameOf<DwmConditionRecord>() { return "COND_DWM_CALC"; }
template <> std::string_view tableNameOf<InvasiveRecord>() { return "INVASIVE_SUBPLOT_SPP"; }
template <> std::string_view tableNameOf<Evaluation>() { return "POP_EVAL"; }
template <> std::string_view tableNameOf<EstimationUnit>() { return "POP_ESTN_UNIT"; }
template <> std::string_view tableNameOf<Stratum>() { return "POP_STRATUM"; }
template <> std::string_view tableNameOf<StratumAssignment>() { return "POP_PLOT_STRATUM_ASSGN"; }
template <> std::string_view tableNameOf<Species>() { return "REF_SPECIES"; }

}  // namespace timberline
