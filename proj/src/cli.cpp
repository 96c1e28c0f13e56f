#include "timberline/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include "timberline/attributes.hpp"
#include "timberline/csv.hpp"
#include "timberline/error.hpp"
#include "timberline/evaluation.hpp"
#include "timberline/fetch.hpp"

namespace timberline::cli {

namespace {

struct Options {
  std::string db = ".";
  std::vector<std::string> states;
  std::optional<int> year;
  std::vector<int> evalids;
  bool mostRecent = false;
  bool matchEval = false;
  std::string mask;
  std::vector<std::string> grpBy;
  bool bySpecies = false;
  bool bySizeClass = false;
  bool byPlot = false;
  std::optional<std::string> treeDomain;
  std::optional<std::string> areaDomain;
  std::string polys;
  bool returnSpatial = false;
  std::string method = "TI";
  std::vector<double> lambdas;
  bool tidy = false;
  bool wide = false;
  int workers = 1;
  std::string format;
  std::string output;
  bool pretty = false;
  bool totals = false;
  bool variance = false;
  std::string basis = "BA";
  // evalids subcommand
  std::string type;
  // fetch subcommand
  std::string url;
};

/// Splits on commas outside parentheses and quotes, so predicates with
/// `in (a, b)` survive.
std::vector<std::string> splitTopLevel(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  char quote = 0;
  for (char c : text) {
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    } else if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    cur += c;
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void addSource(CLI::App* cmd, Options& o) {
  cmd->add_option("--db", o.db, "Directory of <STATE>_<TABLE>.csv files")->capture_default_str();
  cmd->add_option("--states", o.states, "State abbreviations to load (default: all)")->delimiter(',');
}

void addSelection(CLI::App* cmd, Options& o) {
  cmd->add_option("--year", o.year, "Report year of the evaluations to use");
  cmd->add_option("--evalid", o.evalids, "Evaluation ids (comma separated)")->delimiter(',');
  cmd->add_flag("--most-recent", o.mostRecent, "Latest report year in each state");
  cmd->add_flag("--match-eval", o.matchEval, "Only report years common to all states");
  cmd->add_option("--mask", o.mask, "GeoJSON polygons; plots outside are dropped");
}

void addEstimator(CLI::App* cmd, Options& o, Family family) {
  addSource(cmd, o);
  addSelection(cmd, o);
  const FamilyInfo info = familyInfo(family);
  cmd->add_option("--grp-by", o.grpBy, "Grouping columns or predicates, in order (comma separated or repeated)");
  cmd->add_flag("--by-species", o.bySpecies, "Group by species");
  cmd->add_flag("--by-size-class", o.bySizeClass, "Group by 2-inch diameter class");
  cmd->add_flag("--by-plot", o.byPlot, "One row per plot measurement, no sampling errors");
  const std::string treeHelp = "Record predicate replacing the default" +
                               (info.defaultTreeDomain.empty() ? std::string(" (none)")
                                                               : " (\"" + info.defaultTreeDomain + "\")");
  cmd->add_option("--tree-domain", o.treeDomain, treeHelp);
  cmd->add_option("--area-domain", o.areaDomain, "Condition predicate (forest land is always required)");
  cmd->add_option("--polys", o.polys, "GeoJSON polygons to group plots by");
  cmd->add_flag("--return-spatial", o.returnSpatial, "Emit polygons with estimates as GeoJSON");
  cmd->add_option("--method", o.method, "TI, ANNUAL, SMA, LMA, or EMA")->capture_default_str();
  cmd->add_option("--lambda", o.lambdas, "EMA decay values in (0, 1), comma separated (default 0.5)")->delimiter(',');
  cmd->add_flag("--tidy", o.tidy, "Long layout (default)");
  cmd->add_flag("--wide", o.wide, "Wide layout for dwm and standstruct");
  cmd->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
  cmd->add_option("--format", o.format, "csv, json, or geojson (default csv)");
  cmd->add_option("--output", o.output, "Output file (default stdout)");
  cmd->add_flag("--pretty", o.pretty, "Two decimals for estimates");
  cmd->add_flag("--totals", o.totals, "Add population totals");
  cmd->add_flag("--variance", o.variance, "Add variance columns");
  if (family == Family::Diversity)
    cmd->add_option("--basis", o.basis, "Abundance basis: BA or TPA")->capture_default_str();
  cmd->footer("Evaluation type: " + info.evaluationType +
              ". Default tree domain: " + (info.defaultTreeDomain.empty() ? "none" : info.defaultTreeDomain) + ".");
}

std::shared_ptr<const PolygonSet> loadPolygons(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const PolygonSet>(PolygonSet::fromFile(path));
}

/// Conflicts between flags, reported together.
std::vector<std::string> conflicts(const Options& o, bool estimator) {
  std::vector<std::string> c;
  const int selectors = int(o.mostRecent) + int(!o.evalids.empty()) + int(o.year.has_value());
  if (selectors > 1) c.push_back("use at most one of --most-recent, --evalid, --year");
  if (!estimator) return c;
  std::string format = lower(o.format);
  if (!format.empty() && format != "csv" && format != "json" && format != "geojson")
    c.push_back("--format must be csv, json, or geojson");
  if (format == "geojson" || o.returnSpatial) {
    if (o.polys.empty()) c.push_back("GeoJSON output requires --polys");
    if (!o.returnSpatial) c.push_back("--format geojson requires --return-spatial");
  }
  if (o.returnSpatial && !format.empty() && format != "geojson")
    c.push_back("--return-spatial writes GeoJSON; drop --format " + o.format);
  if (o.returnSpatial && o.byPlot) c.push_back("--return-spatial cannot be combined with --by-plot");
  if (o.tidy && o.wide) c.push_back("use only one of --tidy and --wide");
  if (o.workers < 1) c.push_back("--workers must be at least 1");
  if (o.byPlot && (o.totals || o.variance)) c.push_back("--by-plot has no totals or variances");
  try {
    const Method m = parseMethod(o.method);
    if (!o.lambdas.empty() && m != Method::EMA) c.push_back("--lambda applies only to --method EMA");
  } catch (const UsageError& e) {
    c.push_back(e.what());
  }
  if (const std::string b = lower(o.basis); b != "ba" && b != "tpa") c.push_back("--basis must be BA or TPA");
  return c;
}

ForestDatabase loadSelected(const Options& o, bool applySelection) {
  ForestDatabase db = loadDatabase(o.db, o.states);
  if (!applySelection) return db;
  ClipOptions clipOptions;
  clipOptions.mostRecent = o.mostRecent;
  clipOptions.matchEval = o.matchEval;
  clipOptions.mask = loadPolygons(o.mask);
  if (clipOptions.mostRecent || clipOptions.matchEval || clipOptions.mask) return clip(db, clipOptions);
  return db;
}

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot write " + path);
    }
    out_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& stream() { return *out_; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw DataError("write failed");
    }
  }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

int runEstimator(Family family, const Options& o, std::ostream& out, std::ostream& err) {
  EstimatorRequest req;
  req.family = family;
  for (const auto& g : o.grpBy)
    for (auto& part : splitTopLevel(g)) req.grpBy.push_back(std::move(part));
  req.polys = loadPolygons(o.polys);
  req.byPlot = o.byPlot;
  req.bySpecies = o.bySpecies;
  req.bySizeClass = o.bySizeClass;
  req.treeDomain = o.treeDomain;
  req.areaDomain = o.areaDomain;
  req.method = parseMethod(o.method);
  req.lambdas = o.lambdas;
  req.tidy = !o.wide;
  req.workers = static_cast<unsigned>(o.workers);
  req.totals = o.totals;
  req.variance = o.variance;
  req.year = o.year;
  req.evalids = o.evalids;
  req.diversityBasis = lower(o.basis) == "tpa" ? DiversityBasis::TreesPerAcre : DiversityBasis::BasalArea;

  const ForestDatabase db = loadSelected(o, true);
  const EstimateTable table = estimate(db, req);
  for (const auto& d : table.diagnostics) err << "note: " << d << '\n';

  Sink sink(o.output, out);
  const TableFormat format{o.pretty};
  const std::string kind = o.returnSpatial ? "geojson" : lower(o.format.empty() ? "csv" : o.format);
  if (kind == "geojson") sink.stream() << emitSpatial(table, *req.polys).dump(2) << '\n';
  else if (kind == "json") writeJson(sink.stream(), table, format);
  else writeCsv(sink.stream(), table, format);
  sink.close();
  return kOk;
}

int runValidate(const Options& o, std::ostream& out) {
  const ForestDatabase db = loadDatabase(o.db, o.states);
  const auto violations = validateIntegrity(db);
  Sink sink(o.output, out);
  auto& s = sink.stream();
  s << "table,key,rule\n";
  for (const auto& v : violations) {
    csv::writeRow(s, {v.table, v.key, v.rule});
  }
  sink.close();
  return violations.empty() ? kOk : kDataError;
}

int runClip(const Options& o, std::ostream& out) {
  if (o.output.empty()) throw UsageError("clip needs --output <directory>");
  const ForestDatabase db = loadDatabase(o.db, o.states);
  ClipOptions c;
  c.mostRecent = o.mostRecent;
  c.matchEval = o.matchEval;
  c.evalids = o.evalids;
  c.year = o.year;
  c.mask = loadPolygons(o.mask);
  const ForestDatabase clipped = clip(db, c);
  std::filesystem::create_directories(o.output);
  writeDatabase(clipped, o.output);
  out << "wrote " << clipped.tables().plots.size() << " plots and " << clipped.tables().evaluations.size()
      << " evaluations to " << o.output << '\n';
  return kOk;
}

int runEvalids(const Options& o, std::ostream& out) {
  std::optional<EvalType> type;
  if (!o.type.empty()) {
    std::string upper = o.type;
    for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    type = parseEvalType(upper);
    if (!type) throw UsageError("--type must be VOL, GRM, CHNG, or DWM");
  }
  const ForestDatabase db = loadDatabase(o.db, o.states);
  for (int id : findEvaluations(db, o.year, type)) out << id << '\n';
  return kOk;
}

int runFetch(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.states.empty()) throw UsageError("fetch needs --states");
  FetchOptions f;
  f.baseUrl = resolveDatamartUrl(o.url);
  std::filesystem::create_directories(o.db);
  for (const auto& st : o.states) {
    const FetchResult r = fetchState(st, o.db, f);
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';
    for (const auto& file : r.files) out << file.string() << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Design-based forest inventory estimation", "timberline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto* fetch = app.add_subcommand("fetch", "Download state CSV files from the DataMart");
  fetch->add_option("--states", o.states, "State abbreviations (comma separated)")->delimiter(',');
  fetch->add_option("--db", o.db, "Destination directory")->capture_default_str();
  fetch->add_option("--url", o.url, "Base URL (default: TIMBERLINE_DATAMART_URL or the public DataMart)");

  auto* validate = app.add_subcommand("validate", "Check record invariants and foreign keys");
  addSource(validate, o);
  validate->add_option("--output", o.output, "Report file (default stdout)");

  auto* clipCmd = app.add_subcommand("clip", "Subset a database and write it to --output");
  addSource(clipCmd, o);
  addSelection(clipCmd, o);
  clipCmd->add_option("--output", o.output, "Destination directory");

  auto* evalids = app.add_subcommand("evalids", "List evaluation ids");
  addSource(evalids, o);
  evalids->add_option("--year", o.year, "Report year");
  evalids->add_option("--type", o.type, "VOL, GRM, CHNG, or DWM");

  std::vector<std::pair<CLI::App*, Family>> estimators;
  for (int i = 0; i <= static_cast<int>(Family::StandStruct); ++i) {
    const auto f = static_cast<Family>(i);
    auto* cmd = app.add_subcommand(std::string(toString(f)), familyInfo(f).summary);
    addEstimator(cmd, o, f);
    estimators.push_back({cmd, f});
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    for (auto& [cmd, family] : estimators) {
      if (!cmd->parsed()) continue;
      if (auto c = conflicts(o, true); !c.empty()) {
        for (const auto& m : c) err << "error: " << m << '\n';
        return kUsageError;
      }
      return runEstimator(family, o, out, err);
    }
    if (auto c = conflicts(o, false); !c.empty()) {
      for (const auto& m : c) err << "error: " << m << '\n';
      return kUsageError;
    }
    if (fetch->parsed()) return runFetch(o, out, err);
    if (validate->parsed()) return runValidate(o, out);
    if (clipCmd->parsed()) return runClip(o, out);
    if (evalids->parsed()) return runEvalids(o, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NetworkError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace timberline::cli
