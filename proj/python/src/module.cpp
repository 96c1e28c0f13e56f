#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "timberline/attributes.hpp"
#include "timberline/cli.hpp"
#include "timberline/database.hpp"
#include "timberline/error.hpp"
#include "timberline/evaluation.hpp"
#include "timberline/panels.hpp"
#include "timberline/spatial.hpp"

namespace py = pybind11;
using namespace timberline;

namespace {

py::object toPython(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return py::float_(*d);
  if (const auto* s = std::get_if<std::string>(&v)) return py::str(*s);
  return py::none();
}

/// Column-oriented view of an EstimateTable: {"columns", "data", "keys", "diagnostics"}.
py::dict tableToDict(const EstimateTable& t) {
  py::list columns;
  py::dict data;
  for (std::size_t i = 0; i < t.keyColumns.size(); ++i) {
    py::list col;
    for (const auto& r : t.rows) col.append(toPython(r.keys[i]));
    columns.append(t.keyColumns[i]);
    data[py::str(t.keyColumns[i])] = col;
  }
  for (std::size_t i = 0; i < t.valueColumns.size(); ++i) {
    py::list col;
    for (const auto& r : t.rows) col.append(r.values[i] ? py::object(py::float_(*r.values[i])) : py::none());
    columns.append(t.valueColumns[i]);
    data[py::str(t.valueColumns[i])] = col;
  }
  py::dict out;
  out["columns"] = columns;
  out["keys"] = t.keyColumns;
  out["data"] = data;
  out["diagnostics"] = t.diagnostics;
  return out;
}

std::shared_ptr<const PolygonSet> polygonsFrom(const std::optional<std::string>& geojson) {
  if (!geojson) return nullptr;
  return std::make_shared<PolygonSet>(PolygonSet::fromGeoJson(*geojson));
}

EstimatorRequest makeRequest(const std::string& family, const std::vector<std::string>& grpBy, bool byPlot,
                             bool bySpecies, bool bySizeClass, const std::optional<std::string>& treeDomain,
                             const std::optional<std::string>& areaDomain, const std::string& method,
                             const std::vector<double>& lambdas, bool tidy, unsigned workers, bool totals,
                             bool variance, std::optional<int> year, const std::vector<int>& evalids,
                             const std::optional<std::string>& polys, const std::string& basis) {
  EstimatorRequest r;
  r.family = parseFamily(family);
  r.grpBy = grpBy;
  r.byPlot = byPlot;
  r.bySpecies = bySpecies;
  r.bySizeClass = bySizeClass;
  r.treeDomain = treeDomain;
  r.areaDomain = areaDomain;
  r.method = parseMethod(method);
  r.lambdas = lambdas;
  r.tidy = tidy;
  r.workers = workers;
  r.totals = totals;
  r.variance = variance;
  r.year = year;
  r.evalids = evalids;
  r.polys = polygonsFrom(polys);
  if (basis == "TPA" || basis == "tpa") r.diversityBasis = DiversityBasis::TreesPerAcre;
  else if (basis != "BA" && basis != "ba") throw UsageError("basis must be BA or TPA");
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Design-based forest inventory estimation";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<NetworkError>(m, "NetworkError", PyExc_OSError);

  py::class_<ForestDatabase>(m, "Database")
      .def("plot_count", [](const ForestDatabase& db) { return db.tables().plots.size(); })
      .def("tree_count", [](const ForestDatabase& db) { return db.tables().trees.size(); })
      .def("evalids", [](const ForestDatabase& db, std::optional<int> year) { return findEvaluations(db, year); },
           py::arg("year") = std::nullopt)
      .def("violations",
           [](const ForestDatabase& db) {
             std::vector<std::tuple<std::string, std::string, std::string>> out;
             for (const auto& v : validateIntegrity(db)) out.emplace_back(v.table, v.key, v.rule);
             return out;
           })
      .def(
          "clip",
          [](const ForestDatabase& db, bool mostRecent, bool matchEval, const std::vector<int>& evalids,
             std::optional<int> year, const std::optional<std::string>& mask) {
            ClipOptions c;
            c.mostRecent = mostRecent;
            c.matchEval = matchEval;
            c.evalids = evalids;
            c.year = year;
            c.mask = polygonsFrom(mask);
            py::gil_scoped_release release;
            return clip(db, c);
          },
          py::arg("most_recent") = false, py::arg("match_eval") = false,
          py::arg("evalids") = std::vector<int>{}, py::arg("year") = std::nullopt, py::arg("mask") = std::nullopt)
      .def(
          "write",
          [](const ForestDatabase& db, const std::filesystem::path& dir) { writeDatabase(db, dir); },
          py::arg("directory"));

  m.def(
      "load_database",
      [](const std::filesystem::path& dir, const std::vector<std::string>& states) {
        py::gil_scoped_release release;
        return loadDatabase(dir, states);
      },
      py::arg("directory"), py::arg("states") = std::vector<std::string>{});

  m.def(
      "estimate",
      [](const ForestDatabase& db, const std::string& family, const std::vector<std::string>& grpBy, bool byPlot,
         bool bySpecies, bool bySizeClass, const std::optional<std::string>& treeDomain,
         const std::optional<std::string>& areaDomain, const std::string& method, const std::vector<double>& lambdas,
         bool tidy, unsigned workers, bool totals, bool variance, std::optional<int> year,
         const std::vector<int>& evalids, const std::optional<std::string>& polys, const std::string& basis) {
        const auto req = makeRequest(family, grpBy, byPlot, bySpecies, bySizeClass, treeDomain, areaDomain, method,
                                     lambdas, tidy, workers, totals, variance, year, evalids, polys, basis);
        EstimateTable t;
        {
          py::gil_scoped_release release;
          t = estimate(db, req);
        }
        return tableToDict(t);
      },
      py::arg("db"), py::arg("family"), py::arg("grp_by") = std::vector<std::string>{}, py::arg("by_plot") = false,
      py::arg("by_species") = false, py::arg("by_size_class") = false, py::arg("tree_domain") = std::nullopt,
      py::arg("area_domain") = std::nullopt, py::arg("method") = "TI", py::arg("lambdas") = std::vector<double>{},
      py::arg("tidy") = true, py::arg("workers") = 1u, py::arg("totals") = false, py::arg("variance") = false,
      py::arg("year") = std::nullopt, py::arg("evalids") = std::vector<int>{}, py::arg("polys") = std::nullopt,
      py::arg("basis") = "BA");

  m.def(
      "panel_weights",
      [](const std::string& method, int panels, std::optional<double> lambda) {
        return panelWeights(parseMethod(method), panels, lambda);
      },
      py::arg("method"), py::arg("panels"), py::arg("lam") = std::nullopt);

  m.def("make_classes", &makeClasses, py::arg("value"), py::arg("width"), py::arg("lower"));

  m.def("families", [] {
    std::vector<std::string> out;
    for (int i = 0; i <= static_cast<int>(Family::StandStruct); ++i)
      out.emplace_back(toString(static_cast<Family>(i)));
    return out;
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
