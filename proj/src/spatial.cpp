#include "timberline/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "timberline/error.hpp"
#include "timberline/parallel.hpp"

namespace timberline {

using json = nlohmann::ordered_json;

namespace {

bool onSegment(LonLat p, LonLat a, LonLat b) {
  const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  const double scale = std::max({std::abs(b.lon - a.lon), std::abs(b.lat - a.lat), 1e-300});
  if (std::abs(cross) > 1e-12 * scale) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) && p.lat >= std::min(a.lat, b.lat) &&
         p.lat <= std::max(a.lat, b.lat);
}

bool polygonContains(const Polygon& poly, LonLat p) {
  bool inside = false;
  for (const auto& ring : poly) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const LonLat a = ring[i], b = ring[j];
      if (onSegment(p, a, b)) return true;
      if ((a.lat > p.lat) != (b.lat > p.lat) &&
          p.lon < (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon)
        inside = !inside;
    }
  }
  return inside;
}

std::string idText(const Value& id) { return formatValue(id); }

[[noreturn]] void bad(const Value& id, const std::string& why) {
  throw DataError("invalid geometry in feature " + idText(id) + ": " + why);
}

LonLat position(const json& j, const Value& id) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number()) bad(id, "position must be [lon, lat]");
  LonLat p{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || std::abs(p.lon) > 180 || std::abs(p.lat) > 90)
    bad(id, "coordinate outside WGS84 lon/lat range");
  return p;
}

Polygon polygon(const json& rings, const Value& id) {
  if (!rings.is_array() || rings.empty()) bad(id, "polygon needs at least one ring");
  Polygon out;
  for (const auto& r : rings) {
    if (!r.is_array() || r.size() < 4) bad(id, "ring needs at least four positions");
    Ring ring;
    for (const auto& pos : r) ring.push_back(position(pos, id));
    if (ring.front().lon != ring.back().lon || ring.front().lat != ring.back().lat) bad(id, "ring is not closed");
    ring.pop_back();
    out.push_back(std::move(ring));
  }
  return out;
}

std::vector<Polygon> geometry(const json& g, const Value& id) {
  if (!g.is_object() || !g.contains("type")) bad(id, "missing geometry");
  const std::string type = g["type"].get<std::string>();
  if (!g.contains("coordinates")) bad(id, "missing coordinates");
  const json& c = g["coordinates"];
  if (type == "Polygon") return {polygon(c, id)};
  if (type == "MultiPolygon") {
    if (!c.is_array() || c.empty()) bad(id, "empty MultiPolygon");
    std::vector<Polygon> out;
    for (const auto& p : c) out.push_back(polygon(p, id));
    return out;
  }
  bad(id, "unsupported geometry type " + type);
}

void checkCrs(const json& doc) {
  if (!doc.contains("crs") || doc["crs"].is_null()) return;
  const std::string text = doc["crs"].dump();
  for (const char* ok : {"CRS84", "crs84", "4326", "WGS84", "WGS 84"})
    if (text.find(ok) != std::string::npos) return;
  throw DataError("polygons must be WGS84 lon/lat; reproject before use (crs " + text + ")");
}

void finish(Feature& f) {
  f.minLon = f.minLat = 1e300;
  f.maxLon = f.maxLat = -1e300;
  for (const auto& p : f.polygons)
    for (const auto& r : p)
      for (const auto& q : r) {
        f.minLon = std::min(f.minLon, q.lon);
        f.maxLon = std::max(f.maxLon, q.lon);
        f.minLat = std::min(f.minLat, q.lat);
        f.maxLat = std::max(f.maxLat, q.lat);
      }
}

}  // namespace

bool Feature::contains(LonLat p) const {
  if (p.lon < minLon || p.lon > maxLon || p.lat < minLat || p.lat > maxLat) return false;
  return std::any_of(polygons.begin(), polygons.end(), [&](const Polygon& poly) { return polygonContains(poly, p); });
}

PolygonSet PolygonSet::fromGeoJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("GeoJSON is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("type")) throw DataError("GeoJSON object without a type");
  checkCrs(doc);

  std::vector<json> features;
  const std::string type = doc["type"].get<std::string>();
  if (type == "FeatureCollection") {
    if (!doc.contains("features") || !doc["features"].is_array()) throw DataError("FeatureCollection without features");
    for (const auto& f : doc["features"]) features.push_back(f);
  } else if (type == "Feature") {
    features.push_back(doc);
  } else {
    features.push_back(json{{"type", "Feature"}, {"geometry", doc}, {"properties", json::object()}});
  }

  PolygonSet set;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    Feature out;
    out.id = static_cast<double>(i + 1);
    if (f.contains("id")) {
      if (f["id"].is_number()) out.id = f["id"].get<double>();
      else if (f["id"].is_string()) out.id = f["id"].get<std::string>();
    }
    if (f.contains("properties") && f["properties"].is_object()) out.properties = f["properties"];
    if (!f.contains("geometry")) bad(out.id, "missing geometry");
    out.polygons = geometry(f["geometry"], out.id);
    finish(out);
    for (const auto& prev : set.features_)
      if (compareValues(prev.id, out.id) == 0) throw DataError("duplicate feature id " + idText(out.id));
    set.features_.push_back(std::move(out));
  }
  return set;
}

PolygonSet PolygonSet::fromFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fromGeoJson(ss.str());
}

std::optional<std::size_t> PolygonSet::locate(LonLat p) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].contains(p)) return i;
  return std::nullopt;
}

std::vector<std::optional<std::size_t>> assignPlots(const std::vector<std::optional<LonLat>>& points,
                                                    const PolygonSet& polys, unsigned workers) {
  std::vector<std::optional<std::size_t>> out(points.size());
  parallelFor(points.size(), workers, [&](std::size_t i) {
    if (points[i]) out[i] = polys.locate(*points[i]);
  });
  return out;
}

json emitSpatial(const EstimateTable& estimates, const PolygonSet& polys) {
  const auto polyCol = estimates.keyIndex("POLY_ID");

  // Distinct combinations of the non-polygon keys, in table order.
  std::vector<std::vector<Value>> combos;
  std::map<std::string, std::size_t> comboIndex;
  std::map<std::pair<std::string, std::size_t>, const EstimateTable::Row*> lookup;
  auto restOf = [&](const EstimateTable::Row& r) {
    std::vector<Value> rest;
    for (std::size_t i = 0; i < r.keys.size(); ++i)
      if (!polyCol || i != *polyCol) rest.push_back(r.keys[i]);
    return rest;
  };
  auto signature = [](const std::vector<Value>& v) {
    std::string s;
    for (const auto& x : v) s += std::to_string(x.index()) + ":" + formatValue(x) + "\x1f";
    return s;
  };
  for (const auto& r : estimates.rows) {
    auto rest = restOf(r);
    auto [it, fresh] = comboIndex.emplace(signature(rest), combos.size());
    if (fresh) combos.push_back(rest);
    const std::string pid = polyCol ? std::to_string(r.keys[*polyCol].index()) + formatValue(r.keys[*polyCol]) : "";
    lookup[{pid, it->second}] = &r;
  }
  if (combos.empty()) {
    std::vector<Value> nulls;
    for (std::size_t i = 0; i < estimates.keyColumns.size(); ++i)
      if (!polyCol || i != *polyCol) nulls.emplace_back();
    combos.push_back(std::move(nulls));
  }

  json out = json::object();
  out["type"] = "FeatureCollection";
  out["features"] = json::array();
  for (const auto& f : polys.features()) {
    const std::string pid = std::to_string(f.id.index()) + formatValue(f.id);
    for (std::size_t c = 0; c < combos.size(); ++c) {
      json props = f.properties;
      auto name = [&](const std::string& col) { return props.contains(col) ? col + "_est" : col; };
      auto it = lookup.find({pid, c});
      const EstimateTable::Row* row = it == lookup.end() ? nullptr : it->second;
      std::size_t k = 0;
      for (std::size_t i = 0; i < estimates.keyColumns.size(); ++i) {
        if (polyCol && i == *polyCol) continue;
        const Value& v = combos[c][k++];
        const std::string col = name(estimates.keyColumns[i]);
        if (const auto* d = std::get_if<double>(&v)) props[col] = *d;
        else if (const auto* s = std::get_if<std::string>(&v)) props[col] = *s;
        else props[col] = nullptr;
      }
      for (std::size_t i = 0; i < estimates.valueColumns.size(); ++i) {
        const std::string col = name(estimates.valueColumns[i]);
        if (row && row->values[i]) props[col] = *row->values[i];
        else props[col] = nullptr;
      }
      json feature = json::object();
      feature["type"] = "Feature";
      if (const auto* d = std::get_if<double>(&f.id)) feature["id"] = *d;
      else feature["id"] = std::get<std::string>(f.id);
      feature["properties"] = std::move(props);
      json geom = json::object();
      auto ringJson = [](const Ring& r) {
        json a = json::array();
        for (const auto& p : r) a.push_back(json::array({p.lon, p.lat}));
        a.push_back(json::array({r.front().lon, r.front().lat}));
        return a;
      };
      auto polyJson = [&](const Polygon& p) {
        json a = json::array();
        for (const auto& r : p) a.push_back(ringJson(r));
        return a;
      };
      if (f.polygons.size() == 1) {
        geom["type"] = "Polygon";
        geom["coordinates"] = polyJson(f.polygons.front());
      } else {
        geom["type"] = "MultiPolygon";
        geom["coordinates"] = json::array();
        for (const auto& p : f.polygons) geom["coordinates"].push_back(polyJson(p));
      }
      feature["geometry"] = std::move(geom);
      out["features"].push_back(std::move(feature));
    }
  }
  return out;
}

}  // namespace timberline
