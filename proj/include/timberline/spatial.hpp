#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "timberline/table.hpp"
#include "timberline/value.hpp"

namespace timberline {

struct LonLat {
  double lon = 0;
  double lat = 0;
};

/// Rings of one polygon; the first is the shell, the rest are holes.
/// Containment is even-odd over all rings.
using Ring = std::vector<LonLat>;
using Polygon = std::vector<Ring>;

struct Feature {
  Value id;  // GeoJSON id, or the 1-based position when absent
  nlohmann::ordered_json properties = nlohmann::ordered_json::object();
  std::vector<Polygon> polygons;
  double minLon = 0, minLat = 0, maxLon = 0, maxLat = 0;

  /// Inside or on the boundary.
  bool contains(LonLat p) const;
};

class PolygonSet {
 public:
  /// Accepts a FeatureCollection, a Feature, or a bare Polygon/MultiPolygon.
  /// Throws DataError on malformed geometry (naming the feature), duplicate
  /// ids, or a CRS other than WGS84 lon/lat.
  static PolygonSet fromGeoJson(std::string_view text);
  static PolygonSet fromFile(const std::filesystem::path& path);

  const std::vector<Feature>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }

  /// Index of the first feature in file order containing the point.
  std::optional<std::size_t> locate(LonLat p) const;

 private:
  std::vector<Feature> features_;
};

/// Feature index per plot (aligned with `points`); nullopt when the plot has
/// no coordinates or lies outside every feature.
std::vector<std::optional<std::size_t>> assignPlots(const std::vector<std::optional<LonLat>>& points,
                                                    const PolygonSet& polys, unsigned workers = 1);

/// One output feature per input feature and per combination of the other
/// key columns (YEAR, lambda, groups) present in `estimates`. Rows are matched
/// on the POLY_ID key column. Estimate columns whose names collide with an
/// existing property get the suffix "_est".
nlohmann::ordered_json emitSpatial(const EstimateTable& estimates, const PolygonSet& polys);

}  // namespace timberline
