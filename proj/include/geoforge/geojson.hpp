#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoforge/geometry.hpp"

namespace geoforge {

// highway tag value -> importance class 1..3 (1 drawn widest/brightest)
struct RoadClassMap {
    std::map<std::string, int> classes;

    int class_for(const std::string& highway_value) const;
    static RoadClassMap defaults();
};

// Parses a WGS84 GeoJSON FeatureCollection and classifies features into
// buildings / roads / landuse layers. Malformed documents throw DataError;
// malformed geometries are dropped with a warning appended to `warnings`.
FeatureSet parse_geodata(const std::string& text,
                         const RoadClassMap& road_classes = RoadClassMap::defaults(),
                         std::vector<std::string>* warnings = nullptr);

// Serializes a FeatureSet back to a GeoJSON FeatureCollection (deterministic bytes).
std::string write_geojson(const FeatureSet& fs);

}  // namespace geoforge
