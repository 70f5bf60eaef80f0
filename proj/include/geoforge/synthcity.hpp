#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "geoforge/geometry.hpp"
#include "geoforge/tilegrid.hpp"

namespace geoforge {

enum class CityStyle { Grid, Organic, Mixed };

// Procedural city: a street grid (optionally bent into curves) partitions the
// region into blocks, every block gets a landuse zone, and buildings are
// placed inside blocks with a margin wide enough that rasterized buildings
// never touch rasterized roads (margins hold for tile sizes >= 48 px).
struct CitySpec {
    uint64_t seed = 0;
    CityStyle style = CityStyle::Grid;
    std::string name = "gridtown";
    double block_min_m = 90.0;
    double block_max_m = 170.0;
    double building_density = 1.0;  // global multiplier in [0,1]
    double building_inset_m = 12.0;
    // per-zone building density; zones absent here get no buildings
    std::map<std::string, double> zone_density = {
        {"residential", 0.65}, {"commercial", 0.45}, {"industrial", 0.35}, {"retail", 0.45}};
    // zone category weights for block assignment
    std::map<std::string, double> zone_weights = {
        {"residential", 0.42}, {"commercial", 0.16}, {"industrial", 0.10}, {"retail", 0.08},
        {"park", 0.08},        {"forest", 0.10},     {"grass", 0.04},      {"water", 0.02}};

    static CitySpec grid_city(uint64_t seed);
    static CitySpec organic_city(uint64_t seed);
};

FeatureSet generate_city(const CitySpec& spec, const BBox& region);

}  // namespace geoforge
