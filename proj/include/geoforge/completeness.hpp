#pragma once

#include <array>
#include <string>
#include <vector>

#include "geoforge/common.hpp"
#include "geoforge/png_io.hpp"
#include "geoforge/tilegrid.hpp"
#include "geoforge/vectorize.hpp"

namespace geoforge {

enum class MapClass { Mapped = 0, PartiallyMapped = 1, Unmapped = 2 };
const char* map_class_name(MapClass c);
MapClass map_class_from_name(const std::string& name);

struct CompletenessThresholds {
    double mapped_ratio = 1.6;   // ratio <= this -> Mapped
    double partial_ratio = 5.0;  // ratio <= this -> PartiallyMapped, above -> Unmapped
    double mapped_fraction = 0.80;
    double partial_fraction = 0.25;
};

struct DegradedTile {
    TileId tile{};
    double removed_fraction = 0.0;  // requested f
    double kept_fraction = 1.0;     // polygons kept / original count (1.0 when empty)
    double kept_area_fraction = 1.0;
    Image mask;
    MapClass true_class = MapClass::Mapped;
};

// Removes exactly ceil(f*n) polygons, chosen uniformly without replacement
// under the seed (area_weighted biases the draw by polygon area), then
// re-rasterizes. size = output mask resolution.
DegradedTile degrade(const std::vector<BuildingPolygon>& gt_polys, int size, double fraction,
                     uint64_t seed, const CompletenessThresholds& th = {},
                     bool area_weighted = false);

// Ground-truth class from the fraction of buildings still mapped.
MapClass true_label(double mapped_fraction, const CompletenessThresholds& th = {});

// cover(gen)/cover(degraded); degraded empty & gen nonempty -> +inf; both
// empty -> 1.0.
double site_cover_ratio(const Image& gen_tile, const Image& degraded_tile);

MapClass classify(double ratio, const CompletenessThresholds& th = {});

struct ClassificationResult {
    std::array<std::array<long, 3>, 3> confusion{};  // [truth][predicted]
    std::array<double, 3> precision{}, recall{}, f1{};
    std::array<long, 3> support{};
    std::array<bool, 3> never_predicted{};
    double weighted_precision = 0, weighted_recall = 0, weighted_f1 = 0;
    double accuracy = 0;
    long total = 0;
};

ClassificationResult score(const std::vector<MapClass>& predictions,
                           const std::vector<MapClass>& truths);

// Plain-text confusion matrix + per-class table, and a JSON twin.
std::string classification_table(const ClassificationResult& r);
std::string classification_json(const ClassificationResult& r);

}  // namespace geoforge
