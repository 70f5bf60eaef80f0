#pragma once

#include <map>
#include <string>
#include <vector>

#include "geoforge/tilegrid.hpp"

namespace geoforge {

struct Pt {
    double x = 0, y = 0;   // lon, lat for WGS84 geometry
    bool operator==(const Pt&) const = default;
};

enum class GeomKind { Polygon, Polyline, Point };

enum class Layer { Buildings, Roads, Landuse };

// Tagged vector feature in WGS84. Polygons store the outer ring only, open
// form (first vertex not repeated). Tags keep a deterministic key order.
struct GeoFeature {
    GeomKind kind = GeomKind::Point;
    std::vector<Pt> pts;
    std::map<std::string, std::string> tags;
    Layer layer = Layer::Buildings;
    int road_class = 0;         // 1..3 when layer == Roads
    std::string category;       // landuse category when layer == Landuse
};

struct FeatureSet {
    std::vector<GeoFeature> features;
    size_t size() const { return features.size(); }
};

double ring_signed_area(const std::vector<Pt>& ring);
BBox geom_bbox(const std::vector<Pt>& pts);

// Removes duplicate consecutive vertices and a repeated closing vertex.
// Returns false if the result is degenerate for its kind.
bool clean_geometry(GeomKind kind, std::vector<Pt>& pts);

// Proper self-intersection test for a closed ring (crossing interiors of two
// non-adjacent segments). Touching vertices do not count.
bool ring_self_intersects(const std::vector<Pt>& ring);

// Exact-ish geometry vs axis-aligned rect intersection (vertex inside, edge
// crossing, or geometry containing the rect).
bool geom_intersects_bbox(const GeoFeature& f, const BBox& box);

// Point in polygon, even-odd rule.
bool point_in_ring(const Pt& p, const std::vector<Pt>& ring);

}  // namespace geoforge
