#pragma once

#include <vector>

#include "geoforge/geometry.hpp"
#include "geoforge/png_io.hpp"
#include "geoforge/tilegrid.hpp"

namespace geoforge {

// Building footprint traced from a mask. Vertices are lattice points in
// pixel space (pixel (r,c) spans [c,c+1]x[r,r+1]); holes are kept so that
// re-rasterization reproduces the component's pixels exactly, and area_px
// equals the set-pixel count (hole pixels excluded).
struct BuildingPolygon {
    std::vector<Pt> ring;
    std::vector<std::vector<Pt>> holes;
    long area_px = 0;
    double area_m2 = 0;
    TileId tile{};
};

// pixel >= threshold -> 255 else 0
Image binarize(const Image& img, int threshold = 128);

// One polygon per 4-connected component of set pixels.
std::vector<BuildingPolygon> polygonize(const Image& mask);
std::vector<BuildingPolygon> polygonize(const Image& mask, TileId tile, int tile_pixels);

// Exact inverse of polygonize (even-odd fill of outer+hole rings).
Image rasterize_buildings(const std::vector<BuildingPolygon>& polys, int size);

struct TileVectorStats {
    long count = 0;
    long total_area_px = 0;
    double site_cover = 0.0;  // total_area_px / size^2
};
TileVectorStats count_and_area(const std::vector<BuildingPolygon>& polys, int tile_size);

// Douglas-Peucker, export aesthetics only (never used before metrics).
std::vector<Pt> simplify_ring(const std::vector<Pt>& ring, double tolerance);

// Feature-collection export; wgs84=false keeps tile-local pixel coordinates.
std::string export_polygons(const std::vector<BuildingPolygon>& polys, int tile_pixels,
                            bool wgs84, double simplify_tolerance = 0.0);

}  // namespace geoforge
