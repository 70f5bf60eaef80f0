#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "geoforge/geometry.hpp"
#include "geoforge/png_io.hpp"
#include "geoforge/tensor.hpp"
#include "geoforge/tilegrid.hpp"

namespace geoforge {

using Rgb = std::array<uint8_t, 3>;

struct RoadStyle {
    // widths in px at the 1024 reference size, index = class-1; scaled
    // proportionally at other sizes and clamped below at min_width_px so the
    // signal survives small tiles
    std::array<double, 3> widths_1024 = {5.0, 3.0, 1.0};
    std::array<Rgb, 3> colors = {Rgb{255, 85, 0}, Rgb{255, 200, 80}, Rgb{255, 255, 255}};
    double min_width_px = 1.0;

    double width_px(int road_class, int size) const;
};

struct LandusePalette {
    // draw order = list order (later over earlier)
    std::vector<std::pair<std::string, Rgb>> categories;
    Rgb fallback = {128, 128, 128};

    bool has(const std::string& cat) const;
    static LandusePalette defaults();
};

// lon/lat -> tile-local pixel coordinates (y grows downward); pixel (r,c)
// covers [c, c+1) x [r, r+1) with its center at (c+0.5, r+0.5)
Pt lonlat_to_pixel(Pt lonlat, TileId t, int size);

// Pixel-space primitives (even-odd pixel-center coverage, no anti-aliasing).
// `rings` is one polygon: outer ring plus optional holes.
void fill_rings_px(Image& img, const std::vector<std::vector<Pt>>& rings, const Rgb& color);
void draw_segment_px(Image& img, Pt a, Pt b, double width_px, const Rgb& color);

// Binary building mask: pixel 255 iff its center is inside any polygon.
Image rasterize_polygons(const std::vector<std::vector<Pt>>& polys, TileId t, int size);

// Styled 3-channel road image; class 1 widest and drawn on top.
Image rasterize_roads(const std::vector<std::pair<std::vector<Pt>, int>>& lines, TileId t,
                      int size, const RoadStyle& style = RoadStyle{});

// Styled 3-channel landuse image; palette order decides overlaps.
Image rasterize_landuse(const std::vector<std::pair<std::vector<Pt>, std::string>>& polys,
                        TileId t, int size,
                        const LandusePalette& palette = LandusePalette::defaults(),
                        std::vector<std::string>* warnings = nullptr);

// Channel concatenation roads-first, normalized to [0,1]; result shape (6,H,W).
Tensor concat_condition(const Image& roads, const Image& landuse);
// Inverse of concat_condition (values rounded back to bytes).
std::pair<Image, Image> split_condition(const Tensor& cond);

}  // namespace geoforge
