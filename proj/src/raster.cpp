#include "geoforge/raster.hpp"

#include <algorithm>
#include <cmath>

#include "geoforge/common.hpp"

namespace geoforge {

double RoadStyle::width_px(int road_class, int size) const {
    if (road_class < 1 || road_class > 3) throw DataError("road class must be 1..3");
    double w = widths_1024[(size_t)road_class - 1] * ((double)size / 1024.0);
    return std::max(w, min_width_px);
}

bool LandusePalette::has(const std::string& cat) const {
    for (const auto& [name, _] : categories)
        if (name == cat) return true;
    return false;
}

LandusePalette LandusePalette::defaults() {
    LandusePalette p;
    p.categories = {
        {"residential", Rgb{218, 219, 180}},
        {"commercial", Rgb{238, 205, 205}},
        {"industrial", Rgb{196, 189, 219}},
        {"retail", Rgb{250, 210, 150}},
        {"forest", Rgb{171, 210, 156}},
        {"grass", Rgb{205, 235, 176}},
        {"park", Rgb{198, 250, 204}},
        {"water", Rgb{170, 211, 223}},
    };
    return p;
}

Pt lonlat_to_pixel(Pt lonlat, TileId t, int size) {
    double fx = tile_fx(lonlat.x, t.z);
    double fy = tile_fy(lonlat.y, t.z);
    return {(fx - (double)t.x) * size, (fy - (double)t.y) * size};
}

namespace {

void set_px(Image& img, int y, int x, const Rgb& color) {
    if (img.channels == 1) {
        img.at(y, x) = color[0];
    } else {
        img.at(y, x, 0) = color[0];
        img.at(y, x, 1) = color[1];
        img.at(y, x, 2) = color[2];
    }
}

// conservative pixel-index range covering [lo, hi] in pixel space
void px_range(double lo, double hi, int size, int& first, int& last) {
    first = std::max(0, (int)std::floor(lo) - 1);
    last = std::min(size - 1, (int)std::ceil(hi) + 1);
}

}  // namespace

void fill_rings_px(Image& img, const std::vector<std::vector<Pt>>& rings, const Rgb& color) {
    double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
    for (const auto& ring : rings)
        for (const Pt& p : ring) {
            minx = std::min(minx, p.x);
            maxx = std::max(maxx, p.x);
            miny = std::min(miny, p.y);
            maxy = std::max(maxy, p.y);
        }
    if (minx > maxx) return;
    int x0, x1, y0, y1;
    px_range(minx, maxx, img.width, x0, x1);
    px_range(miny, maxy, img.height, y0, y1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            Pt c{x + 0.5, y + 0.5};
            bool inside = false;
            for (const auto& ring : rings)
                if (point_in_ring(c, ring)) inside = !inside;
            if (inside) set_px(img, y, x, color);
        }
    }
}

void draw_segment_px(Image& img, Pt a, Pt b, double width_px, const Rgb& color) {
    const double r = width_px / 2.0;
    int x0, x1, y0, y1;
    px_range(std::min(a.x, b.x) - r, std::max(a.x, b.x) + r, img.width, x0, x1);
    px_range(std::min(a.y, b.y) - r, std::max(a.y, b.y) + r, img.height, y0, y1);
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            Pt c{x + 0.5, y + 0.5};
            double t = len2 == 0.0 ? 0.0
                                   : std::clamp(((c.x - a.x) * dx + (c.y - a.y) * dy) / len2,
                                                0.0, 1.0);
            double ex = c.x - (a.x + t * dx), ey = c.y - (a.y + t * dy);
            if (std::sqrt(ex * ex + ey * ey) <= r) set_px(img, y, x, color);
        }
    }
}

namespace {

std::vector<Pt> to_pixel_ring(const std::vector<Pt>& lonlat, TileId t, int size) {
    std::vector<Pt> out;
    out.reserve(lonlat.size());
    for (const Pt& p : lonlat) out.push_back(lonlat_to_pixel(p, t, size));
    return out;
}

}  // namespace

Image rasterize_polygons(const std::vector<std::vector<Pt>>& polys, TileId t, int size) {
    Image mask(size, size, 1, 0);
    for (const auto& poly : polys) {
        if (poly.size() < 3) continue;
        fill_rings_px(mask, {to_pixel_ring(poly, t, size)}, Rgb{255, 255, 255});
    }
    return mask;
}

Image rasterize_roads(const std::vector<std::pair<std::vector<Pt>, int>>& lines, TileId t,
                      int size, const RoadStyle& style) {
    Image img(size, size, 3, 0);
    // least important first so class 1 ends up on top
    for (int cls = 3; cls >= 1; --cls) {
        const double w = style.width_px(cls, size);
        const Rgb& color = style.colors[(size_t)cls - 1];
        for (const auto& [line, line_cls] : lines) {
            if (line_cls != cls || line.size() < 2) continue;
            std::vector<Pt> px = to_pixel_ring(line, t, size);
            for (size_t i = 0; i + 1 < px.size(); ++i)
                draw_segment_px(img, px[i], px[i + 1], w, color);
        }
    }
    return img;
}

Image rasterize_landuse(const std::vector<std::pair<std::vector<Pt>, std::string>>& polys,
                        TileId t, int size, const LandusePalette& palette,
                        std::vector<std::string>* warnings) {
    Image img(size, size, 3, 0);
    // unknown categories first (fallback color), then palette order on top
    for (const auto& [poly, cat] : polys) {
        if (poly.size() < 3 || palette.has(cat)) continue;
        if (warnings) warnings->push_back("unknown landuse category '" + cat + "'");
        fill_rings_px(img, {to_pixel_ring(poly, t, size)}, palette.fallback);
    }
    for (const auto& [name, color] : palette.categories) {
        for (const auto& [poly, cat] : polys) {
            if (cat != name || poly.size() < 3) continue;
            fill_rings_px(img, {to_pixel_ring(poly, t, size)}, color);
        }
    }
    return img;
}

Tensor concat_condition(const Image& roads, const Image& landuse) {
    if (roads.width != landuse.width || roads.height != landuse.height)
        throw DataError("concat_condition: spatial dims differ");
    if (roads.channels != 3 || landuse.channels != 3)
        throw DataError("concat_condition: expected 3-channel styled rasters");
    const long h = roads.height, w = roads.width;
    Tensor cond({6, h, w});
    for (int c = 0; c < 3; ++c)
        for (long y = 0; y < h; ++y)
            for (long x = 0; x < w; ++x) {
                cond.data[((size_t)c * h + y) * w + x] = roads.at((int)y, (int)x, c) / 255.0;
                cond.data[(((size_t)c + 3) * h + y) * w + x] =
                    landuse.at((int)y, (int)x, c) / 255.0;
            }
    return cond;
}

std::pair<Image, Image> split_condition(const Tensor& cond) {
    if (cond.rank() != 3 || cond.dim(0) != 6)
        throw DataError("split_condition: expected (6,H,W) tensor");
    const int h = (int)cond.dim(1), w = (int)cond.dim(2);
    Image roads(w, h, 3), landuse(w, h, 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                roads.at(y, x, c) =
                    (uint8_t)std::llround(cond.data[((size_t)c * h + y) * w + x] * 255.0);
                landuse.at(y, x, c) =
                    (uint8_t)std::llround(cond.data[(((size_t)c + 3) * h + y) * w + x] * 255.0);
            }
    return {roads, landuse};
}

}  // namespace geoforge
