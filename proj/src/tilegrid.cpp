#include "geoforge/tilegrid.hpp"

#include <cmath>
#include <stdexcept>

#include "geoforge/common.hpp"

namespace geoforge {

bool TileId::valid() const {
    if (z < 0 || z > kMaxZoom) return false;
    const int64_t n = int64_t{1} << z;
    return x >= 0 && x < n && y >= 0 && y < n;
}

std::string TileId::str() const {
    return std::to_string(z) + "/" + std::to_string(x) + "/" + std::to_string(y);
}

bool lonlat_valid(const LonLat& p) {
    return p.lon >= -180.0 && p.lon < 180.0 &&
           p.lat > -kMercatorMaxLat && p.lat < kMercatorMaxLat;
}

double tile_fx(double lon_deg, int z) {
    return (lon_deg + 180.0) / 360.0 * static_cast<double>(int64_t{1} << z);
}

double tile_fy(double lat_deg, int z) {
    const double phi = lat_deg * M_PI / 180.0;
    // y = (1 - ln(tan(phi) + sec(phi)) / pi) / 2 * 2^z
    const double m = std::log(std::tan(phi) + 1.0 / std::cos(phi));
    return (1.0 - m / M_PI) / 2.0 * static_cast<double>(int64_t{1} << z);
}

double lon_of_fx(double fx, int z) {
    return fx / static_cast<double>(int64_t{1} << z) * 360.0 - 180.0;
}

double lat_of_fy(double fy, int z) {
    const double n = static_cast<double>(int64_t{1} << z);
    const double m = M_PI * (1.0 - 2.0 * fy / n);
    return std::atan(std::sinh(m)) * 180.0 / M_PI;
}

TileId tile_for_lonlat(const LonLat& p, int z) {
    if (z < 0 || z > kMaxZoom) throw std::domain_error("zoom out of range");
    if (!lonlat_valid(p)) throw std::domain_error("point outside the Web-Mercator band");
    const int64_t n = int64_t{1} << z;
    int64_t x = static_cast<int64_t>(std::floor(tile_fx(p.lon, z)));
    int64_t y = static_cast<int64_t>(std::floor(tile_fy(p.lat, z)));
    if (x < 0) x = 0;
    if (x >= n) x = n - 1;
    if (y < 0) y = 0;
    if (y >= n) y = n - 1;
    return TileId{z, x, y};
}

LonLat tile_center(const TileId& t) {
    return LonLat{lon_of_fx(static_cast<double>(t.x) + 0.5, t.z),
                  lat_of_fy(static_cast<double>(t.y) + 0.5, t.z)};
}

double tile_ground_width_m(int z, double lat_deg) {
    return kEarthCircumferenceM * std::cos(lat_deg * M_PI / 180.0) /
           static_cast<double>(int64_t{1} << z);
}

TileBounds tile_bounds(const TileId& t, int tile_pixels) {
    TileBounds b;
    b.west = lon_of_fx(static_cast<double>(t.x), t.z);
    b.east = lon_of_fx(static_cast<double>(t.x) + 1.0, t.z);
    b.north = lat_of_fy(static_cast<double>(t.y), t.z);
    b.south = lat_of_fy(static_cast<double>(t.y) + 1.0, t.z);
    const double center_lat = tile_center(t).lat;
    b.meters_per_pixel = tile_ground_width_m(t.z, center_lat) / tile_pixels;
    return b;
}

namespace {

// Index range [lo, hi] of tiles a 1-D interval [a, b] touches, half-open per
// tile: a value sitting exactly on an edge belongs to the tile east/south of
// it, so an interval ending on an edge does not spill into the next tile.
void axis_range(double fa, double fb, int64_t n, int64_t& lo, int64_t& hi) {
    lo = static_cast<int64_t>(std::floor(fa));
    hi = static_cast<int64_t>(std::floor(fb));
    if (fb > fa && fb == std::floor(fb)) hi -= 1;
    if (lo < 0) lo = 0;
    if (hi > n - 1) hi = n - 1;
}

}  // namespace

std::vector<TileId> enumerate_region(const BBox& bbox, int z) {
    std::vector<TileId> out;
    if (bbox.empty()) return out;
    if (z < 0 || z > kMaxZoom) throw std::domain_error("zoom out of range");
    const int64_t n = int64_t{1} << z;

    int64_t x0, x1, y0, y1;
    axis_range(tile_fx(bbox.west, z), tile_fx(bbox.east, z), n, x0, x1);
    // y grows southward: north edge maps to the smaller fy
    axis_range(tile_fy(bbox.north, z), tile_fy(bbox.south, z), n, y0, y1);
    if (x1 < x0 || y1 < y0) return out;

    out.reserve(static_cast<size_t>((x1 - x0 + 1) * (y1 - y0 + 1)));
    for (int64_t y = y0; y <= y1; ++y)
        for (int64_t x = x0; x <= x1; ++x)
            out.push_back(TileId{z, x, y});
    return out;
}

std::string tile_png_path(const std::string& kind_root, const TileId& t) {
    return kind_root + "/" + std::to_string(t.z) + "/" + std::to_string(t.x) + "/" +
           std::to_string(t.y) + ".png";
}

}  // namespace geoforge
