#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geoforge {

// XYZ tile address (origin top-left, y grows south).
struct TileId {
    int z = 0;
    int64_t x = 0;
    int64_t y = 0;

    bool operator==(const TileId&) const = default;
    bool valid() const;
    std::string str() const;   // "z/x/y"
};

struct LonLat {
    double lon = 0.0;   // degrees, [-180, 180)
    double lat = 0.0;   // degrees, inside the Web-Mercator band
};

struct TileBounds {
    double west = 0, south = 0, east = 0, north = 0;   // degrees
    double meters_per_pixel = 0;                        // at tile-center latitude
};

struct BBox {
    double west = 0, south = 0, east = 0, north = 0;
    bool empty() const { return west > east || south > north; }
};

// Latitude limit of the square Web-Mercator world.
inline constexpr double kMercatorMaxLat = 85.05112877980659;
inline constexpr double kEarthCircumferenceM = 40075016.685578488;
inline constexpr int kMaxZoom = 22;
inline constexpr int kDefaultZoom = 15;

bool lonlat_valid(const LonLat& p);

// Fractional tile coordinates of a point at zoom z (no flooring).
double tile_fx(double lon_deg, int z);
double tile_fy(double lat_deg, int z);
// Inverse: fractional tile coordinates back to degrees.
double lon_of_fx(double fx, int z);
double lat_of_fy(double fy, int z);

// Tile containing p. Edges are half-open: a point on a shared edge belongs
// to the tile with the larger index.
TileId tile_for_lonlat(const LonLat& p, int z);

LonLat tile_center(const TileId& t);

// tile_pixels sets the resolution used for meters_per_pixel.
TileBounds tile_bounds(const TileId& t, int tile_pixels = 1024);

// Ground width of one tile at latitude lat (meters).
double tile_ground_width_m(int z, double lat_deg);

// All tiles at zoom z intersecting bbox, row-major (y outer, x inner).
std::vector<TileId> enumerate_region(const BBox& bbox, int z);

// Raster path inside a kind root: {root}/{z}/{x}/{y}.png
std::string tile_png_path(const std::string& kind_root, const TileId& t);

}  // namespace geoforge
