#pragma once

#include <string>
#include <vector>

#include "geoforge/captions.hpp"
#include "geoforge/tilegrid.hpp"

namespace geoforge {

struct TileRecord {
    TileId tile;
    LonLat center;  // == tile_center(tile)
    CaptionBundle caption;
    std::string target_path, roads_path, landuse_path;
    std::string split;  // "train" | "eval"
};

// Deterministic, region-independent split keyed by (seed, tile).
std::string assign_split(TileId t, uint64_t seed, double eval_fraction);

// One JSON object per line with fields
// {z, x, y, center_lon, center_lat, city, caption, fallback,
//  target_path, roads_path, landuse_path, split}.
std::string manifest_line(const TileRecord& r);
TileRecord parse_manifest_line(const std::string& line);

void write_manifest(const std::string& path, const std::vector<TileRecord>& recs);
std::vector<TileRecord> read_manifest(const std::string& path);

}  // namespace geoforge
