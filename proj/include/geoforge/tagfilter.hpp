#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "geoforge/geometry.hpp"
#include "geoforge/tilegrid.hpp"

namespace geoforge {

// Allowlist of `key` or `key=value` entries; bare keys match any value,
// key=value entries match only that exact pair.
struct TagAllowlist {
    std::set<std::string> keys;
    std::set<std::pair<std::string, std::string>> pairs;

    bool empty() const { return keys.empty() && pairs.empty(); }
    bool matches(const std::string& key, const std::string& value) const;

    // One entry per line; blank lines and `#` comments ignored.
    static TagAllowlist parse(const std::string& text);
    static TagAllowlist load(const std::string& path);
};

// Drops tags not matching the allowlist; geometry and layer unchanged.
GeoFeature filter_tags(const GeoFeature& f, const TagAllowlist& allow);

// Count of features intersecting tile t per key=value pair they carry.
std::map<std::string, long> aggregate_tile_tags(const FeatureSet& fs, TileId t,
                                                int tile_pixels = 1024);

}  // namespace geoforge
