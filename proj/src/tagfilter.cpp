#include "geoforge/tagfilter.hpp"

#include <sstream>

#include "geoforge/common.hpp"

namespace geoforge {

bool TagAllowlist::matches(const std::string& key, const std::string& value) const {
    if (keys.count(key)) return true;
    return pairs.count({key, value}) != 0;
}

TagAllowlist TagAllowlist::parse(const std::string& text) {
    TagAllowlist a;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            a.keys.insert(line);
        } else {
            a.pairs.emplace(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    if (a.empty()) throw DataError("allowlist is empty");
    return a;
}

TagAllowlist TagAllowlist::load(const std::string& path) {
    return parse(read_text_file(path));
}

GeoFeature filter_tags(const GeoFeature& f, const TagAllowlist& allow) {
    GeoFeature out = f;
    out.tags.clear();
    for (const auto& [k, v] : f.tags)
        if (allow.matches(k, v)) out.tags[k] = v;
    return out;
}

std::map<std::string, long> aggregate_tile_tags(const FeatureSet& fs, TileId t,
                                                int tile_pixels) {
    TileBounds tb = tile_bounds(t, tile_pixels);
    BBox box{tb.west, tb.south, tb.east, tb.north};
    std::map<std::string, long> counts;
    for (const GeoFeature& f : fs.features) {
        if (!geom_intersects_bbox(f, box)) continue;
        for (const auto& [k, v] : f.tags) counts[k + "=" + v] += 1;
    }
    return counts;
}

}  // namespace geoforge
