#include "geoforge/manifest.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "geoforge/common.hpp"

namespace geoforge {

using ojson = nlohmann::ordered_json;

std::string assign_split(TileId t, uint64_t seed, double eval_fraction) {
    uint64_t h = seed;
    h = hash_combine(h, (uint64_t)t.z);
    h = hash_combine(h, (uint64_t)t.x);
    h = hash_combine(h, (uint64_t)t.y);
    double u = (splitmix64(h) >> 11) * 0x1.0p-53;
    return u < eval_fraction ? "eval" : "train";
}

std::string manifest_line(const TileRecord& r) {
    ojson o;
    o["z"] = r.tile.z;
    o["x"] = r.tile.x;
    o["y"] = r.tile.y;
    o["center_lon"] = ojson::parse(format_double(r.center.lon));
    o["center_lat"] = ojson::parse(format_double(r.center.lat));
    o["city"] = r.caption.city_name;
    o["caption"] = r.caption.final_caption;
    o["fallback"] = r.caption.fallback;
    o["target_path"] = r.target_path;
    o["roads_path"] = r.roads_path;
    o["landuse_path"] = r.landuse_path;
    o["split"] = r.split;
    return o.dump();
}

TileRecord parse_manifest_line(const std::string& line) {
    ojson o;
    try {
        o = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
        throw DataError(std::string("bad manifest line: ") + e.what());
    }
    TileRecord r;
    try {
        r.tile = {o.at("z").get<int>(), o.at("x").get<long>(), o.at("y").get<long>()};
        r.center = {o.at("center_lon").get<double>(), o.at("center_lat").get<double>()};
        r.caption.city_name = o.at("city").get<std::string>();
        r.caption.final_caption = o.at("caption").get<std::string>();
        r.caption.fallback = o.at("fallback").get<bool>();
        r.target_path = o.at("target_path").get<std::string>();
        r.roads_path = o.at("roads_path").get<std::string>();
        r.landuse_path = o.at("landuse_path").get<std::string>();
        r.split = o.at("split").get<std::string>();
    } catch (const ojson::exception& e) {
        throw DataError(std::string("manifest line missing field: ") + e.what());
    }
    if (!r.tile.valid()) throw DataError("manifest line has invalid tile id");
    if (r.split != "train" && r.split != "eval")
        throw DataError("manifest split must be train or eval, got '" + r.split + "'");
    return r;
}

void write_manifest(const std::string& path, const std::vector<TileRecord>& recs) {
    std::string out;
    for (const TileRecord& r : recs) {
        out += manifest_line(r);
        out += "\n";
    }
    write_text_file(path, out);
}

std::vector<TileRecord> read_manifest(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<TileRecord> recs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            recs.push_back(parse_manifest_line(line));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return recs;
}

}  // namespace geoforge
