#include "geoforge/geojson.hpp"

#include <nlohmann/json.hpp>

#include "geoforge/common.hpp"

namespace geoforge {

using json = nlohmann::json;

int RoadClassMap::class_for(const std::string& highway_value) const {
    auto it = classes.find(highway_value);
    return it == classes.end() ? 3 : it->second;
}

RoadClassMap RoadClassMap::defaults() {
    RoadClassMap m;
    for (const char* v : {"motorway", "trunk", "primary"}) m.classes[v] = 1;
    for (const char* v : {"secondary", "tertiary"}) m.classes[v] = 2;
    for (const char* v : {"residential", "service", "unclassified", "living_street", "pedestrian"})
        m.classes[v] = 3;
    return m;
}

namespace {

std::string tag_value_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::vector<Pt> parse_coords(const json& arr) {
    std::vector<Pt> pts;
    for (const auto& c : arr) {
        if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
            throw DataError("coordinate is not a [lon, lat] pair");
        pts.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    return pts;
}

void classify_and_add(FeatureSet& fs, GeomKind kind, std::vector<Pt> pts,
                      const std::map<std::string, std::string>& tags,
                      const RoadClassMap& road_classes, size_t index,
                      std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back("feature " + std::to_string(index) + ": " + msg);
    };

    GeoFeature f;
    f.kind = kind;
    f.pts = std::move(pts);
    f.tags = tags;

    if (kind == GeomKind::Polygon && tags.count("building")) {
        f.layer = Layer::Buildings;
    } else if (kind == GeomKind::Polyline && tags.count("highway")) {
        f.layer = Layer::Roads;
        f.road_class = road_classes.class_for(tags.at("highway"));
    } else if (kind == GeomKind::Polygon &&
               (tags.count("landuse") || tags.count("natural") || tags.count("leisure"))) {
        f.layer = Layer::Landuse;
        if (tags.count("landuse")) f.category = tags.at("landuse");
        else if (tags.count("natural")) f.category = tags.at("natural");
        else f.category = tags.at("leisure");
    } else {
        return;  // unclassifiable features are dropped silently
    }

    if (!clean_geometry(f.kind, f.pts)) {
        warn("degenerate geometry dropped");
        return;
    }
    if (f.kind == GeomKind::Polygon && ring_self_intersects(f.pts)) {
        warn("self-intersecting ring dropped");
        return;
    }
    fs.features.push_back(std::move(f));
}

}  // namespace

FeatureSet parse_geodata(const std::string& text, const RoadClassMap& road_classes,
                         std::vector<std::string>* warnings) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed geodata document: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array())
        throw DataError("geodata document is not a FeatureCollection");

    FeatureSet fs;
    size_t index = 0;
    for (const auto& feat : doc["features"]) {
        const size_t i = index++;
        auto warn = [&](const std::string& msg) {
            if (warnings) warnings->push_back("feature " + std::to_string(i) + ": " + msg);
        };
        if (!feat.is_object() || !feat.contains("geometry") || !feat["geometry"].is_object()) {
            warn("missing geometry, dropped");
            continue;
        }
        std::map<std::string, std::string> tags;
        if (feat.contains("properties") && feat["properties"].is_object())
            for (const auto& [k, v] : feat["properties"].items())
                tags[k] = tag_value_to_string(v);

        const json& geom = feat["geometry"];
        const std::string gtype = geom.value("type", "");
        try {
            const json& coords = geom.at("coordinates");
            if (gtype == "Point") {
                classify_and_add(fs, GeomKind::Point, parse_coords(json::array({coords})), tags,
                                 road_classes, i, warnings);
            } else if (gtype == "LineString") {
                classify_and_add(fs, GeomKind::Polyline, parse_coords(coords), tags, road_classes,
                                 i, warnings);
            } else if (gtype == "MultiLineString") {
                for (const auto& line : coords)
                    classify_and_add(fs, GeomKind::Polyline, parse_coords(line), tags,
                                     road_classes, i, warnings);
            } else if (gtype == "Polygon") {
                // outer ring only; interior rings are beyond desk-scale fidelity
                if (coords.empty()) throw DataError("polygon has no rings");
                classify_and_add(fs, GeomKind::Polygon, parse_coords(coords[0]), tags,
                                 road_classes, i, warnings);
            } else if (gtype == "MultiPolygon") {
                for (const auto& poly : coords) {
                    if (poly.empty()) continue;
                    classify_and_add(fs, GeomKind::Polygon, parse_coords(poly[0]), tags,
                                     road_classes, i, warnings);
                }
            } else {
                warn("unsupported geometry type '" + gtype + "', dropped");
            }
        } catch (const std::exception& e) {
            warn(std::string("bad geometry (") + e.what() + "), dropped");
        }
    }
    return fs;
}

namespace {

json coords_json(const std::vector<Pt>& pts, bool close_ring) {
    json arr = json::array();
    for (const Pt& p : pts)
        arr.push_back(json::array({json::parse(format_double(p.x)), json::parse(format_double(p.y))}));
    if (close_ring && !pts.empty())
        arr.push_back(arr[0]);
    return arr;
}

}  // namespace

std::string write_geojson(const FeatureSet& fs) {
    json features = json::array();
    for (const GeoFeature& f : fs.features) {
        json geom;
        switch (f.kind) {
            case GeomKind::Point:
                geom = {{"type", "Point"}, {"coordinates", coords_json(f.pts, false)[0]}};
                break;
            case GeomKind::Polyline:
                geom = {{"type", "LineString"}, {"coordinates", coords_json(f.pts, false)}};
                break;
            case GeomKind::Polygon:
                geom = {{"type", "Polygon"}, {"coordinates", json::array({coords_json(f.pts, true)})}};
                break;
        }
        json props = json::object();
        for (const auto& [k, v] : f.tags) props[k] = v;
        features.push_back({{"type", "Feature"}, {"geometry", geom}, {"properties", props}});
    }
    json doc = {{"type", "FeatureCollection"}, {"features", features}};
    return doc.dump(2) + "\n";
}

}  // namespace geoforge
