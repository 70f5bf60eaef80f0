#include "geoforge/synthcity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "geoforge/common.hpp"

namespace geoforge {

CitySpec CitySpec::grid_city(uint64_t seed) {
    CitySpec s;
    s.seed = seed;
    s.style = CityStyle::Grid;
    s.name = "gridtown";
    return s;
}

CitySpec CitySpec::organic_city(uint64_t seed) {
    CitySpec s;
    s.seed = seed;
    s.style = CityStyle::Organic;
    s.name = "curville";
    s.block_min_m = 110.0;
    s.block_max_m = 200.0;
    return s;
}

namespace {

constexpr double kMetersPerDegLat = kEarthCircumferenceM / 360.0;
constexpr double kCurveMaxAmpM = 18.0;

struct LocalFrame {
    double m2deg_lat;
    double m2deg_lon;
};

// axis-aligned rect as an open CCW ring
std::vector<Pt> rect_ring(double x0, double y0, double x1, double y1) {
    return {Pt{x0, y0}, Pt{x1, y0}, Pt{x1, y1}, Pt{x0, y1}};
}

GeoFeature make_building(std::vector<Pt> ring, const std::string& value) {
    GeoFeature f;
    f.kind = GeomKind::Polygon;
    f.pts = std::move(ring);
    f.tags["building"] = value;
    f.layer = Layer::Buildings;
    return f;
}

struct ZonePick {
    std::vector<std::string> names;
    std::vector<double> cumulative;  // normalized

    explicit ZonePick(const std::map<std::string, double>& weights) {
        double total = 0;
        for (const auto& [k, w] : weights)
            if (w > 0) total += w;
        double acc = 0;
        for (const auto& [k, w] : weights) {
            if (w <= 0) continue;
            acc += w / total;
            names.push_back(k);
            cumulative.push_back(acc);
        }
    }

    const std::string& pick(double u) const {
        for (size_t i = 0; i < cumulative.size(); ++i)
            if (u < cumulative[i]) return names[i];
        return names.back();
    }
};

}  // namespace

FeatureSet generate_city(const CitySpec& spec, const BBox& region) {
    if (region.empty()) throw DataError("city region bbox is empty");
    if (spec.block_min_m <= 0 || spec.block_max_m < spec.block_min_m)
        throw DataError("block size range must be positive and ordered");
    if (spec.building_density < 0 || spec.building_density > 1)
        throw DataError("building density must be in [0,1]");
    if (spec.zone_weights.empty()) throw DataError("zone weights must not be empty");

    const double lat_c = (region.south + region.north) / 2.0;
    LocalFrame fr{1.0 / kMetersPerDegLat,
                  1.0 / (kMetersPerDegLat * std::cos(lat_c * kPi / 180.0))};

    double amp_factor = 0.0;
    if (spec.style == CityStyle::Organic) amp_factor = 1.0;
    if (spec.style == CityStyle::Mixed) amp_factor = 0.5;
    const double amp_max_m = kCurveMaxAmpM * amp_factor;

    Rng rng(hash_combine(spec.seed, fnv1a64(spec.name)));

    // grid lines (degrees), west->east and south->north, both ends included
    auto make_lines = [&](double lo, double hi, double deg_per_m) {
        std::vector<double> lines{lo};
        double span_m = (hi - lo) / deg_per_m;
        double pos_m = 0.0;
        while (true) {
            pos_m += rng.uniform(spec.block_min_m, spec.block_max_m);
            if (pos_m >= span_m - spec.block_min_m * 0.5) break;
            lines.push_back(lo + pos_m * deg_per_m);
        }
        lines.push_back(hi);
        return lines;
    };
    std::vector<double> xs = make_lines(region.west, region.east, fr.m2deg_lon);
    std::vector<double> ys = make_lines(region.south, region.north, fr.m2deg_lat);

    FeatureSet out;

    // roads along every grid line; organic styles bend them sideways
    auto road_class_for = [](size_t i) { return i % 4 == 0 ? 1 : (i % 2 == 0 ? 2 : 3); };
    auto road_tag_for = [](int cls) {
        return cls == 1 ? "primary" : (cls == 2 ? "secondary" : "residential");
    };
    auto emit_road = [&](bool vertical, double at, double lo, double hi, int cls) {
        GeoFeature f;
        f.kind = GeomKind::Polyline;
        f.layer = Layer::Roads;
        f.road_class = cls;
        f.tags["highway"] = road_tag_for(cls);
        double amp_m = amp_factor > 0 ? rng.uniform(6.0, kCurveMaxAmpM) * amp_factor : 0.0;
        double freq = amp_factor > 0 ? rng.uniform(1.0, 3.0) : 1.0;
        double phase = amp_factor > 0 ? rng.uniform(0.0, 2.0 * kPi) : 0.0;
        const int segs = amp_m > 0 ? 16 : 1;
        for (int s = 0; s <= segs; ++s) {
            double t = static_cast<double>(s) / segs;
            double along = lo + (hi - lo) * t;
            double off_m = amp_m * std::sin(2.0 * kPi * freq * t + phase);
            if (vertical)
                f.pts.push_back(Pt{at + off_m * fr.m2deg_lon, along});
            else
                f.pts.push_back(Pt{along, at + off_m * fr.m2deg_lat});
        }
        out.features.push_back(std::move(f));
    };
    for (size_t i = 0; i < xs.size(); ++i)
        emit_road(true, xs[i], region.south, region.north, road_class_for(i));
    for (size_t j = 0; j < ys.size(); ++j)
        emit_road(false, ys[j], region.west, region.east, road_class_for(j));

    ZonePick zones(spec.zone_weights);
    const uint64_t zone_seed = hash_combine(spec.seed, fnv1a64("zones"));

    for (size_t j = 0; j + 1 < ys.size(); ++j) {
        for (size_t i = 0; i + 1 < xs.size(); ++i) {
            // blocks share zones in 2x2 groups so landuse areas span blocks
            uint64_t zh = splitmix64(
                hash_combine(zone_seed, (static_cast<uint64_t>(i / 2) << 32) | (j / 2)));
            const std::string& zone = zones.pick((zh >> 11) * 0x1.0p-53);

            GeoFeature lf;
            lf.kind = GeomKind::Polygon;
            lf.layer = Layer::Landuse;
            lf.category = zone;
            if (zone == "park")
                lf.tags["leisure"] = "park";
            else if (zone == "water")
                lf.tags["natural"] = "water";
            else
                lf.tags["landuse"] = zone;
            lf.pts = rect_ring(xs[i], ys[j], xs[i + 1], ys[j + 1]);
            out.features.push_back(std::move(lf));

            auto it = spec.zone_density.find(zone);
            double density =
                (it != spec.zone_density.end() ? it->second : 0.0) * spec.building_density;
            if (density <= 0) continue;

            // the safe area stays clear of roads even when curves bend inward
            double inset_m = spec.building_inset_m + amp_max_m;
            double bx0 = xs[i] + inset_m * fr.m2deg_lon;
            double bx1 = xs[i + 1] - inset_m * fr.m2deg_lon;
            double by0 = ys[j] + inset_m * fr.m2deg_lat;
            double by1 = ys[j + 1] - inset_m * fr.m2deg_lat;
            double bw_m = (bx1 - bx0) / fr.m2deg_lon;
            double bh_m = (by1 - by0) / fr.m2deg_lat;
            if (bw_m < 12.0 || bh_m < 12.0) continue;

            if (zone == "residential") {
                // rows of small regular houses on a sub-grid
                double fw = rng.uniform(10.0, 16.0), fh = rng.uniform(10.0, 16.0);
                double pitch_x = fw + 7.0, pitch_y = fh + 7.0;
                int nx = static_cast<int>(bw_m / pitch_x), ny = static_cast<int>(bh_m / pitch_y);
                for (int r = 0; r < ny; ++r) {
                    for (int c = 0; c < nx; ++c) {
                        if (rng.uniform() >= density) continue;
                        double jx = rng.uniform(0.0, 2.0), jy = rng.uniform(0.0, 2.0);
                        double x0 = bx0 + (c * pitch_x + jx) * fr.m2deg_lon;
                        double y0 = by0 + (r * pitch_y + jy) * fr.m2deg_lat;
                        out.features.push_back(make_building(
                            rect_ring(x0, y0, x0 + fw * fr.m2deg_lon, y0 + fh * fr.m2deg_lat),
                            "house"));
                    }
                }
            } else {
                // commercial/retail: fewer, larger, irregular (L-shaped);
                // industrial: large plain halls
                bool industrial = zone == "industrial";
                int want = 1 + static_cast<int>(rng.below(industrial ? 2 : 3));
                for (int b = 0; b < want; ++b) {
                    if (rng.uniform() >= density) continue;
                    double fw = rng.uniform(industrial ? 30.0 : 24.0, industrial ? 64.0 : 52.0);
                    double fh = rng.uniform(industrial ? 30.0 : 24.0, industrial ? 64.0 : 52.0);
                    fw = std::min(fw, bw_m);
                    fh = std::min(fh, bh_m);
                    double ox = rng.uniform(0.0, bw_m - fw), oy = rng.uniform(0.0, bh_m - fh);
                    double x0 = bx0 + ox * fr.m2deg_lon, y0 = by0 + oy * fr.m2deg_lat;
                    double x1 = x0 + fw * fr.m2deg_lon, y1 = y0 + fh * fr.m2deg_lat;
                    bool notch = !industrial && rng.uniform() < 0.7;
                    if (notch) {
                        double nw = fw * rng.uniform(0.25, 0.45) * fr.m2deg_lon;
                        double nh = fh * rng.uniform(0.25, 0.45) * fr.m2deg_lat;
                        out.features.push_back(make_building(
                            {Pt{x0, y0}, Pt{x1, y0}, Pt{x1, y1 - nh}, Pt{x1 - nw, y1 - nh},
                             Pt{x1 - nw, y1}, Pt{x0, y1}},
                            "commercial"));
                    } else {
                        out.features.push_back(make_building(
                            rect_ring(x0, y0, x1, y1), industrial ? "industrial" : "commercial"));
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace geoforge
