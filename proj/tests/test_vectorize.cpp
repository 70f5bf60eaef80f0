#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "geoforge/common.hpp"
#include "geoforge/vectorize.hpp"

#include "nlohmann/json.hpp"

using namespace geoforge;

namespace {

// independent 4-connected component count (BFS), the oracle for polygon count
int flood_count(const Image& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<char> seen((size_t)w * h, 0);
    int comps = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (mask.at(y, x) == 0 || seen[(size_t)y * w + x]) continue;
            ++comps;
            stack.push_back({y, x});
            seen[(size_t)y * w + x] = 1;
            while (!stack.empty()) {
                auto [cy, cx] = stack.back();
                stack.pop_back();
                const int ny[4] = {cy - 1, cy + 1, cy, cy};
                const int nx[4] = {cx, cx, cx - 1, cx + 1};
                for (int k = 0; k < 4; ++k) {
                    if (ny[k] < 0 || ny[k] >= h || nx[k] < 0 || nx[k] >= w) continue;
                    if (mask.at(ny[k], nx[k]) == 0 || seen[(size_t)ny[k] * w + nx[k]]) continue;
                    seen[(size_t)ny[k] * w + nx[k]] = 1;
                    stack.push_back({ny[k], nx[k]});
                }
            }
        }
    return comps;
}

long count_set(const Image& mask) {
    long n = 0;
    for (uint8_t v : mask.data)
        if (v != 0) ++n;
    return n;
}

double shoelace(const std::vector<Pt>& ring) {
    double s = 0;
    for (size_t i = 0; i < ring.size(); ++i) {
        const Pt& a = ring[i];
        const Pt& b = ring[(i + 1) % ring.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return s / 2.0;
}

std::set<std::pair<int, int>> vertex_set(const std::vector<Pt>& ring) {
    std::set<std::pair<int, int>> s;
    for (const Pt& p : ring) s.insert({(int)std::lround(p.x), (int)std::lround(p.y)});
    return s;
}

Image make_mask(int size, const std::vector<std::pair<int, int>>& pixels) {
    Image m(size, size, 1, 0);
    for (auto [y, x] : pixels) m.at(y, x) = 255;
    return m;
}

}  // namespace

TEST_CASE("binarize thresholds and channel choice") {
    Image g(2, 1, 1);
    g.at(0, 0) = 127;
    g.at(0, 1) = 128;
    Image b = binarize(g);
    CHECK(b.at(0, 0) == 0);
    CHECK(b.at(0, 1) == 255);

    Image rgb(1, 1, 3);
    rgb.at(0, 0, 0) = 200;  // first channel decides
    rgb.at(0, 0, 1) = 0;
    rgb.at(0, 0, 2) = 0;
    Image br = binarize(rgb);
    CHECK(br.channels == 1);
    CHECK(br.at(0, 0) == 255);
}

TEST_CASE("single pixel traces a unit square") {
    Image m = make_mask(8, {{2, 3}});  // row 2, col 3
    auto polys = polygonize(m);
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].area_px == 1);
    CHECK(polys[0].holes.empty());
    REQUIRE(polys[0].ring.size() == 4);
    CHECK(vertex_set(polys[0].ring) ==
          std::set<std::pair<int, int>>{{3, 2}, {4, 2}, {4, 3}, {3, 3}});
    CHECK(std::abs(shoelace(polys[0].ring)) == doctest::Approx(1.0));
}

TEST_CASE("2x2 block merges collinear lattice vertices") {
    Image m = make_mask(8, {{1, 1}, {1, 2}, {2, 1}, {2, 2}});
    auto polys = polygonize(m);
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].area_px == 4);
    CHECK(polys[0].ring.size() == 4);  // corners only
    CHECK(std::abs(shoelace(polys[0].ring)) == doctest::Approx(4.0));
}

TEST_CASE("donut gets one hole ring") {
    std::vector<std::pair<int, int>> px;
    for (int y = 1; y <= 3; ++y)
        for (int x = 1; x <= 3; ++x)
            if (!(y == 2 && x == 2)) px.push_back({y, x});
    Image m = make_mask(8, px);
    auto polys = polygonize(m);
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].area_px == 8);
    REQUIRE(polys[0].holes.size() == 1);
    CHECK(std::abs(shoelace(polys[0].ring)) == doctest::Approx(9.0));
    CHECK(std::abs(shoelace(polys[0].holes[0])) == doctest::Approx(1.0));
    CHECK(rasterize_buildings(polys, 8) == m);
}

TEST_CASE("diagonal pixels are separate components") {
    Image m = make_mask(8, {{0, 0}, {1, 1}});
    auto polys = polygonize(m);
    REQUIRE(polys.size() == 2);
    CHECK(polys[0].area_px == 1);
    CHECK(polys[1].area_px == 1);
    CHECK(rasterize_buildings(polys, 8) == m);
}

TEST_CASE("hole touching the outer boundary at a pinch vertex") {
    // 3x3 block minus its centre (a hole) and minus the corner pixel (2,2);
    // the outer ring passes through lattice vertex (2,2) twice
    std::vector<std::pair<int, int>> px;
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            if (!(y == 1 && x == 1) && !(y == 2 && x == 2)) px.push_back({y, x});
    Image m = make_mask(8, px);
    auto polys = polygonize(m);
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].area_px == 7);
    REQUIRE(polys[0].holes.size() == 1);
    CHECK(std::abs(shoelace(polys[0].holes[0])) == doctest::Approx(1.0));
    CHECK(rasterize_buildings(polys, 8) == m);
}

TEST_CASE("checkerboard corners stay distinct") {
    Image m = make_mask(4, {{0, 0}, {1, 1}, {0, 2}, {2, 0}, {2, 2}, {1, 3}, {3, 1}, {3, 3}});
    auto polys = polygonize(m);
    CHECK((int)polys.size() == flood_count(m));
    CHECK(rasterize_buildings(polys, 4) == m);
}

TEST_CASE("random masks: exact round trip, count and area oracles") {
    Rng rng(2026);
    for (int iter = 0; iter < 300; ++iter) {
        const int size = iter % 3 == 0 ? 48 : 24;
        const double density = 0.1 + 0.2 * (double)(iter % 4);
        Image m(size, size, 1, 0);
        for (auto& v : m.data) v = rng.uniform(0.0, 1.0) < density ? 255 : 0;

        auto polys = polygonize(m);
        CHECK((int)polys.size() == flood_count(m));

        long area_sum = 0;
        for (const auto& p : polys) {
            area_sum += p.area_px;
            // outer area minus hole areas equals the pixel count
            double net = std::abs(shoelace(p.ring));
            for (const auto& h : p.holes) net -= std::abs(shoelace(h));
            CHECK(net == doctest::Approx((double)p.area_px));
        }
        CHECK(area_sum == count_set(m));

        CHECK(rasterize_buildings(polys, size) == m);
    }
}

TEST_CASE("degenerate masks") {
    Image empty(16, 16, 1, 0);
    CHECK(polygonize(empty).empty());
    CHECK(rasterize_buildings({}, 16) == empty);

    Image full(16, 16, 1, 255);
    auto polys = polygonize(full);
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].area_px == 256);
    CHECK(polys[0].ring.size() == 4);
    CHECK(rasterize_buildings(polys, 16) == full);
}

TEST_CASE("count_and_area summarizes site cover") {
    Image m = make_mask(16, {{0, 0}, {0, 1}, {5, 5}});
    auto polys = polygonize(m);
    TileVectorStats s = count_and_area(polys, 16);
    CHECK(s.count == 2);
    CHECK(s.total_area_px == 3);
    CHECK(s.site_cover == doctest::Approx(3.0 / 256.0));
}

TEST_CASE("tile-aware polygonize carries metric areas") {
    const TileId t{15, 16384, 16383};  // near the equator
    Image m = make_mask(64, {{10, 10}, {10, 11}, {11, 10}, {11, 11}});
    auto polys = polygonize(m, t, 64);
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].tile == t);
    const double px_m = tile_ground_width_m(t.z, tile_center(t).lat) / 64.0;
    CHECK(polys[0].area_m2 == doctest::Approx(4.0 * px_m * px_m).epsilon(1e-9));
}

TEST_CASE("simplify_ring drops near-collinear vertices only") {
    const std::vector<Pt> ring = {{0, 0}, {5, 0.05}, {10, 0}, {10, 10}, {0, 10}};
    auto coarse = simplify_ring(ring, 0.2);
    REQUIRE(coarse.size() == 4);
    CHECK(vertex_set(coarse) == std::set<std::pair<int, int>>{{0, 0}, {10, 0}, {10, 10}, {0, 10}});
    // tolerance below the bump keeps it
    CHECK(simplify_ring(ring, 0.01).size() == 5);
    // non-positive tolerance is a no-op
    CHECK(simplify_ring(ring, 0.0).size() == 5);
}

TEST_CASE("export_polygons emits closed GeoJSON rings") {
    const TileId t{15, 17601, 10746};
    Image m = make_mask(64, {{2, 3}});
    auto polys = polygonize(m, t, 64);

    SUBCASE("pixel coordinates") {
        auto j = nlohmann::json::parse(export_polygons(polys, 64, false));
        CHECK(j["type"] == "FeatureCollection");
        REQUIRE(j["features"].size() == 1);
        const auto& f = j["features"][0];
        CHECK(f["properties"]["area_px"] == 1);
        CHECK(f["properties"]["tile"] == "15/17601/10746");
        CHECK(f["geometry"]["type"] == "Polygon");
        const auto& ring = f["geometry"]["coordinates"][0];
        REQUIRE(ring.size() == 5);  // 4 vertices + closing repeat
        CHECK(ring[0] == ring[4]);
    }
    SUBCASE("wgs84 coordinates match the tile projection") {
        auto j = nlohmann::json::parse(export_polygons(polys, 64, true));
        const auto& ring = j["features"][0]["geometry"]["coordinates"][0];
        bool found = false;
        for (const auto& c : ring) {
            // lattice vertex (3,2) in pixel space
            if (std::abs((double)c[0] - lon_of_fx(t.x + 3.0 / 64.0, t.z)) < 1e-12 &&
                std::abs((double)c[1] - lat_of_fy(t.y + 2.0 / 64.0, t.z)) < 1e-12)
                found = true;
        }
        CHECK(found);
    }
}
