#include "geoforge/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "geoforge/common.hpp"
#include "geoforge/raster.hpp"

#include "nlohmann/json.hpp"

namespace geoforge {

Image binarize(const Image& img, int threshold) {
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.channels = 1;
    out.data.resize(static_cast<size_t>(img.width) * img.height);
    const int ch = img.channels;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            // multi-channel input is judged on its first channel
            int v = img.data[(static_cast<size_t>(y) * img.width + x) * ch];
            out.data[static_cast<size_t>(y) * img.width + x] = v >= threshold ? 255 : 0;
        }
    }
    return out;
}

namespace {

// Directed unit edge on the pixel-corner lattice. Edges run with the
// component on a fixed side, so stitching them by "sharpest left turn"
// separates outer rings from hole rings even where they touch at a corner.
struct EdgeKey {
    int32_t x = 0, y = 0;   // start vertex
    int8_t dx = 0, dy = 0;  // unit direction
    bool operator==(const EdgeKey&) const = default;
};

uint64_t pack_vertex(int32_t x, int32_t y) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(x)) << 32) | static_cast<uint32_t>(y);
}

int dir_index(int dx, int dy) {
    // 0:+x 1:+y 2:-x 3:-y
    if (dx == 1) return 0;
    if (dy == 1) return 1;
    if (dx == -1) return 2;
    return 3;
}

struct VertexEdges {
    // outgoing directions present at this vertex, bitmask over dir_index
    uint8_t out_mask = 0;
    uint8_t consumed_mask = 0;
};

// Trace the boundary loops of one labeled component and split them into an
// outer ring and holes. Vertices are pixel-corner lattice points.
void trace_component(const std::vector<int>& labels, int w, int h, int comp,
                     const std::vector<std::pair<int, int>>& pixels, std::vector<Pt>& outer,
                     std::vector<std::vector<Pt>>& holes) {
    auto is_comp = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h &&
               labels[static_cast<size_t>(y) * w + x] == comp;
    };

    std::unordered_map<uint64_t, VertexEdges> verts;
    verts.reserve(pixels.size() * 2);
    std::vector<EdgeKey> starts;
    auto add_edge = [&](int x, int y, int dx, int dy) {
        verts[pack_vertex(x, y)].out_mask |= static_cast<uint8_t>(1u << dir_index(dx, dy));
        starts.push_back({x, y, static_cast<int8_t>(dx), static_cast<int8_t>(dy)});
    };
    for (auto [px, py] : pixels) {
        if (!is_comp(px, py - 1)) add_edge(px, py, 1, 0);           // top
        if (!is_comp(px + 1, py)) add_edge(px + 1, py, 0, 1);       // right
        if (!is_comp(px, py + 1)) add_edge(px + 1, py + 1, -1, 0);  // bottom
        if (!is_comp(px - 1, py)) add_edge(px, py + 1, 0, -1);      // left
    }

    std::vector<std::vector<Pt>> loops;
    for (const EdgeKey& e0 : starts) {
        {
            auto& v = verts[pack_vertex(e0.x, e0.y)];
            if (v.consumed_mask & (1u << dir_index(e0.dx, e0.dy))) continue;
        }
        std::vector<Pt> loop;
        EdgeKey e = e0;
        do {
            auto& v = verts[pack_vertex(e.x, e.y)];
            v.consumed_mask |= static_cast<uint8_t>(1u << dir_index(e.dx, e.dy));
            loop.push_back(Pt{static_cast<double>(e.x), static_cast<double>(e.y)});
            int32_t nx = e.x + e.dx;
            int32_t ny = e.y + e.dy;
            // successor: prefer left turn, then straight, then right turn
            const int candidates[3][2] = {
                {e.dy, -e.dx},  // left (screen coords, y down)
                {e.dx, e.dy},   // straight
                {-e.dy, e.dx},  // right
            };
            const auto& nv = verts[pack_vertex(nx, ny)];
            EdgeKey next{};
            bool found = false;
            for (const auto& c : candidates) {
                if (nv.out_mask & (1u << dir_index(c[0], c[1]))) {
                    next = {nx, ny, static_cast<int8_t>(c[0]), static_cast<int8_t>(c[1])};
                    found = true;
                    break;
                }
            }
            if (!found) throw NumericError("boundary trace broke at vertex " +
                                           std::to_string(nx) + "," + std::to_string(ny));
            e = next;
        } while (!(e == e0));

        // merge collinear runs (all edges are unit-length and axis-aligned,
        // so collinear means the incoming and outgoing direction match)
        std::vector<Pt> ring;
        size_t n = loop.size();
        for (size_t i = 0; i < n; ++i) {
            const Pt& prev = loop[(i + n - 1) % n];
            const Pt& cur = loop[i];
            const Pt& nxt = loop[(i + 1) % n];
            double in_dx = cur.x - prev.x, in_dy = cur.y - prev.y;
            double out_dx = nxt.x - cur.x, out_dy = nxt.y - cur.y;
            if (in_dx != out_dx || in_dy != out_dy) ring.push_back(cur);
        }
        loops.push_back(std::move(ring));
    }

    // the outer ring strictly contains every hole, so it has the largest
    // absolute area
    size_t best = 0;
    double best_area = -1.0;
    for (size_t i = 0; i < loops.size(); ++i) {
        double a = std::fabs(ring_signed_area(loops[i]));
        if (a > best_area) {
            best_area = a;
            best = i;
        }
    }
    outer = std::move(loops[best]);
    holes.clear();
    for (size_t i = 0; i < loops.size(); ++i)
        if (i != best) holes.push_back(std::move(loops[i]));
}

}  // namespace

std::vector<BuildingPolygon> polygonize(const Image& mask) {
    if (mask.channels != 1) throw DataError("polygonize expects a single-channel mask");
    const int w = mask.width, h = mask.height;
    std::vector<int> labels(static_cast<size_t>(w) * h, -1);
    std::vector<std::vector<std::pair<int, int>>> comp_pixels;

    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t idx = static_cast<size_t>(y) * w + x;
            if (mask.data[idx] == 0 || labels[idx] >= 0) continue;
            int comp = static_cast<int>(comp_pixels.size());
            comp_pixels.emplace_back();
            stack.clear();
            stack.emplace_back(x, y);
            labels[idx] = comp;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                comp_pixels[comp].emplace_back(cx, cy);
                const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                for (const auto& d : nb) {
                    int nx = cx + d[0], ny = cy + d[1];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    size_t nidx = static_cast<size_t>(ny) * w + nx;
                    if (mask.data[nidx] == 0 || labels[nidx] >= 0) continue;
                    labels[nidx] = comp;
                    stack.emplace_back(nx, ny);
                }
            }
        }
    }

    std::vector<BuildingPolygon> polys(comp_pixels.size());
    for (size_t c = 0; c < comp_pixels.size(); ++c) {
        polys[c].area_px = static_cast<long>(comp_pixels[c].size());
        trace_component(labels, w, h, static_cast<int>(c), comp_pixels[c], polys[c].ring,
                        polys[c].holes);
    }
    return polys;
}

std::vector<BuildingPolygon> polygonize(const Image& mask, TileId tile, int tile_pixels) {
    auto polys = polygonize(mask);
    TileBounds tb = tile_bounds(tile, tile_pixels);
    // mask resolution may differ from the metadata resolution
    double scale = tb.meters_per_pixel * tile_pixels / std::max(1, mask.width);
    for (auto& p : polys) {
        p.tile = tile;
        p.area_m2 = static_cast<double>(p.area_px) * scale * scale;
    }
    return polys;
}

Image rasterize_buildings(const std::vector<BuildingPolygon>& polys, int size) {
    Image img;
    img.width = size;
    img.height = size;
    img.channels = 1;
    img.data.assign(static_cast<size_t>(size) * size, 0);
    for (const auto& p : polys) {
        std::vector<std::vector<Pt>> rings;
        rings.push_back(p.ring);
        for (const auto& hole : p.holes) rings.push_back(hole);
        fill_rings_px(img, rings, Rgb{255, 255, 255});
    }
    return img;
}

TileVectorStats count_and_area(const std::vector<BuildingPolygon>& polys, int tile_size) {
    TileVectorStats s;
    s.count = static_cast<long>(polys.size());
    for (const auto& p : polys) s.total_area_px += p.area_px;
    double denom = static_cast<double>(tile_size) * tile_size;
    s.site_cover = denom > 0 ? static_cast<double>(s.total_area_px) / denom : 0.0;
    return s;
}

namespace {

double point_segment_dist(const Pt& p, const Pt& a, const Pt& b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

void dp_simplify(const std::vector<Pt>& pts, size_t lo, size_t hi, double tol,
                 std::vector<char>& keep) {
    if (hi <= lo + 1) return;
    double worst = -1.0;
    size_t worst_i = lo;
    for (size_t i = lo + 1; i < hi; ++i) {
        double d = point_segment_dist(pts[i], pts[lo], pts[hi]);
        if (d > worst) {
            worst = d;
            worst_i = i;
        }
    }
    if (worst > tol) {
        keep[worst_i] = 1;
        dp_simplify(pts, lo, worst_i, tol, keep);
        dp_simplify(pts, worst_i, hi, tol, keep);
    }
}

}  // namespace

std::vector<Pt> simplify_ring(const std::vector<Pt>& ring, double tolerance) {
    if (tolerance <= 0 || ring.size() <= 4) return ring;
    // anchor the ring at its first vertex and the vertex farthest from it
    size_t far_i = 0;
    double far_d = -1.0;
    for (size_t i = 1; i < ring.size(); ++i) {
        double dx = ring[i].x - ring[0].x, dy = ring[i].y - ring[0].y;
        double d = dx * dx + dy * dy;
        if (d > far_d) {
            far_d = d;
            far_i = i;
        }
    }
    std::vector<char> keep(ring.size() + 1, 0);
    std::vector<Pt> closed = ring;
    closed.push_back(ring[0]);
    keep[0] = keep[far_i] = keep[ring.size()] = 1;
    dp_simplify(closed, 0, far_i, tolerance, keep);
    dp_simplify(closed, far_i, ring.size(), tolerance, keep);
    std::vector<Pt> out;
    for (size_t i = 0; i < ring.size(); ++i)
        if (keep[i]) out.push_back(ring[i]);
    if (out.size() < 3) return ring;
    return out;
}

std::string export_polygons(const std::vector<BuildingPolygon>& polys, int tile_pixels,
                            bool wgs84, double simplify_tolerance) {
    nlohmann::ordered_json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = nlohmann::ordered_json::array();
    for (const auto& p : polys) {
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        nlohmann::ordered_json props;
        props["area_px"] = p.area_px;
        props["area_m2"] = p.area_m2;
        props["tile"] = p.tile.str();
        f["properties"] = std::move(props);

        auto ring_coords = [&](const std::vector<Pt>& ring) {
            auto simplified = simplify_ring(ring, simplify_tolerance);
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            auto emit = [&](const Pt& v) {
                if (wgs84) {
                    double fx = p.tile.x + v.x / tile_pixels;
                    double fy = p.tile.y + v.y / tile_pixels;
                    arr.push_back({lon_of_fx(fx, p.tile.z), lat_of_fy(fy, p.tile.z)});
                } else {
                    arr.push_back({v.x, v.y});
                }
            };
            for (const auto& v : simplified) emit(v);
            emit(simplified.front());  // close the ring
            return arr;
        };

        nlohmann::ordered_json rings = nlohmann::ordered_json::array();
        rings.push_back(ring_coords(p.ring));
        for (const auto& hole : p.holes) rings.push_back(ring_coords(hole));
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", std::move(rings)}};
        fc["features"].push_back(std::move(f));
    }
    return fc.dump(2) + "\n";
}

}  // namespace geoforge
