#include "geoforge/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace geoforge {

double ring_signed_area(const std::vector<Pt>& ring) {
    double a = 0;
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Pt& p = ring[i];
        const Pt& q = ring[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return a / 2.0;
}

BBox geom_bbox(const std::vector<Pt>& pts) {
    BBox b{1e300, 1e300, -1e300, -1e300};
    for (const Pt& p : pts) {
        b.west = std::min(b.west, p.x);
        b.east = std::max(b.east, p.x);
        b.south = std::min(b.south, p.y);
        b.north = std::max(b.north, p.y);
    }
    return b;
}

bool clean_geometry(GeomKind kind, std::vector<Pt>& pts) {
    std::vector<Pt> out;
    out.reserve(pts.size());
    for (const Pt& p : pts) {
        if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
    if (kind == GeomKind::Polygon && out.size() > 1 && out.front() == out.back())
        out.pop_back();
    pts = std::move(out);
    switch (kind) {
        case GeomKind::Polygon:
            return pts.size() >= 3 && std::abs(ring_signed_area(pts)) > 0.0;
        case GeomKind::Polyline:
            return pts.size() >= 2;
        case GeomKind::Point:
            return pts.size() == 1;
    }
    return false;
}

namespace {

int orient(const Pt& a, const Pt& b, const Pt& c) {
    double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return (v > 0) - (v < 0);
}

bool on_segment(const Pt& a, const Pt& b, const Pt& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_cross(const Pt& a, const Pt& b, const Pt& c, const Pt& d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

}  // namespace

bool ring_self_intersects(const std::vector<Pt>& ring) {
    const size_t n = ring.size();
    if (n < 4) return false;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent segments (they share an endpoint by construction)
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_cross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
                return true;
        }
    }
    return false;
}

bool point_in_ring(const Pt& p, const std::vector<Pt>& ring) {
    bool inside = false;
    const size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Pt& a = ring[i];
        const Pt& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            inside = !inside;
    }
    return inside;
}

namespace {

bool point_in_bbox(const Pt& p, const BBox& b) {
    return p.x >= b.west && p.x <= b.east && p.y >= b.south && p.y <= b.north;
}

// Liang-Barsky style reject/accept for a segment against a rect.
bool segment_hits_bbox(const Pt& a, const Pt& b, const BBox& box) {
    double t0 = 0.0, t1 = 1.0;
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - box.west, box.east - a.x, a.y - box.south, box.north - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
        } else {
            double r = q[i] / p[i];
            if (p[i] < 0.0) {
                if (r > t1) return false;
                if (r > t0) t0 = r;
            } else {
                if (r < t0) return false;
                if (r < t1) t1 = r;
            }
        }
    }
    return true;
}

}  // namespace

bool geom_intersects_bbox(const GeoFeature& f, const BBox& box) {
    if (f.pts.empty()) return false;
    BBox gb = geom_bbox(f.pts);
    if (gb.west > box.east || gb.east < box.west || gb.south > box.north || gb.north < box.south)
        return false;
    if (f.kind == GeomKind::Point) return point_in_bbox(f.pts[0], box);

    for (const Pt& p : f.pts)
        if (point_in_bbox(p, box)) return true;
    const size_t n = f.pts.size();
    const size_t segs = (f.kind == GeomKind::Polygon) ? n : n - 1;
    for (size_t i = 0; i < segs; ++i)
        if (segment_hits_bbox(f.pts[i], f.pts[(i + 1) % n], box)) return true;
    if (f.kind == GeomKind::Polygon) {
        // polygon may fully contain the rect
        Pt corner{box.west, box.south};
        if (point_in_ring(corner, f.pts)) return true;
    }
    return false;
}

}  // namespace geoforge
