#include "linkcast/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace linkcast {

namespace {

struct XY {
    double x, y;
};

// cross product of (b-a) x (c-a)
double cross(const XY& a, const XY& b, const XY& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// Plane used for containment/clipping: wrapped degrees around an anchor.
XY plane_xy(const GeoPoint& p, const GeoPoint& anchor) {
    return {wrap_delta_lon(p.lon - anchor.lon), p.lat - anchor.lat};
}

constexpr double kCollinearEpsKm2 = 1e-9;   // local-km plane
constexpr double kOnEdgeEpsDeg = 1e-12;     // wrapped-degree plane

bool on_segment(const XY& p, const XY& a, const XY& b) {
    const double cr = cross(a, b, p);
    if (std::fabs(cr) > kOnEdgeEpsDeg) return false;
    const double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    return dot >= -kOnEdgeEpsDeg && dot <= len2 + kOnEdgeEpsDeg;
}

}  // namespace

GeoPoint centroid_of(const std::vector<GeoPoint>& pts) {
    if (pts.empty()) throw std::invalid_argument("centroid_of: empty input");
    const double ref_lon = pts.front().lon;
    double lat = 0.0, dlon = 0.0;
    for (const auto& p : pts) {
        lat += p.lat;
        dlon += wrap_delta_lon(p.lon - ref_lon);
    }
    const double n = static_cast<double>(pts.size());
    return GeoPoint(lat / n, normalize_lon(ref_lon + dlon / n));
}

Ring convex_hull(const std::vector<GeoPoint>& pts) {
    if (pts.size() < 3)
        throw DegenerateCluster("convex_hull: fewer than 3 points");

    const GeoPoint anchor = centroid_of(pts);
    struct Proj {
        XY xy;
        int idx;
    };
    std::vector<Proj> v(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        const LocalXY l = to_local_km(pts[i], anchor);
        v[i] = {{l.x_km, l.y_km}, static_cast<int>(i)};
    }
    std::sort(v.begin(), v.end(), [](const Proj& a, const Proj& b) {
        if (a.xy.x != b.xy.x) return a.xy.x < b.xy.x;
        if (a.xy.y != b.xy.y) return a.xy.y < b.xy.y;
        return a.idx < b.idx;
    });
    v.erase(std::unique(v.begin(), v.end(),
                        [](const Proj& a, const Proj& b) {
                            return a.xy.x == b.xy.x && a.xy.y == b.xy.y;
                        }),
            v.end());

    const size_t n = v.size();
    if (n < 3) throw DegenerateCluster("convex_hull: degenerate point set");

    // monotone chain, strict turns so collinear points are dropped
    std::vector<int> hull;  // indices into v
    hull.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2 &&
               cross(v[hull[hull.size() - 2]].xy, v[hull.back()].xy,
                     v[i].xy) <= kCollinearEpsKm2)
            hull.pop_back();
        hull.push_back(static_cast<int>(i));
    }
    const size_t lower = hull.size() + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (hull.size() >= lower &&
               cross(v[hull[hull.size() - 2]].xy, v[hull.back()].xy,
                     v[i].xy) <= kCollinearEpsKm2)
            hull.pop_back();
        hull.push_back(static_cast<int>(i));
    }
    hull.pop_back();  // last point equals first

    if (hull.size() < 3)
        throw DegenerateCluster("convex_hull: all points collinear");

    Ring ring;
    ring.reserve(hull.size());
    for (int i : hull) ring.push_back(pts[v[i].idx]);
    return ring;
}

Ring disc_ring(const GeoPoint& center, double radius_km, int vertices) {
    Ring ring;
    ring.reserve(vertices);
    for (int j = 0; j < vertices; ++j) {
        const double theta = 2.0 * kPi * j / vertices;
        ring.push_back(from_local_km(
            {radius_km * std::cos(theta), radius_km * std::sin(theta)},
            center));
    }
    return ring;
}

bool ring_contains(const Ring& ring, const GeoPoint& p) {
    if (ring.size() < 3) return false;
    const GeoPoint& anchor = ring.front();
    const XY q = plane_xy(p, anchor);

    std::vector<XY> v(ring.size());
    for (size_t i = 0; i < ring.size(); ++i) v[i] = plane_xy(ring[i], anchor);

    bool inside = false;
    for (size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const XY& a = v[j];
        const XY& b = v[i];
        if (on_segment(q, a, b)) return true;
        if ((b.y > q.y) != (a.y > q.y)) {
            const double xint = b.x + (q.y - b.y) / (a.y - b.y) * (a.x - b.x);
            if (q.x < xint) inside = !inside;
        }
    }
    return inside;
}

bool ring_inside(const Ring& inner, const Ring& outer) {
    for (const auto& p : inner)
        if (!ring_contains(outer, p)) return false;
    return true;
}

Ring clip_to_convex(const Ring& ring, const Ring& outer) {
    if (ring.empty() || outer.size() < 3) return {};
    const GeoPoint anchor = outer.front();

    std::vector<XY> subject(ring.size());
    for (size_t i = 0; i < ring.size(); ++i)
        subject[i] = plane_xy(ring[i], anchor);
    std::vector<XY> clip(outer.size());
    for (size_t i = 0; i < outer.size(); ++i)
        clip[i] = plane_xy(outer[i], anchor);

    std::vector<XY> out = subject;
    for (size_t i = 0; i < clip.size() && !out.empty(); ++i) {
        const XY& ca = clip[i];
        const XY& cb = clip[(i + 1) % clip.size()];
        std::vector<XY> in;
        in.swap(out);
        for (size_t j = 0; j < in.size(); ++j) {
            const XY& a = in[j];
            const XY& b = in[(j + 1) % in.size()];
            const double sa = cross(ca, cb, a);
            const double sb = cross(ca, cb, b);
            const bool ina = sa >= 0.0;
            const bool inb = sb >= 0.0;
            if (ina) out.push_back(a);
            if (ina != inb) {
                const double t = sa / (sa - sb);
                out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
            }
        }
    }

    Ring result;
    result.reserve(out.size());
    for (const auto& xy : out)
        result.push_back(GeoPoint(anchor.lat + xy.y,
                                  normalize_lon(anchor.lon + xy.x)));
    return result;
}

}  // namespace linkcast
