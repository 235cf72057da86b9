#pragma once

// Planar polygon machinery for the handover atlas: convex hulls computed in
// the local-km plane, edge-inclusive containment, clipping to a convex ring
// and disc polygonization for degenerate clusters.
//
// Containment and clipping run in a wrapped (lon, lat) plane anchored at the
// ring; the equirectangular projection is linear in (lon, lat), so convexity,
// orientation and sidedness match the local-km plane exactly.

#include <stdexcept>
#include <vector>

#include "linkcast/geo.hpp"

namespace linkcast {

struct DegenerateCluster : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Open ring: consecutive vertices form edges, last connects back to first.
using Ring = std::vector<GeoPoint>;

// Arithmetic mean of latitudes and wrapped longitudes.
GeoPoint centroid_of(const std::vector<GeoPoint>& pts);

// Counterclockwise convex hull computed in the local-km plane anchored at
// the points' centroid; returns the input points that lie on the hull.
// Throws DegenerateCluster for fewer than 3 non-collinear points.
Ring convex_hull(const std::vector<GeoPoint>& pts);

// Regular polygon approximating a disc around center, CCW.
Ring disc_ring(const GeoPoint& center, double radius_km, int vertices = 24);

// Point-in-ring test; points on an edge count as contained.
bool ring_contains(const Ring& ring, const GeoPoint& p);

// True when every vertex of inner is contained in outer.
bool ring_inside(const Ring& inner, const Ring& outer);

// Sutherland-Hodgman clip of `ring` against the CCW convex ring `outer`.
// May return a ring with fewer than 3 vertices when nothing remains.
Ring clip_to_convex(const Ring& ring, const Ring& outer);

}  // namespace linkcast
