#pragma once

// Density-based clustering over geographic points with the haversine metric.
// Cluster ids are assigned in order of discovery scanning points in input
// order; border points keep the first core cluster that reaches them, so
// identical inputs always produce identical labelings.

#include <vector>

#include "linkcast/geo.hpp"

namespace linkcast {

inline constexpr int kNoise = -1;

// Labels parallel to points: cluster id >= 0 or kNoise. A point is core iff
// at least min_samples points (itself included) lie within eps_km.
std::vector<int> dbscan(const std::vector<GeoPoint>& points, double eps_km,
                        int min_samples);

}  // namespace linkcast
