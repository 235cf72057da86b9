#include "linkcast/dbscan.hpp"

#include <deque>
#include <stdexcept>

namespace linkcast {

namespace {

std::vector<int> neighbors_of(const std::vector<GeoPoint>& pts, size_t i,
                              double eps_km) {
    std::vector<int> out;
    for (size_t j = 0; j < pts.size(); ++j)
        if (haversine_km(pts[i], pts[j]) <= eps_km)
            out.push_back(static_cast<int>(j));
    return out;
}

}  // namespace

std::vector<int> dbscan(const std::vector<GeoPoint>& points, double eps_km,
                        int min_samples) {
    if (!(eps_km > 0.0)) throw std::invalid_argument("dbscan: eps_km <= 0");
    if (min_samples < 1) throw std::invalid_argument("dbscan: min_samples < 1");

    const int n = static_cast<int>(points.size());
    if (n == 0) return {};

    // Parallel kernel: core flags from the O(n^2) neighbor counts. Each
    // entry is written by exactly one thread, so the result is independent
    // of scheduling.
    std::vector<char> core(n, 0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        int count = 0;
        for (int j = 0; j < n; ++j)
            if (haversine_km(points[i], points[j]) <= eps_km) ++count;
        core[i] = count >= min_samples ? 1 : 0;
    }

    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);
    int next_cluster = 0;

    for (int i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) continue;
        if (!core[i]) {
            labels[i] = kNoise;
            continue;
        }
        const int cluster = next_cluster++;
        labels[i] = cluster;
        std::deque<int> seeds;
        for (int j : neighbors_of(points, i, eps_km))
            if (j != i) seeds.push_back(j);
        while (!seeds.empty()) {
            const int j = seeds.front();
            seeds.pop_front();
            if (labels[j] == kNoise) labels[j] = cluster;  // border point
            if (labels[j] != kUnvisited) continue;
            labels[j] = cluster;
            if (core[j])
                for (int k : neighbors_of(points, j, eps_km))
                    seeds.push_back(k);
        }
    }
    return labels;
}

}  // namespace linkcast
