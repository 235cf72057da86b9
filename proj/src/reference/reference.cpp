#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linkcast/grid.hpp"

namespace linkcast::reference {

double law_of_cosines_km(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
    const double dlam = deg2rad(wrap_delta_lon(b.lon - a.lon));
    const double c = std::sin(phi1) * std::sin(phi2) +
                     std::cos(phi1) * std::cos(phi2) * std::cos(dlam);
    return kEarthRadiusKm * std::acos(std::clamp(c, -1.0, 1.0));
}

double numeric_bearing_deg(const GeoPoint& a, const GeoPoint& b,
                           double step_km) {
    // nudge a small step along the great circle toward b, then measure the
    // local direction on the equirectangular plane at a
    const double phi1 = deg2rad(a.lat), lam1 = deg2rad(a.lon);
    const double phi2 = deg2rad(b.lat), lam2 = deg2rad(b.lon);
    auto to_vec = [](double phi, double lam) {
        return std::array<double, 3>{std::cos(phi) * std::cos(lam),
                                     std::cos(phi) * std::sin(lam),
                                     std::sin(phi)};
    };
    const auto va = to_vec(phi1, lam1);
    const auto vb = to_vec(phi2, lam2);
    const double omega = std::acos(std::clamp(
        va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2], -1.0, 1.0));
    const double f = (step_km / kEarthRadiusKm) / omega;
    const double s1 = std::sin((1.0 - f) * omega) / std::sin(omega);
    const double s2 = std::sin(f * omega) / std::sin(omega);
    std::array<double, 3> v{s1 * va[0] + s2 * vb[0], s1 * va[1] + s2 * vb[1],
                            s1 * va[2] + s2 * vb[2]};
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    const double lat = rad2deg(std::asin(v[2] / norm));
    const double lon = rad2deg(std::atan2(v[1], v[0]));
    const double dy = lat - a.lat;
    const double dx = wrap_delta_lon(lon - a.lon) * std::cos(deg2rad(a.lat));
    double deg = rad2deg(std::atan2(dx, dy));
    if (deg < 0.0) deg += 360.0;
    return deg;
}

std::vector<int> brute_dbscan(const std::vector<GeoPoint>& points,
                              double eps_km, int min_samples) {
    const int n = static_cast<int>(points.size());
    constexpr int kUnvisited = -2, kNoiseLabel = -1;
    std::vector<int> labels(n, kUnvisited);

    auto neighbors = [&](int i) {
        std::vector<int> out;
        for (int j = 0; j < n; ++j)
            if (haversine_km(points[i], points[j]) <= eps_km) out.push_back(j);
        return out;
    };

    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (labels[i] != kUnvisited) continue;
        auto seeds = neighbors(i);
        if (static_cast<int>(seeds.size()) < min_samples) {
            labels[i] = kNoiseLabel;
            continue;
        }
        const int cluster = next++;
        labels[i] = cluster;
        for (size_t s = 0; s < seeds.size(); ++s) {
            const int j = seeds[s];
            if (labels[j] == kNoiseLabel) labels[j] = cluster;
            if (labels[j] != kUnvisited) continue;
            labels[j] = cluster;
            const auto nb = neighbors(j);
            if (static_cast<int>(nb.size()) >= min_samples)
                seeds.insert(seeds.end(), nb.begin(), nb.end());
        }
    }
    return labels;
}

Ring brute_hull(const std::vector<GeoPoint>& points) {
    const GeoPoint anchor = centroid_of(points);
    struct XY {
        double x, y;
        int idx;
    };
    std::vector<XY> v;
    for (size_t i = 0; i < points.size(); ++i) {
        const LocalXY l = to_local_km(points[i], anchor);
        v.push_back({l.x_km, l.y_km, static_cast<int>(i)});
    }

    // a point is a hull vertex iff some other point pair puts every point
    // strictly on one side; collect extreme points and order by angle
    const size_t n = v.size();
    std::vector<char> on_hull(n, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            bool all_left = true;
            for (size_t k = 0; k < n && all_left; ++k) {
                if (k == i || k == j) continue;
                const double cr = (v[j].x - v[i].x) * (v[k].y - v[i].y) -
                                  (v[j].y - v[i].y) * (v[k].x - v[i].x);
                if (cr <= 1e-9) all_left = false;
            }
            if (all_left) {
                on_hull[i] = 1;
                on_hull[j] = 1;
            }
        }
    }
    std::vector<XY> hull;
    for (size_t i = 0; i < n; ++i)
        if (on_hull[i]) hull.push_back(v[i]);
    if (hull.size() < 3) throw DegenerateCluster("brute_hull: degenerate");

    double cx = 0.0, cy = 0.0;
    for (const auto& p : hull) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(hull.size());
    cy /= static_cast<double>(hull.size());
    std::sort(hull.begin(), hull.end(), [&](const XY& a, const XY& b) {
        return std::atan2(a.y - cy, a.x - cx) < std::atan2(b.y - cy, b.x - cx);
    });

    Ring ring;
    for (const auto& p : hull) ring.push_back(points[static_cast<size_t>(p.idx)]);
    return ring;
}

bool brute_ring_contains(const Ring& ring, const GeoPoint& p) {
    if (ring.size() < 3) return false;
    const GeoPoint& anchor = ring.front();
    const double px = wrap_delta_lon(p.lon - anchor.lon);
    const double py = p.lat - anchor.lat;

    // on-edge first
    for (size_t i = 0; i < ring.size(); ++i) {
        const GeoPoint& a = ring[i];
        const GeoPoint& b = ring[(i + 1) % ring.size()];
        const double ax = wrap_delta_lon(a.lon - anchor.lon), ay = a.lat - anchor.lat;
        const double bx = wrap_delta_lon(b.lon - anchor.lon), by = b.lat - anchor.lat;
        const double cr = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
        if (std::fabs(cr) < 1e-12) {
            const double dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay);
            const double len2 = (bx - ax) * (bx - ax) + (by - ay) * (by - ay);
            if (dot >= -1e-12 && dot <= len2 + 1e-12) return true;
        }
    }

    // even-odd crossings of a ray going in +x
    int crossings = 0;
    for (size_t i = 0; i < ring.size(); ++i) {
        const GeoPoint& a = ring[i];
        const GeoPoint& b = ring[(i + 1) % ring.size()];
        const double ax = wrap_delta_lon(a.lon - anchor.lon), ay = a.lat - anchor.lat;
        const double bx = wrap_delta_lon(b.lon - anchor.lon), by = b.lat - anchor.lat;
        if ((ay > py) == (by > py)) continue;
        const double x_at = ax + (py - ay) / (by - ay) * (bx - ax);
        if (x_at > px) ++crossings;
    }
    return crossings % 2 == 1;
}

bool brute_region_contains(const Ring& outer, const std::vector<Ring>& holes,
                           const GeoPoint& p) {
    if (!brute_ring_contains(outer, p)) return false;
    for (const auto& hole : holes)
        if (brute_ring_contains(hole, p)) return false;
    return true;
}

std::vector<int> brute_knn(
    const std::vector<std::array<double, kFeatureDim>>& points,
    const std::array<double, kFeatureDim>& q, int k) {
    std::vector<std::pair<double, int>> d(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        double s = 0.0;
        for (int f = 0; f < kFeatureDim; ++f) {
            const double diff = points[i][f] - q[f];
            s += diff * diff;
        }
        d[i] = {s, static_cast<int>(i)};
    }
    const size_t kk = std::min(static_cast<size_t>(k), d.size());
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    std::vector<int> out;
    for (size_t i = 0; i < kk; ++i) out.push_back(d[i].second);
    return out;
}

double ScalarAdam::step(double theta, double grad, double lr,
                        double weight_decay) {
    t += 1;
    m = 0.9 * m + 0.1 * grad;
    v = 0.999 * v + 0.001 * grad * grad;
    const double m_hat = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
    const double v_hat = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
    return theta - lr * (m_hat / (std::sqrt(v_hat) + 1e-8) +
                         weight_decay * theta);
}

std::vector<double> finite_difference_gradients(
    nn::LstmParams& params, const std::function<double()>& loss, double h) {
    std::vector<double> grads;
    for (auto span : params.block.tensors()) {
        for (auto& value : span) {
            const double saved = value;
            value = saved + h;
            const double up = loss();
            value = saved - h;
            const double down = loss();
            value = saved;
            grads.push_back((up - down) / (2.0 * h));
        }
    }
    return grads;
}

double two_pass_rmse(const std::vector<int>& truth,
                     const std::vector<int>& predicted) {
    const double n = static_cast<double>(truth.size());
    double mean_sq = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
        const double d = static_cast<double>(predicted[i]) -
                         static_cast<double>(truth[i]);
        mean_sq += d * d / n;
    }
    return std::sqrt(mean_sq);
}

bool two_pass_pearson(const std::vector<int>& a, const std::vector<int>& b,
                      double& r) {
    const size_t n = a.size();
    if (n < 2) return false;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) /
                      static_cast<double>(n);
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) /
                      static_cast<double>(n);
    double cov = 0.0, sa = 0.0, sb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        sa += (a[i] - ma) * (a[i] - ma);
        sb += (b[i] - mb) * (b[i] - mb);
    }
    if (sa == 0.0 || sb == 0.0) return false;
    r = cov / (std::sqrt(sa) * std::sqrt(sb));
    return true;
}

std::map<std::string, GroupMeans> brute_cell_means(
    const std::vector<TelemetryRecord>& records,
    const std::map<std::string, GeoPoint>& anchors, double circumradius_km) {
    std::map<std::string, GroupMeans> acc;
    for (const auto& r : records) {
        if (r.beam_id.empty()) continue;
        const auto a = anchors.find(r.beam_id);
        if (a == anchors.end()) continue;
        const HexIndex cell = hex_index(r.position, a->second, circumradius_km);
        auto& g = acc[cell_key(r.beam_id, cell)];
        g.snr += r.snr_db;
        g.mir += r.mir_mbps;
        g.score += r.score;
        g.n += 1;
    }
    for (auto& [key, g] : acc) {
        g.snr /= static_cast<double>(g.n);
        g.mir /= static_cast<double>(g.n);
        g.score /= static_cast<double>(g.n);
    }
    return acc;
}

}  // namespace linkcast::reference
