#pragma once

// Serial reference implementations used as oracles by the tests and as the
// baseline side of the benchmark. Everything here is written independently
// of the library's accelerated paths: plain O(n^2) scans, direct formulas,
// finite differences. Never linked into the CLI.

#include <array>
#include <functional>
#include <vector>

#include "linkcast/features.hpp"
#include "linkcast/geo.hpp"
#include "linkcast/geometry.hpp"
#include "linkcast/nn.hpp"
#include "linkcast/telemetry.hpp"

namespace linkcast::reference {

// Spherical law of cosines; independent of the haversine route.
double law_of_cosines_km(const GeoPoint& a, const GeoPoint& b);

// Bearing by forward difference along the great circle toward b.
double numeric_bearing_deg(const GeoPoint& a, const GeoPoint& b,
                           double step_km = 0.05);

// O(n^2) DBSCAN with on-demand neighbor scans, same labeling semantics:
// clusters numbered in discovery order over the input, border points keep
// the first cluster that reaches them.
std::vector<int> brute_dbscan(const std::vector<GeoPoint>& points,
                              double eps_km, int min_samples);

// Convex hull by the all-pairs orientation test, CCW, computed in the
// local plane anchored at the centroid.
Ring brute_hull(const std::vector<GeoPoint>& points);

// Even-odd ray casting with an explicit on-edge test (edges contained).
bool brute_ring_contains(const Ring& ring, const GeoPoint& p);
// outer minus holes
bool brute_region_contains(const Ring& outer, const std::vector<Ring>& holes,
                           const GeoPoint& p);

// Exact k nearest neighbors by full scan, ties by lower index.
std::vector<int> brute_knn(
    const std::vector<std::array<double, kFeatureDim>>& points,
    const std::array<double, kFeatureDim>& q, int k);

// Scalar Adam with decoupled weight decay, one parameter.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    long long t = 0;
    double step(double theta, double grad, double lr, double weight_decay);
};

// Central finite differences of a scalar loss over every parameter.
std::vector<double> finite_difference_gradients(
    nn::LstmParams& params, const std::function<double()>& loss, double h);

// Two-pass RMSE (mean of squares route).
double two_pass_rmse(const std::vector<int>& truth,
                     const std::vector<int>& predicted);
// Pearson r via explicit covariance / sigma sigma; false on zero variance.
bool two_pass_pearson(const std::vector<int>& a, const std::vector<int>& b,
                      double& r);

// Group-by means over (beam, cell) keys for the grid oracle.
struct GroupMeans {
    double snr = 0.0, mir = 0.0, score = 0.0;
    long long n = 0;
};
std::map<std::string, GroupMeans> brute_cell_means(
    const std::vector<TelemetryRecord>& records,
    const std::map<std::string, GeoPoint>& anchors, double circumradius_km);

}  // namespace linkcast::reference
