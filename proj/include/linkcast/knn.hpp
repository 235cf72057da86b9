#pragma once

// Exact k-nearest-neighbor classifier over per-timestep feature vectors,
// k = 3, Euclidean distance on normalized features, accelerated by a
// KD-tree with axis-cycling splits and median pivots. Tree queries return
// exactly the brute-force neighbor set; ties break on the lower insertion
// index.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkcast/features.hpp"

namespace linkcast {

struct TooFewPoints : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KnnNeighbor {
    double distance = 0.0;
    int index = 0;  // insertion index into the training points
    int label = 0;  // 1..10
};

class KnnIndex {
  public:
    static constexpr int kNeighbors = 3;

    // Flattens every timestep of every training flight into (point, label)
    // pairs and builds the tree. Throws TooFewPoints below 3 points.
    static KnnIndex build(const std::vector<FlightSequence>& train);
    static KnnIndex build_from_points(
        std::vector<std::array<double, kFeatureDim>> points,
        std::vector<int> labels);

    // Exact 3 nearest neighbors in ascending (distance, index) order.
    std::array<KnnNeighbor, kNeighbors> query(
        const std::array<double, kFeatureDim>& q) const;

    // Majority label among the 3 neighbors; a three-way tie resolves to the
    // nearest neighbor's label.
    int classify(const std::array<double, kFeatureDim>& q) const;

    std::vector<std::vector<int>> predict(
        const std::vector<FlightSequence>& sequences) const;

    size_t size() const { return points_.size(); }
    const std::vector<std::array<double, kFeatureDim>>& points() const {
        return points_;
    }
    const std::vector<int>& labels() const { return labels_; }

    void save(const std::string& path) const;
    static KnnIndex load(const std::string& path);  // tree rebuilt on load

  private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    void build_tree();
    int build_node(std::vector<int>& idx, int lo, int hi, int depth);

    std::vector<std::array<double, kFeatureDim>> points_;
    std::vector<int> labels_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace linkcast
