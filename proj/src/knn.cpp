#include "linkcast/knn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

using nlohmann::json;

namespace linkcast {

namespace {

double dist2(const std::array<double, kFeatureDim>& a,
             const std::array<double, kFeatureDim>& b) {
    double s = 0.0;
    for (int f = 0; f < kFeatureDim; ++f) {
        const double d = a[f] - b[f];
        s += d * d;
    }
    return s;
}

struct Candidate {
    double d2;
    int index;
    bool operator<(const Candidate& o) const {
        if (d2 != o.d2) return d2 < o.d2;
        return index < o.index;
    }
};

// fixed-capacity best-3 list, kept sorted ascending by (d2, index)
struct Best3 {
    Candidate c[3];
    int n = 0;

    bool full() const { return n == 3; }
    double worst_d2() const { return c[n - 1].d2; }

    void offer(const Candidate& cand) {
        if (full() && !(cand < c[2])) return;
        int pos = std::min(n, 2);
        while (pos > 0 && cand < c[pos - 1]) {
            c[pos] = c[pos - 1];
            --pos;
        }
        c[pos] = cand;
        if (n < 3) ++n;
    }
};

}  // namespace

KnnIndex KnnIndex::build(const std::vector<FlightSequence>& train) {
    std::vector<std::array<double, kFeatureDim>> points;
    std::vector<int> labels;
    for (const auto& s : train)
        for (size_t t = 0; t < s.length(); ++t) {
            points.push_back(s.inputs[t]);
            labels.push_back(s.scores[t]);
        }
    return build_from_points(std::move(points), std::move(labels));
}

KnnIndex KnnIndex::build_from_points(
    std::vector<std::array<double, kFeatureDim>> points,
    std::vector<int> labels) {
    if (points.size() != labels.size())
        throw std::invalid_argument("KnnIndex: points/labels size mismatch");
    if (points.size() < kNeighbors)
        throw TooFewPoints("KnnIndex: need at least 3 training points, got " +
                           std::to_string(points.size()));
    KnnIndex index;
    index.points_ = std::move(points);
    index.labels_ = std::move(labels);
    index.build_tree();
    return index;
}

void KnnIndex::build_tree() {
    nodes_.clear();
    nodes_.reserve(points_.size());
    std::vector<int> idx(points_.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    root_ = build_node(idx, 0, static_cast<int>(idx.size()), 0);
}

int KnnIndex::build_node(std::vector<int>& idx, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % kFeatureDim;
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi,
                     [this, axis](int a, int b) {
                         if (points_[a][axis] != points_[b][axis])
                             return points_[a][axis] < points_[b][axis];
                         return a < b;
                     });
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back({idx[mid], axis, -1, -1});
    const int left = build_node(idx, lo, mid, depth + 1);
    const int right = build_node(idx, mid + 1, hi, depth + 1);
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
}

std::array<KnnNeighbor, KnnIndex::kNeighbors> KnnIndex::query(
    const std::array<double, kFeatureDim>& q) const {
    Best3 best;
    // near side first, far side pruned by plane distance
    auto walk = [&](auto&& self, int node_id) -> void {
        if (node_id < 0) return;
        const Node& node = nodes_[static_cast<size_t>(node_id)];
        best.offer({dist2(q, points_[static_cast<size_t>(node.point)]),
                    node.point});
        const double delta =
            q[node.axis] - points_[static_cast<size_t>(node.point)][node.axis];
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        self(self, near);
        // equal plane distance can still hide an equal-distance neighbor
        // with a lower index, so prune strictly
        if (!best.full() || delta * delta <= best.worst_d2()) self(self, far);
    };
    walk(walk, root_);

    std::array<KnnNeighbor, kNeighbors> out{};
    for (int i = 0; i < kNeighbors; ++i) {
        out[i].distance = std::sqrt(best.c[i].d2);
        out[i].index = best.c[i].index;
        out[i].label = labels_[static_cast<size_t>(best.c[i].index)];
    }
    return out;
}

int KnnIndex::classify(const std::array<double, kFeatureDim>& q) const {
    const auto nb = query(q);
    if (nb[0].label == nb[1].label || nb[0].label == nb[2].label)
        return nb[0].label;
    if (nb[1].label == nb[2].label) return nb[1].label;
    return nb[0].label;  // all distinct: nearest wins
}

std::vector<std::vector<int>> KnnIndex::predict(
    const std::vector<FlightSequence>& sequences) const {
    std::vector<std::vector<int>> out(sequences.size());
    for (size_t i = 0; i < sequences.size(); ++i)
        out[i].resize(sequences[i].length());
    // flatten for a balanced parallel loop; slots are disjoint
    std::vector<std::pair<int, int>> jobs;
    for (size_t i = 0; i < sequences.size(); ++i)
        for (size_t t = 0; t < sequences[i].length(); ++t)
            jobs.emplace_back(static_cast<int>(i), static_cast<int>(t));
#pragma omp parallel for schedule(static)
    for (int j = 0; j < static_cast<int>(jobs.size()); ++j) {
        const auto [i, t] = jobs[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)][static_cast<size_t>(t)] =
            classify(sequences[static_cast<size_t>(i)]
                         .inputs[static_cast<size_t>(t)]);
    }
    return out;
}

void KnnIndex::save(const std::string& path) const {
    json root;
    root["k"] = kNeighbors;
    root["labels"] = labels_;
    json pts = json::array();
    for (const auto& p : points_) pts.push_back(p);
    root["points"] = std::move(pts);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump() << '\n';
}

KnnIndex KnnIndex::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    json root;
    in >> root;
    std::vector<std::array<double, kFeatureDim>> points;
    std::vector<int> labels;
    for (const auto& v : root.at("labels")) labels.push_back(v.get<int>());
    for (const auto& row : root.at("points")) {
        std::array<double, kFeatureDim> p{};
        for (int f = 0; f < kFeatureDim; ++f) p[f] = row.at(f).get<double>();
        points.push_back(p);
    }
    return build_from_points(std::move(points), std::move(labels));
}

}  // namespace linkcast
