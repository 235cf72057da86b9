#include <filesystem>
#include <random>

#include "doctest.h"
#include "linkcast/knn.hpp"
#include "reference.hpp"

using namespace linkcast;

namespace {

std::vector<std::array<double, kFeatureDim>> random_points(int n,
                                                           std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<std::array<double, kFeatureDim>> pts(n);
    for (auto& p : pts)
        for (auto& v : p) v = uni(rng);
    return pts;
}

}  // namespace

TEST_CASE("index size follows the flattened training timesteps") {
    std::vector<FlightSequence> train(2);
    train[0].inputs.resize(4);
    train[0].scores = {1, 2, 3, 4};
    train[1].inputs.resize(3);
    train[1].scores = {5, 6, 7};
    for (auto& s : train)
        for (auto& x : s.inputs) x.fill(0.5);
    const KnnIndex index = KnnIndex::build(train);
    CHECK(index.size() == 7);

    std::vector<FlightSequence> tiny(1);
    tiny[0].inputs.resize(2);
    tiny[0].scores = {1, 2};
    for (auto& x : tiny[0].inputs) x.fill(0.0);
    CHECK_THROWS_AS(KnnIndex::build(tiny), TooFewPoints);
}

TEST_CASE("querying an exact training point returns it at distance zero") {
    std::mt19937_64 rng(171);
    auto pts = random_points(50, rng);
    std::vector<int> labels(50, 5);
    const KnnIndex index = KnnIndex::build_from_points(pts, labels);
    const auto nb = index.query(pts[17]);
    CHECK(nb[0].index == 17);
    CHECK(nb[0].distance == 0.0);
    CHECK(nb[0].distance <= nb[1].distance);
    CHECK(nb[1].distance <= nb[2].distance);
}

TEST_CASE("duplicated training points appear as often as inserted") {
    std::mt19937_64 rng(173);
    auto pts = random_points(20, rng);
    pts[3] = pts[2];  // one duplicate
    std::vector<int> labels(20, 1);
    const KnnIndex index = KnnIndex::build_from_points(pts, labels);
    const auto nb = index.query(pts[2]);
    CHECK(nb[0].index == 2);
    CHECK(nb[1].index == 3);  // duplicate, tie broken by insertion index
    CHECK(nb[1].distance == 0.0);
}

TEST_CASE("tree search equals the brute-force scan") {
    std::mt19937_64 rng(179);
    const auto pts = random_points(2000, rng);
    std::vector<int> labels(pts.size());
    for (size_t i = 0; i < labels.size(); ++i)
        labels[i] = 1 + static_cast<int>(rng() % 10);
    const KnnIndex index = KnnIndex::build_from_points(pts, labels);

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int q = 0; q < 300; ++q) {
        std::array<double, kFeatureDim> query{};
        for (auto& v : query) v = uni(rng);
        const auto mine = index.query(query);
        const auto ref = reference::brute_knn(pts, query, 3);
        REQUIRE(ref.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(mine[i].index == ref[i]);
    }
}

TEST_CASE("majority vote and the all-distinct tie rule") {
    // three fixed points; the query sits nearest the second
    std::vector<std::array<double, kFeatureDim>> pts(3);
    for (auto& p : pts) p.fill(0.0);
    pts[0][0] = 0.30;
    pts[1][0] = 0.51;
    pts[2][0] = 0.80;

    std::array<double, kFeatureDim> q{};
    q[0] = 0.5;

    {
        const KnnIndex index = KnnIndex::build_from_points(pts, {7, 7, 2});
        CHECK(index.classify(q) == 7);
    }
    {
        const KnnIndex index = KnnIndex::build_from_points(pts, {3, 5, 9});
        CHECK(index.classify(q) == 5);  // nearest neighbor breaks the tie
    }
    {
        const KnnIndex index = KnnIndex::build_from_points(pts, {9, 5, 9});
        CHECK(index.classify(q) == 9);  // pair beats the nearest singleton
    }
}

TEST_CASE("sequence predictions equal brute-force classification") {
    std::mt19937_64 rng(181);
    const auto pts = random_points(5000, rng);
    std::vector<int> labels(pts.size());
    for (size_t i = 0; i < labels.size(); ++i)
        labels[i] = 1 + static_cast<int>(rng() % 10);
    const KnnIndex index = KnnIndex::build_from_points(pts, labels);

    std::vector<FlightSequence> test(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto& s : test) {
        s.inputs.resize(40);
        s.scores.assign(40, 1);
        for (auto& x : s.inputs)
            for (auto& v : x) v = uni(rng);
    }
    const auto pred = index.predict(test);
    for (size_t i = 0; i < test.size(); ++i) {
        for (size_t t = 0; t < test[i].inputs.size(); ++t) {
            const auto nb = reference::brute_knn(pts, test[i].inputs[t], 3);
            const int l0 = labels[static_cast<size_t>(nb[0])];
            const int l1 = labels[static_cast<size_t>(nb[1])];
            const int l2 = labels[static_cast<size_t>(nb[2])];
            int expect = l0;
            if (l0 == l1 || l0 == l2)
                expect = l0;
            else if (l1 == l2)
                expect = l1;
            CHECK(pred[i][t] == expect);
        }
    }
    // repeated prediction is identical
    CHECK(index.predict(test) == pred);
}

TEST_CASE("index file round trip rebuilds an equivalent tree") {
    std::mt19937_64 rng(191);
    const auto pts = random_points(500, rng);
    std::vector<int> labels(pts.size());
    for (size_t i = 0; i < labels.size(); ++i)
        labels[i] = 1 + static_cast<int>(rng() % 10);
    const KnnIndex index = KnnIndex::build_from_points(pts, labels);
    index.save("test_knn.json");
    const KnnIndex loaded = KnnIndex::load("test_knn.json");
    CHECK(loaded.size() == index.size());

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int q = 0; q < 50; ++q) {
        std::array<double, kFeatureDim> query{};
        for (auto& v : query) v = uni(rng);
        const auto a = index.query(query);
        const auto b = loaded.query(query);
        for (int i = 0; i < 3; ++i) {
            CHECK(a[i].index == b[i].index);
            CHECK(a[i].distance == b[i].distance);
        }
    }
    std::filesystem::remove("test_knn.json");
}
