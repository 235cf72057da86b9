// Benchmark comparing the parallel kernels against their serial reference
// implementations: DBSCAN neighbor kernel vs the O(n^2) on-demand scan,
// KD-tree KNN vs the brute-force scan, and the batched LSTM forward pass
// at the configured thread count vs a single thread.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "linkcast/dbscan.hpp"
#include "linkcast/knn.hpp"
#include "linkcast/nn.hpp"
#include "reference.hpp"

using namespace linkcast;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<GeoPoint> random_points(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> lat(30.0, 45.0);
    std::uniform_real_distribution<double> lon(-110.0, -80.0);
    std::vector<GeoPoint> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back(GeoPoint(lat(rng), lon(rng)));
    return pts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"parallel kernels vs serial references"};
    int dbscan_n = 2500;
    int knn_points = 20000, knn_queries = 1000;
    int lstm_batch = 64, lstm_t = 20;
    app.add_option("--dbscan-n", dbscan_n, "points for the DBSCAN comparison");
    app.add_option("--knn-points", knn_points, "index size");
    app.add_option("--knn-queries", knn_queries, "query count");
    app.add_option("--lstm-batch", lstm_batch, "forward-pass batch size");
    app.add_option("--lstm-t", lstm_t, "forward-pass timesteps");
    CLI11_PARSE(app, argc, argv);

    std::mt19937_64 rng(7);

#ifdef _OPENMP
    std::printf("openmp threads: %d\n\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n\n");
#endif
    std::printf("%-28s %12s %12s %8s\n", "kernel", "parallel(s)", "serial(s)",
                "speedup");

    {
        const auto pts = random_points(dbscan_n, rng);
        double t0 = now_s();
        const auto labels = dbscan(pts, 40.0, 5);
        double t1 = now_s();
        const auto ref = reference::brute_dbscan(pts, 40.0, 5);
        double t2 = now_s();
        const bool same = labels == ref;
        std::printf("%-28s %12.3f %12.3f %8.2f  %s\n", "dbscan", t1 - t0,
                    t2 - t1, (t2 - t1) / std::max(1e-9, t1 - t0),
                    same ? "labels match" : "LABEL MISMATCH");
    }

    {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<std::array<double, kFeatureDim>> points(knn_points);
        std::vector<int> labels(knn_points, 1);
        for (auto& p : points)
            for (auto& v : p) v = uni(rng);
        std::vector<std::array<double, kFeatureDim>> queries(knn_queries);
        for (auto& q : queries)
            for (auto& v : q) v = uni(rng);

        const KnnIndex index =
            KnnIndex::build_from_points(points, labels);
        double t0 = now_s();
        long long checksum = 0;
        for (const auto& q : queries) checksum += index.query(q)[0].index;
        double t1 = now_s();
        long long ref_checksum = 0;
        for (const auto& q : queries)
            ref_checksum += reference::brute_knn(points, q, 3)[0];
        double t2 = now_s();
        std::printf("%-28s %12.3f %12.3f %8.2f  %s\n", "knn query (tree)",
                    t1 - t0, t2 - t1, (t2 - t1) / std::max(1e-9, t1 - t0),
                    checksum == ref_checksum ? "results match"
                                             : "RESULT MISMATCH");
    }

    {
        nn::LstmConfig cfg;
        const nn::LstmParams params = nn::LstmParams::init(cfg, 11);
        std::vector<FlightSequence> seqs(lstm_batch);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (auto& s : seqs) {
            s.inputs.resize(lstm_t);
            s.scores.assign(lstm_t, 10);
            for (auto& x : s.inputs)
                for (auto& v : x) v = uni(rng);
        }
        std::vector<const FlightSequence*> ptrs;
        for (const auto& s : seqs) ptrs.push_back(&s);
        const nn::Batch batch = nn::Batch::from_sequences(ptrs);

        double t0 = now_s();
        auto probs = nn::forward(params, batch, nn::Mode::Eval);
        double t1 = now_s();
#ifdef _OPENMP
        const int threads = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        double t2 = now_s();
        auto probs1 = nn::forward(params, batch, nn::Mode::Eval);
        double t3 = now_s();
#ifdef _OPENMP
        omp_set_num_threads(threads);
#endif
        const bool same = probs == probs1;  // thread count must not change bits
        std::printf("%-28s %12.3f %12.3f %8.2f  %s\n", "lstm forward",
                    t1 - t0, t3 - t2, (t3 - t2) / std::max(1e-9, t1 - t0),
                    same ? "bitwise equal" : "BIT MISMATCH");
    }
    return 0;
}
