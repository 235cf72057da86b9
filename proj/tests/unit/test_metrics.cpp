#include <filesystem>
#include <random>

#include "doctest.h"
#include "linkcast/metrics.hpp"
#include "reference.hpp"

using namespace linkcast;

TEST_CASE("confusion matrix construction") {
    const std::vector<int> truth = {1, 2, 3, 10};
    const std::vector<int> perfect = truth;
    const Confusion diag = confusion_matrix(truth, perfect);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            CHECK(diag[i][j] == ((i == j && (i < 3 || i == 9)) ? 1 : 0));

    const Confusion single = confusion_matrix({9}, {10});
    CHECK(single[8][9] == 1);

    // row sums equal true-class counts
    std::mt19937_64 rng(211);
    std::vector<int> t(500), p(500);
    std::array<long long, 10> counts{};
    for (int i = 0; i < 500; ++i) {
        t[i] = 1 + static_cast<int>(rng() % 10);
        p[i] = 1 + static_cast<int>(rng() % 10);
        ++counts[t[i] - 1];
    }
    const Confusion m = confusion_matrix(t, p);
    for (int i = 0; i < 10; ++i) {
        long long row = 0;
        for (int j = 0; j < 10; ++j) row += m[i][j];
        CHECK(row == counts[i]);
    }

    CHECK_THROWS_AS(confusion_matrix({1, 2}, {1}), LengthMismatch);
    CHECK_THROWS_AS(confusion_matrix({0}, {1}), OutOfRange);
    CHECK_THROWS_AS(confusion_matrix({1}, {11}), OutOfRange);
}

TEST_CASE("weighted precision recall f1 on fixtures") {
    Confusion diag(10, std::vector<long long>(10, 0));
    for (int i = 0; i < 10; ++i) diag[i][i] = 5;
    const Prf perfect = weighted_prf(diag);
    CHECK(perfect.precision_pct == doctest::Approx(100.0));
    CHECK(perfect.recall_pct == doctest::Approx(100.0));
    CHECK(perfect.f1_pct == doctest::Approx(100.0));

    // two active classes with counts [[8,2],[3,7]]
    Confusion two(10, std::vector<long long>(10, 0));
    two[0][0] = 8;
    two[0][1] = 2;
    two[1][0] = 3;
    two[1][1] = 7;
    const Prf prf = weighted_prf(two);
    const double p1 = 8.0 / 11.0, p2 = 7.0 / 9.0;
    const double r1 = 0.8, r2 = 0.7;
    const double f1 = 2 * p1 * r1 / (p1 + r1), f2 = 2 * p2 * r2 / (p2 + r2);
    CHECK(prf.precision_pct ==
          doctest::Approx(100.0 * (10 * p1 + 10 * p2) / 20.0).epsilon(1e-12));
    CHECK(prf.recall_pct ==
          doctest::Approx(100.0 * (10 * r1 + 10 * r2) / 20.0).epsilon(1e-12));
    CHECK(prf.f1_pct ==
          doctest::Approx(100.0 * (10 * f1 + 10 * f2) / 20.0).epsilon(1e-12));

    CHECK_THROWS_AS(weighted_prf(Confusion(10, std::vector<long long>(10, 0))),
                    EmptyMatrix);
}

TEST_CASE("weighted recall equals accuracy exactly on random matrices") {
    std::mt19937_64 rng(223);
    for (int round = 0; round < 100; ++round) {
        Confusion m(10, std::vector<long long>(10, 0));
        const int entries = 1 + static_cast<int>(rng() % 400);
        for (int e = 0; e < entries; ++e)
            ++m[rng() % 10][rng() % 10];
        CHECK(weighted_prf(m).recall_pct == accuracy_pct(m));
    }
}

TEST_CASE("rmse fixtures and independent formula") {
    CHECK(rmse_scores({1, 5, 9}, {1, 5, 9}) == 0.0);
    CHECK(rmse_scores({1, 5, 9}, {2, 6, 10}) == 1.0);

    std::mt19937_64 rng(227);
    std::vector<int> t(400), p(400);
    for (int i = 0; i < 400; ++i) {
        t[i] = 1 + static_cast<int>(rng() % 10);
        p[i] = 1 + static_cast<int>(rng() % 10);
    }
    CHECK(std::fabs(rmse_scores(t, p) - reference::two_pass_rmse(t, p)) < 1e-12);
    CHECK_THROWS_AS(rmse_scores({1}, {1, 2}), LengthMismatch);
}

TEST_CASE("within-k rates") {
    CHECK(within_k_rate({3, 4, 5}, {3, 4, 5}, 1) == 100.0);
    CHECK(within_k_rate({3, 3, 3}, {5, 5, 1}, 1) == 0.0);
    const std::vector<int> t = {5, 5, 5, 5, 5, 5, 5, 5, 5, 5};
    const std::vector<int> p = {5, 6, 4, 5, 6, 4, 8, 9, 2, 1};
    CHECK(within_k_rate(t, p, 1) == 60.0);
}

TEST_CASE("pearson correlation fixtures and oracle") {
    const std::vector<int> up = {1, 3, 5, 7, 9};
    std::vector<int> down(up.size());
    for (size_t i = 0; i < up.size(); ++i) down[i] = 11 - up[i];
    double r = 0.0;
    REQUIRE(pearson(up, up, r));
    CHECK(r == doctest::Approx(1.0));
    REQUIRE(pearson(up, down, r));
    CHECK(r == doctest::Approx(-1.0));

    std::mt19937_64 rng(229);
    std::vector<int> a(300), b(300);
    for (int i = 0; i < 300; ++i) {
        a[i] = 1 + static_cast<int>(rng() % 10);
        b[i] = 1 + static_cast<int>(rng() % 10);
    }
    double mine = 0.0, ref = 0.0;
    REQUIRE(pearson(a, b, mine));
    REQUIRE(reference::two_pass_pearson(a, b, ref));
    CHECK(std::fabs(mine - ref) < 1e-12);

    // zero-variance sequences are excluded with a count
    const CorrelationSummary summary = per_flight_correlation(
        {{1, 2, 3}, {5, 5, 5}, {2, 4, 6}}, {{1, 2, 3}, {1, 2, 3}, {6, 4, 2}});
    CHECK(summary.r_values.size() == 2);
    CHECK(summary.excluded_flat_sequences == 1);
    CHECK(summary.r_values[0] == doctest::Approx(1.0));
    CHECK(summary.r_values[1] == doctest::Approx(-1.0));
}

TEST_CASE("correlation histogram bins the full range") {
    const CorrelationHistogram h =
        histogram_correlations({-1.0, -0.95, 0.0, 0.5, 0.999, 1.0});
    REQUIRE(h.edges.size() == 21);
    REQUIRE(h.counts.size() == 20);
    CHECK(h.counts[0] == 2);    // -1.0 and -0.95
    CHECK(h.counts[10] == 1);   // 0.0 lands in [0.0, 0.1)
    CHECK(h.counts[19] == 2);   // 0.999 and the inclusive 1.0
    long long total = 0;
    for (long long c : h.counts) total += c;
    CHECK(total == 6);
}

TEST_CASE("evaluate_model with oracle and constant predictors") {
    const FlightScores truth = {{10, 10, 3, 10}, {10, 2, 10, 10, 10}};

    const EvalReport oracle =
        evaluate_model("oracle", truth, [&] { return truth; });
    CHECK(oracle.accuracy_pct == 100.0);
    CHECK(oracle.recall_pct == 100.0);
    CHECK(oracle.rmse == 0.0);
    CHECK(oracle.within_k_pct == 100.0);
    CHECK(oracle.timesteps == 9);
    CHECK(oracle.flights == 2);

    FlightScores constant = truth;
    for (auto& f : constant)
        for (auto& s : f) s = 10;
    const EvalReport c10 =
        evaluate_model("constant", truth, [&] { return constant; });
    CHECK(c10.accuracy_pct == doctest::Approx(100.0 * 7.0 / 9.0));

    // report JSON round trip
    save_report(c10, "test_report.json");
    const EvalReport loaded = load_report("test_report.json");
    CHECK(loaded.model == c10.model);
    CHECK(loaded.accuracy_pct == c10.accuracy_pct);
    CHECK(loaded.rmse == c10.rmse);
    CHECK(loaded.confusion == c10.confusion);
    CHECK(loaded.correlation_histogram.counts ==
          c10.correlation_histogram.counts);
    CHECK(loaded.timing_seconds == c10.timing_seconds);
    std::filesystem::remove("test_report.json");
}

TEST_CASE("metrics are invariant to flight ordering") {
    const FlightScores truth = {{1, 2, 3}, {9, 10}, {5, 5, 6, 7}};
    const FlightScores pred = {{1, 3, 3}, {10, 10}, {5, 4, 6, 9}};
    const EvalReport fwd = evaluate_model("a", truth, [&] { return pred; });

    FlightScores truth_r(truth.rbegin(), truth.rend());
    FlightScores pred_r(pred.rbegin(), pred.rend());
    const EvalReport rev = evaluate_model("a", truth_r, [&] { return pred_r; });
    CHECK(fwd.accuracy_pct == rev.accuracy_pct);
    CHECK(fwd.rmse == rev.rmse);
    CHECK(fwd.precision_pct == rev.precision_pct);
    CHECK(fwd.within_k_pct == rev.within_k_pct);
    CHECK(fwd.confusion == rev.confusion);
}
