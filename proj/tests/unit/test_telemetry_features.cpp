#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "linkcast/features.hpp"
#include "linkcast/pipeline.hpp"

using namespace linkcast;
using testutil::make_flight;
using testutil::make_record;

TEST_CASE("record file round trip and malformed lines") {
    CHECK(read_records("/dev/null").empty());

    std::mt19937_64 rng(113);
    std::vector<TelemetryRecord> records;
    for (int i = 0; i < 1000; ++i) {
        auto r = make_record("F" + std::to_string(i / 50), 1704067200 + i,
                             30.0 + (rng() % 1000) / 100.0,
                             -110.0 + (rng() % 2000) / 100.0);
        r.snr_db = (rng() % 300) / 10.0;
        r.score = 1 + static_cast<int>(rng() % 10);
        records.push_back(std::move(r));
    }
    write_records(records, "test_records.jsonl");
    const auto loaded = read_records("test_records.jsonl");
    CHECK(loaded == records);

    std::ofstream bad("test_records_bad.jsonl");
    bad << R"({"timestamp":1,"flight_id":"F","tail_id":"T","origin_airport":"A",)"
        << R"("destination_airport":"B","lat":1.0,"lon":2.0,"altitude_ft":3,)"
        << R"("satellite_id":"S","beam_id":"b","snr_db":1,"mir_mbps":2,)"
        << R"("connected_devices":1,"score":11})" << "\n";
    bad.close();
    try {
        read_records("test_records_bad.jsonl");
        FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
        CHECK(e.line_no == 1);
    }
    std::filesystem::remove("test_records.jsonl");
    std::filesystem::remove("test_records_bad.jsonl");
}

TEST_CASE("flight grouping rejects non-increasing timestamps") {
    auto flight = make_flight("F0", 1704067200, 5);
    flight.push_back(flight.back());  // duplicate timestamp
    CHECK_THROWS_AS(group_by_flight(flight), MalformedRecord);
}

TEST_CASE("resampling keeps the 10-minute grid and the arrival record") {
    // 30 s cadence spanning 60 min: records at 0..3600 s
    const auto flight = make_flight("F0", 0, 121, 30);
    const auto kept = resample_10min(flight);
    REQUIRE(kept.size() == 7);
    for (int i = 0; i < 7; ++i) CHECK(kept[i].timestamp == i * 600);

    const auto single = resample_10min({flight[0]});
    REQUIRE(single.size() == 1);
    CHECK(single[0] == flight[0]);

    // already 10 minutes apart: everything kept
    std::vector<TelemetryRecord> sparse;
    for (int i = 0; i < 5; ++i)
        sparse.push_back(make_record("F1", i * 600, 38.0, -100.0 + 0.1 * i));
    CHECK(resample_10min(sparse).size() == 5);

    // an off-grid arrival is forced in
    const auto flight2 = make_flight("F2", 0, 130, 30);  // last at 3870 s
    const auto kept2 = resample_10min(flight2);
    CHECK(kept2.back().timestamp == 3870);
}

TEST_CASE("calendar features") {
    // 2024-07-04 12:00 UTC, a Thursday and a US holiday
    const CalendarFeatures july4 =
        calendar_features(1720094400, default_holidays());
    CHECK(july4.year == 2024);
    CHECK(july4.month == 7);
    CHECK(july4.day == 4);
    CHECK(july4.hour == 12);
    CHECK(july4.minute == 0);
    CHECK(july4.season_index == 2);
    CHECK(july4.holiday_index == 1);
    CHECK(july4.weekend_index == 0);

    // 2024-01-06 is a Saturday
    const CalendarFeatures jan6 =
        calendar_features(1704499200, default_holidays());
    CHECK(jan6.weekend_index == 1);
    CHECK(jan6.season_index == 0);

    // 2024-03-01 opens meteorological spring
    const CalendarFeatures mar1 =
        calendar_features(1709251200, default_holidays());
    CHECK(mar1.month == 3);
    CHECK(mar1.season_index == 1);

    // december is winter
    const CalendarFeatures dec25 =
        calendar_features(1735084800, default_holidays());
    CHECK(dec25.month == 12);
    CHECK(dec25.season_index == 0);
}

TEST_CASE("vocab codes: first-seen order, unknown, injective") {
    std::vector<TelemetryRecord> train;
    train.push_back(make_record("F0", 1, 38, -100, "B1", 14, 9, "TAIL_A"));
    train.push_back(make_record("F0", 2, 38, -100, "B2", 14, 9, "TAIL_A"));
    train.push_back(make_record("F1", 3, 38, -100, "B1", 14, 9, "TAIL_B"));
    const VocabSet vocab = build_vocab(train);

    CHECK(vocab.tail.encode("TAIL_A") == 1);
    CHECK(vocab.tail.encode("TAIL_B") == 2);
    CHECK(vocab.tail.encode("TAIL_Z") == 0);
    CHECK(vocab.beam.encode("B1") == 1);
    CHECK(vocab.beam.encode("B2") == 2);

    // injective over the fitted vocabulary
    std::set<int> codes;
    for (const auto& v : vocab.beam.ordered)
        CHECK(codes.insert(vocab.beam.encode(v)).second);
}

TEST_CASE("featurize endpoints and distance conservation") {
    // eastward flight, 10-minute cadence
    std::vector<TelemetryRecord> flight;
    for (int i = 0; i < 8; ++i)
        flight.push_back(
            make_record("F0", i * 600, 38.0, -100.0 + 0.4 * i, "SAT1-B0"));
    const HandoverAtlas atlas;  // empty: all probabilities 0
    const PerformanceGrid grid = build_grid(flight, 50.0);
    const AircraftStats aircraft{"T000", 8.0, 4.0, 3};
    const VocabSet vocab = build_vocab(flight);
    const FlightSequence seq = featurize_flight(flight, atlas, grid, aircraft,
                                                vocab, default_holidays());

    REQUIRE(seq.length() == 8);
    CHECK(seq.inputs.front()[kFDistSinceStart] == 0.0);
    CHECK(seq.inputs.front()[kFTimeSinceStart] == 0.0);
    CHECK(seq.inputs.back()[kFDistToDest] == doctest::Approx(0.0));
    CHECK(seq.inputs.back()[kFTimeToDest] == 0.0);

    const double total =
        seq.inputs.back()[kFDistSinceStart] + seq.inputs.back()[kFDistToDest];
    for (const auto& x : seq.inputs)
        CHECK(std::fabs(x[kFDistSinceStart] + x[kFDistToDest] - total) < 1e-6);

    // eastward heading near 90, and reserved slots are zero
    CHECK(seq.inputs[0][kFHeading] == doctest::Approx(90.0).epsilon(0.01));
    for (const auto& x : seq.inputs)
        for (int f = kFReservedFirst; f < kFeatureDim; ++f) CHECK(x[f] == 0.0);

    // labels recover scores
    for (size_t t = 0; t < seq.length(); ++t) {
        const auto label = seq.one_hot(t);
        double sum = 0.0;
        int arg = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            sum += label[c];
            if (label[c] == 1.0) arg = c + 1;
        }
        CHECK(sum == 1.0);
        CHECK(arg == seq.scores[t]);
    }

    CHECK_THROWS_AS(featurize_flight({flight[0]}, atlas, grid, aircraft, vocab,
                                     default_holidays()),
                    TooShortFlight);
}

TEST_CASE("min-max normalization") {
    FlightSequence a;
    a.flight_id = "A";
    a.inputs.resize(3);
    a.scores = {5, 5, 5};
    for (auto& x : a.inputs) x.fill(0.0);
    a.inputs[0][0] = 0.0;
    a.inputs[1][0] = 10.0;
    a.inputs[2][0] = 5.0;
    for (int t = 0; t < 3; ++t) a.inputs[t][1] = 7.7;  // constant feature

    const NormalizationStats stats = fit_minmax({a});
    FlightSequence b = a;
    apply_minmax(stats, b);
    CHECK(b.inputs[0][0] == 0.0);
    CHECK(b.inputs[1][0] == 1.0);
    CHECK(b.inputs[2][0] == 0.5);
    for (int t = 0; t < 3; ++t) CHECK(b.inputs[t][1] == 0.0);

    // out-of-range inference values are clamped
    FlightSequence c = a;
    c.inputs[0][0] = -5.0;
    c.inputs[1][0] = 25.0;
    apply_minmax(stats, c);
    CHECK(c.inputs[0][0] == 0.0);
    CHECK(c.inputs[1][0] == 1.0);

    // per-column min/max of normalized training data is 0/1
    FlightSequence norm = a;
    apply_minmax(stats, norm);
    double mn = 1e9, mx = -1e9;
    for (const auto& x : norm.inputs) {
        mn = std::min(mn, x[0]);
        mx = std::max(mx, x[0]);
    }
    CHECK(mn == 0.0);
    CHECK(mx == 1.0);
}

TEST_CASE("split sizes, determinism and partition") {
    CHECK_THROWS_AS(split_dataset(9, 1), TooFewFlights);

    const SplitIndices ten = split_dataset(10, 7);
    CHECK(ten.train.size() == 8);
    CHECK(ten.val.size() == 1);
    CHECK(ten.test.size() == 1);

    const SplitIndices a = split_dataset(100, 42);
    const SplitIndices b = split_dataset(100, 42);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);

    std::set<size_t> all;
    for (size_t i : a.train) all.insert(i);
    for (size_t i : a.val) all.insert(i);
    for (size_t i : a.test) all.insert(i);
    CHECK(all.size() == 100);
    CHECK(a.train.size() == 80);
    CHECK(a.val.size() == 10);
    CHECK(a.test.size() == 10);
}

TEST_CASE("prepare pipeline fits on train only and bundles round trip") {
    std::mt19937_64 rng(127);
    std::vector<TelemetryRecord> records;
    std::vector<HandoverEvent> events;
    for (int f = 0; f < 20; ++f) {
        const std::string fid = "F" + std::to_string(f);
        const std::string tail = "T" + std::to_string(f % 3);
        auto flight = make_flight(fid, 1704067200 + f * 20000, 60, 30,
                                  36.0 + (f % 5), -104.0 + f * 0.3, 0.01, tail,
                                  1 + static_cast<int>(rng() % 10));
        records.insert(records.end(), flight.begin(), flight.end());
        events.push_back({flight[30].position, HeadingQuadrant::NE,
                          HandoverKind::Satellite, flight[30].timestamp, fid});
    }

    PrepareOptions options;
    options.seed = 11;
    const Prepared prepared = prepare_dataset(records, events, options);
    CHECK(prepared.bundle.train.size() == 16);
    CHECK(prepared.bundle.val.size() == 2);
    CHECK(prepared.bundle.test.size() == 2);
    CHECK(prepared.resampled_test.size() == prepared.bundle.test.size());

    // atlas saw only training flights' events
    CHECK(prepared.atlas.source_event_count <= 16);

    // normalized training features are within [0, 1]
    for (const auto& s : prepared.bundle.train)
        for (const auto& x : s.inputs)
            for (double v : x) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }

    save_prepared(prepared, "test_bundle");
    const Prepared loaded = load_prepared("test_bundle");
    CHECK(loaded.bundle.vocab == prepared.bundle.vocab);
    CHECK(loaded.bundle.norm == prepared.bundle.norm);
    CHECK(loaded.bundle.split == prepared.bundle.split);
    REQUIRE(loaded.bundle.test.size() == prepared.bundle.test.size());
    for (size_t i = 0; i < loaded.bundle.test.size(); ++i) {
        CHECK(loaded.bundle.test[i].flight_id ==
              prepared.bundle.test[i].flight_id);
        CHECK(loaded.bundle.test[i].inputs == prepared.bundle.test[i].inputs);
        CHECK(loaded.bundle.test[i].scores == prepared.bundle.test[i].scores);
    }
    std::filesystem::remove_all("test_bundle");
}
