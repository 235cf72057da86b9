#pragma once

// End-to-end orchestration shared by the CLI and the test suites: dataset
// preparation (atlas, grid, rule table, featurized splits) and flight-plan
// ranking against a trained checkpoint.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "linkcast/atlas.hpp"
#include "linkcast/features.hpp"
#include "linkcast/grid.hpp"
#include "linkcast/nn.hpp"
#include "linkcast/rule.hpp"
#include "linkcast/telemetry.hpp"

namespace linkcast {

struct PrepareOptions {
    std::uint64_t seed = 42;
    double cell_radius_km = 50.0;
    ContourConfig contour;
    std::set<std::string> holidays = default_holidays();
    std::map<std::string, GeoPoint> beam_centers;  // empty: estimated
};

struct Prepared {
    HandoverAtlas atlas;
    PerformanceGrid grid;
    RuleTable rule;
    DatasetBundle bundle;
    // resampled telemetry per flight, aligned 1:1 with the bundle sequences
    std::vector<std::vector<TelemetryRecord>> resampled_train;
    std::vector<std::vector<TelemetryRecord>> resampled_val;
    std::vector<std::vector<TelemetryRecord>> resampled_test;
};

// Full preprocessing chain. Atlas, grid, rule table, vocabulary and
// normalization statistics are fitted on the training flights only.
Prepared prepare_dataset(const std::vector<TelemetryRecord>& records,
                         const std::vector<HandoverEvent>& events,
                         const PrepareOptions& options);

void save_prepared(const Prepared& prepared, const std::string& dir);
Prepared load_prepared(const std::string& dir);

// Beam with the nearest grid anchor; empty string when the grid is empty.
std::string nearest_beam(const PerformanceGrid& grid, const GeoPoint& p);

struct FlightPlan {
    std::string plan_id;
    std::string tail_id;
    long long departure_ts = 0;
    // waypoints with altitude in feet
    std::vector<std::pair<GeoPoint, double>> waypoints;
};

struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<FlightPlan> load_plans(const std::string& path);
void save_plans(const std::vector<FlightPlan>& plans, const std::string& path);

struct RankedPlan {
    std::string plan_id;
    double mean_score = 0.0;
    int min_score = 0;
    std::vector<int> scores;
};

// Synthesizes a 10-minute trajectory per plan, featurizes it with grid and
// atlas fallbacks, predicts with the checkpoint and ranks by descending
// mean predicted score, ties by higher minimum segment score then plan_id.
std::vector<RankedPlan> rank_plans(const std::vector<FlightPlan>& plans,
                                   const nn::Checkpoint& ckpt,
                                   const HandoverAtlas& atlas,
                                   const PerformanceGrid& grid,
                                   double cruise_speed_kmh = 900.0,
                                   const std::set<std::string>& holidays =
                                       default_holidays());

void save_ranked(const std::vector<RankedPlan>& ranked, const std::string& path);

}  // namespace linkcast
