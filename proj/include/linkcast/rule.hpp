#pragma once

// Non-ML benchmark: each position maps to its hex cell's mean historical
// score (rounded half-to-even and clamped to 1..10); cells never traversed
// in training fall back to the global mean.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkcast/grid.hpp"
#include "linkcast/telemetry.hpp"

namespace linkcast {

struct EmptyTraining : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RuleTable {
    double circumradius_km = 50.0;
    std::map<std::string, GeoPoint> beam_anchors;
    std::map<std::string, double> cell_means;  // key "beam/q/r"
    double global_mean = 0.0;
};

RuleTable build_rule_table(
    const std::vector<TelemetryRecord>& train_records, double circumradius_km,
    const std::map<std::string, GeoPoint>& beam_centers = {});

// Half-to-even rounding clamped to [1, 10].
int round_score(double mean);

int predict_rule_at(const RuleTable& table, const GeoPoint& p,
                    const std::string& beam_id);

// One score per timestep per flight; flights given as resampled telemetry.
std::vector<std::vector<int>> predict_rule(
    const RuleTable& table,
    const std::vector<std::vector<TelemetryRecord>>& flights);

struct MalformedRuleFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void save_rule_table(const RuleTable& table, const std::string& path);
RuleTable load_rule_table(const std::string& path);

}  // namespace linkcast
