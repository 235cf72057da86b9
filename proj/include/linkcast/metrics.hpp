#pragma once

// Evaluation suite: confusion matrices, support-weighted precision /
// recall / F1, accuracy, RMSE over class scores, within-k-point rates and
// per-flight correlation distributions, plus JSON/CSV report emission.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkcast/telemetry.hpp"

namespace linkcast {

struct LengthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kScoreClasses = 10;

// confusion[i][j]: count of timesteps with true class i+1 predicted j+1
using Confusion = std::vector<std::vector<long long>>;

Confusion confusion_matrix(const std::vector<int>& truth,
                           const std::vector<int>& predicted);

struct Prf {
    double precision_pct = 0.0;
    double recall_pct = 0.0;
    double f1_pct = 0.0;
};

// Per-class metrics averaged weighted by true-class support, 0/0 = 0.
// Support-weighted recall telescopes to trace/total, which is why it equals
// accuracy exactly.
Prf weighted_prf(const Confusion& confusion);

double accuracy_pct(const Confusion& confusion);

double rmse_scores(const std::vector<int>& truth,
                   const std::vector<int>& predicted);

double within_k_rate(const std::vector<int>& truth,
                     const std::vector<int>& predicted, int k = 1);

// Pearson r; returns false when either sequence has zero variance.
bool pearson(const std::vector<int>& a, const std::vector<int>& b, double& r);

struct CorrelationSummary {
    std::vector<double> r_values;
    int excluded_flat_sequences = 0;
};

CorrelationSummary per_flight_correlation(
    const std::vector<std::vector<int>>& truth,
    const std::vector<std::vector<int>>& predicted);

struct CorrelationHistogram {
    std::vector<double> edges;      // 21 edges, -1.0 .. 1.0 step 0.1
    std::vector<long long> counts;  // 20 bins, last edge inclusive
};

CorrelationHistogram histogram_correlations(const std::vector<double>& rs);

using FlightScores = std::vector<std::vector<int>>;

struct EvalReport {
    std::string model;
    Confusion confusion;
    double precision_pct = 0.0;
    double recall_pct = 0.0;
    double f1_pct = 0.0;
    double accuracy_pct = 0.0;
    double rmse = 0.0;
    int within_k = 1;
    double within_k_pct = 0.0;
    CorrelationHistogram correlation_histogram;
    int excluded_flat_sequences = 0;
    double timing_seconds = 0.0;
    long long timesteps = 0;
    long long flights = 0;
};

// Runs the predictor over the test flights, times it, and assembles every
// metric. truth[i][t] is the test label of flight i at timestep t; the
// predictor must return the same shape.
EvalReport evaluate_model(const std::string& model_name,
                          const FlightScores& truth,
                          const std::function<FlightScores()>& predictor,
                          int within_k = 1);

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

// Plot-ready CSV exports.
void export_confusion_csv(const Confusion& confusion, const std::string& path);
void export_correlation_csv(const CorrelationHistogram& hist,
                            const std::string& path);
// Per-timestep error trace with the difference band per point:
// band 0: |diff| <= 1, band 1: 2-3, band 2: 4-7, band 3: > 7.
void export_error_trace_csv(
    const std::vector<std::vector<TelemetryRecord>>& flights,
    const FlightScores& truth, const FlightScores& predicted,
    const std::string& path);

}  // namespace linkcast
