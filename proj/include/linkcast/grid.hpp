#pragma once

// Historical performance grid: per-(beam, hex cell) means of SNR, MIR and
// score over the training history, a dataset-wide fallback for cells never
// traversed, and per-aircraft rolling statistics over the previous flights.

#include <map>
#include <string>
#include <vector>

#include "linkcast/geo.hpp"
#include "linkcast/telemetry.hpp"

namespace linkcast {

struct CellStats {
    HexIndex cell;
    std::string beam_id;
    double mean_snr = 0.0;
    double mean_mir = 0.0;
    double mean_score = 0.0;
    long long sample_count = 0;
};

struct GlobalStats {
    double mean_snr = 0.0;
    double mean_mir = 0.0;
    double mean_score = 0.0;
    double mean_devices = 0.0;
    long long sample_count = 0;
};

// Result of a position lookup; from_cell is false when the dataset-wide
// fallback was used.
struct CellQuery {
    bool from_cell = false;
    double mean_snr = 0.0;
    double mean_mir = 0.0;
    double mean_score = 0.0;
    long long sample_count = 0;
};

struct PerformanceGrid {
    double circumradius_km = 50.0;
    std::map<std::string, GeoPoint> beam_anchors;
    std::map<std::string, CellStats> cells;  // key "beam/q/r"
    GlobalStats global;
};

// Mean observed position per beam, used as the grid anchor when no beam
// layout is available.
std::map<std::string, GeoPoint> estimate_beam_centers(
    const std::vector<TelemetryRecord>& records);

// Means per (beam, cell) plus the global fallback. Records without a beam
// contribute to the global statistics only. Empty beam_centers means
// anchors are estimated from the records.
PerformanceGrid build_grid(
    const std::vector<TelemetryRecord>& history, double circumradius_km,
    const std::map<std::string, GeoPoint>& beam_centers = {});

CellQuery query_cell(const PerformanceGrid& grid, const GeoPoint& p,
                     const std::string& beam_id);

std::string cell_key(const std::string& beam_id, const HexIndex& h);

// One completed flight, condensed for the rolling aircraft window.
struct FlightSummary {
    std::string flight_id;
    std::string tail_id;
    long long departure_ts = 0;
    long long end_ts = 0;
    double mean_score = 0.0;
    double mean_devices = 0.0;
};

struct AircraftStats {
    std::string tail_id;
    double mean_recent_score = 0.0;
    double mean_recent_devices = 0.0;
    int flights_used = 0;  // in [0, 5]
};

std::vector<FlightSummary> summarize_flights(
    const std::vector<std::vector<TelemetryRecord>>& flights);

// Mean over the last <= 5 flights of tail_id that ended strictly before
// as_of. With zero prior flights, falls back to the supplied global means.
AircraftStats rolling_aircraft_stats(const std::vector<FlightSummary>& flights,
                                     const std::string& tail_id,
                                     long long as_of,
                                     double global_mean_score,
                                     double global_mean_devices);

struct MalformedGridFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void save_grid(const PerformanceGrid& grid, const std::string& path);
PerformanceGrid load_grid(const std::string& path);

}  // namespace linkcast
