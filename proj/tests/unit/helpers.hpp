#pragma once

// Shared fixtures for the unit tests.

#include <random>
#include <string>
#include <vector>

#include "linkcast/telemetry.hpp"

namespace testutil {

inline linkcast::TelemetryRecord make_record(
    const std::string& flight, long long ts, double lat, double lon,
    const std::string& beam = "SAT1-B0", double snr = 14.0, int score = 9,
    const std::string& tail = "T000") {
    linkcast::TelemetryRecord r;
    r.timestamp = ts;
    r.flight_id = flight;
    r.tail_id = tail;
    r.origin_airport = "AP00";
    r.destination_airport = "AP01";
    r.position = linkcast::GeoPoint(lat, lon);
    r.altitude_ft = 38000.0;
    r.satellite_id = beam.empty() ? "" : "SAT1";
    r.beam_id = beam;
    r.snr_db = snr;
    r.mir_mbps = 55.0;
    r.connected_devices = 4;
    r.score = score;
    return r;
}

// straight-line flight of n records at the given cadence
inline std::vector<linkcast::TelemetryRecord> make_flight(
    const std::string& flight, long long t0, int n, int period_s = 30,
    double lat0 = 38.0, double lon0 = -100.0, double dlon = 0.01,
    const std::string& tail = "T000", int score = 9) {
    std::vector<linkcast::TelemetryRecord> records;
    for (int i = 0; i < n; ++i)
        records.push_back(make_record(flight, t0 + i * period_s, lat0,
                                      lon0 + i * dlon, "SAT1-B0", 14.0, score,
                                      tail));
    return records;
}

}  // namespace testutil
