#pragma once

// Telemetry records and their line-delimited JSON file format. One record
// per line; a flight is the ordered set of records sharing a flight_id.

#include <stdexcept>
#include <string>
#include <vector>

#include "linkcast/geo.hpp"

namespace linkcast {

struct TelemetryRecord {
    long long timestamp = 0;  // UTC seconds
    std::string flight_id;
    std::string tail_id;
    std::string origin_airport;
    std::string destination_airport;
    GeoPoint position;
    double altitude_ft = 0.0;
    std::string satellite_id;  // empty when outside all beams
    std::string beam_id;       // empty when outside all beams
    double snr_db = 0.0;
    double mir_mbps = 0.0;
    int connected_devices = 0;
    int score = 10;  // 1..10

    bool operator==(const TelemetryRecord&) const = default;
};

struct MalformedRecord : std::runtime_error {
    int line_no;
    MalformedRecord(int line, const std::string& what)
        : std::runtime_error("record line " + std::to_string(line) + ": " + what),
          line_no(line) {}
};

void write_records(const std::vector<TelemetryRecord>& records,
                   const std::string& path);
std::vector<TelemetryRecord> read_records(const std::string& path);

// Flights in order of first appearance; records keep file order within a
// flight. Throws MalformedRecord if timestamps within a flight are not
// strictly increasing.
std::vector<std::vector<TelemetryRecord>> group_by_flight(
    const std::vector<TelemetryRecord>& records);

}  // namespace linkcast
