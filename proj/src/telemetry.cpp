#include "linkcast/telemetry.hpp"

#include <fstream>
#include <map>

#include "json.hpp"

using nlohmann::json;

namespace linkcast {

namespace {

json record_to_json(const TelemetryRecord& r) {
    json j;
    j["timestamp"] = r.timestamp;
    j["flight_id"] = r.flight_id;
    j["tail_id"] = r.tail_id;
    j["origin_airport"] = r.origin_airport;
    j["destination_airport"] = r.destination_airport;
    j["lat"] = r.position.lat;
    j["lon"] = r.position.lon;
    j["altitude_ft"] = r.altitude_ft;
    j["satellite_id"] = r.satellite_id;
    j["beam_id"] = r.beam_id;
    j["snr_db"] = r.snr_db;
    j["mir_mbps"] = r.mir_mbps;
    j["connected_devices"] = r.connected_devices;
    j["score"] = r.score;
    return j;
}

TelemetryRecord record_from_json(const json& j, int line_no) {
    TelemetryRecord r;
    r.timestamp = j.at("timestamp").get<long long>();
    r.flight_id = j.at("flight_id").get<std::string>();
    r.tail_id = j.at("tail_id").get<std::string>();
    r.origin_airport = j.at("origin_airport").get<std::string>();
    r.destination_airport = j.at("destination_airport").get<std::string>();
    r.position = GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
    r.altitude_ft = j.at("altitude_ft").get<double>();
    r.satellite_id = j.at("satellite_id").get<std::string>();
    r.beam_id = j.at("beam_id").get<std::string>();
    r.snr_db = j.at("snr_db").get<double>();
    r.mir_mbps = j.at("mir_mbps").get<double>();
    r.connected_devices = j.at("connected_devices").get<int>();
    r.score = j.at("score").get<int>();
    if (r.score < 1 || r.score > 10)
        throw MalformedRecord(line_no,
                              "score out of [1,10]: " + std::to_string(r.score));
    if (r.connected_devices < 0)
        throw MalformedRecord(line_no, "connected_devices < 0");
    return r;
}

}  // namespace

void write_records(const std::vector<TelemetryRecord>& records,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<TelemetryRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records file: " + path);
    std::vector<TelemetryRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(json::parse(line), line_no));
        } catch (const MalformedRecord&) {
            throw;
        } catch (const std::exception& e) {
            throw MalformedRecord(line_no, e.what());
        }
    }
    return records;
}

std::vector<std::vector<TelemetryRecord>> group_by_flight(
    const std::vector<TelemetryRecord>& records) {
    std::vector<std::vector<TelemetryRecord>> flights;
    std::map<std::string, size_t> index;
    int line_no = 0;
    for (const auto& r : records) {
        ++line_no;
        auto [it, inserted] = index.emplace(r.flight_id, flights.size());
        if (inserted) flights.emplace_back();
        auto& flight = flights[it->second];
        if (!flight.empty() && r.timestamp <= flight.back().timestamp)
            throw MalformedRecord(
                line_no, "timestamps not strictly increasing in flight " +
                             r.flight_id);
        flight.push_back(r);
    }
    return flights;
}

}  // namespace linkcast
