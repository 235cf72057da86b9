#include "linkcast/grid.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

using nlohmann::json;

namespace linkcast {

std::string cell_key(const std::string& beam_id, const HexIndex& h) {
    return beam_id + "/" + std::to_string(h.q) + "/" + std::to_string(h.r);
}

std::map<std::string, GeoPoint> estimate_beam_centers(
    const std::vector<TelemetryRecord>& records) {
    struct Acc {
        double ref_lon = 0.0;
        double lat_sum = 0.0;
        double dlon_sum = 0.0;
        long long n = 0;
    };
    std::map<std::string, Acc> acc;
    for (const auto& r : records) {
        if (r.beam_id.empty()) continue;
        auto [it, inserted] = acc.emplace(r.beam_id, Acc{});
        if (inserted) it->second.ref_lon = r.position.lon;
        it->second.lat_sum += r.position.lat;
        it->second.dlon_sum += wrap_delta_lon(r.position.lon - it->second.ref_lon);
        it->second.n += 1;
    }
    std::map<std::string, GeoPoint> centers;
    for (const auto& [beam, a] : acc) {
        const double n = static_cast<double>(a.n);
        centers.emplace(beam, GeoPoint(a.lat_sum / n,
                                       normalize_lon(a.ref_lon + a.dlon_sum / n)));
    }
    return centers;
}

PerformanceGrid build_grid(const std::vector<TelemetryRecord>& history,
                           double circumradius_km,
                           const std::map<std::string, GeoPoint>& beam_centers) {
    PerformanceGrid grid;
    grid.circumradius_km = circumradius_km;
    grid.beam_anchors =
        beam_centers.empty() ? estimate_beam_centers(history) : beam_centers;

    struct Acc {
        HexIndex cell;
        std::string beam;
        double snr = 0.0, mir = 0.0, score = 0.0;
        long long n = 0;
    };
    std::map<std::string, Acc> acc;
    double gsnr = 0.0, gmir = 0.0, gscore = 0.0, gdev = 0.0;
    long long gn = 0;

    for (const auto& r : history) {
        gsnr += r.snr_db;
        gmir += r.mir_mbps;
        gscore += static_cast<double>(r.score);
        gdev += static_cast<double>(r.connected_devices);
        ++gn;
        if (r.beam_id.empty()) continue;
        const auto anchor_it = grid.beam_anchors.find(r.beam_id);
        if (anchor_it == grid.beam_anchors.end()) continue;
        const HexIndex cell =
            hex_index(r.position, anchor_it->second, circumradius_km);
        auto [it, inserted] = acc.emplace(cell_key(r.beam_id, cell), Acc{});
        if (inserted) {
            it->second.cell = cell;
            it->second.beam = r.beam_id;
        }
        it->second.snr += r.snr_db;
        it->second.mir += r.mir_mbps;
        it->second.score += static_cast<double>(r.score);
        it->second.n += 1;
    }

    for (const auto& [key, a] : acc) {
        CellStats s;
        s.cell = a.cell;
        s.beam_id = a.beam;
        const double n = static_cast<double>(a.n);
        s.mean_snr = a.snr / n;
        s.mean_mir = a.mir / n;
        s.mean_score = a.score / n;
        s.sample_count = a.n;
        grid.cells.emplace(key, std::move(s));
    }
    if (gn > 0) {
        const double n = static_cast<double>(gn);
        grid.global = {gsnr / n, gmir / n, gscore / n, gdev / n, gn};
    }
    return grid;
}

CellQuery query_cell(const PerformanceGrid& grid, const GeoPoint& p,
                     const std::string& beam_id) {
    const auto anchor_it = grid.beam_anchors.find(beam_id);
    if (anchor_it != grid.beam_anchors.end()) {
        const HexIndex cell =
            hex_index(p, anchor_it->second, grid.circumradius_km);
        const auto it = grid.cells.find(cell_key(beam_id, cell));
        if (it != grid.cells.end()) {
            const CellStats& s = it->second;
            return {true, s.mean_snr, s.mean_mir, s.mean_score, s.sample_count};
        }
    }
    return {false, grid.global.mean_snr, grid.global.mean_mir,
            grid.global.mean_score, grid.global.sample_count};
}

std::vector<FlightSummary> summarize_flights(
    const std::vector<std::vector<TelemetryRecord>>& flights) {
    std::vector<FlightSummary> out;
    out.reserve(flights.size());
    for (const auto& f : flights) {
        if (f.empty()) continue;
        FlightSummary s;
        s.flight_id = f.front().flight_id;
        s.tail_id = f.front().tail_id;
        s.departure_ts = f.front().timestamp;
        s.end_ts = f.back().timestamp;
        double score = 0.0, dev = 0.0;
        for (const auto& r : f) {
            score += static_cast<double>(r.score);
            dev += static_cast<double>(r.connected_devices);
        }
        s.mean_score = score / static_cast<double>(f.size());
        s.mean_devices = dev / static_cast<double>(f.size());
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FlightSummary& a, const FlightSummary& b) {
                         return a.departure_ts < b.departure_ts;
                     });
    return out;
}

AircraftStats rolling_aircraft_stats(const std::vector<FlightSummary>& flights,
                                     const std::string& tail_id,
                                     long long as_of,
                                     double global_mean_score,
                                     double global_mean_devices) {
    // flights are sorted ascending by departure; walk backwards and take
    // the most recent 5 ending strictly before as_of
    double score = 0.0, dev = 0.0;
    int used = 0;
    for (auto it = flights.rbegin(); it != flights.rend() && used < 5; ++it) {
        if (it->tail_id != tail_id || it->end_ts >= as_of) continue;
        score += it->mean_score;
        dev += it->mean_devices;
        ++used;
    }
    AircraftStats s;
    s.tail_id = tail_id;
    if (used == 0) {
        s.mean_recent_score = global_mean_score;
        s.mean_recent_devices = global_mean_devices;
        s.flights_used = 0;
    } else {
        s.mean_recent_score = score / static_cast<double>(used);
        s.mean_recent_devices = dev / static_cast<double>(used);
        s.flights_used = used;
    }
    return s;
}

void save_grid(const PerformanceGrid& grid, const std::string& path) {
    json root;
    root["circumradius_km"] = grid.circumradius_km;
    json anchors = json::object();
    for (const auto& [beam, p] : grid.beam_anchors)
        anchors[beam] = {p.lon, p.lat};
    root["_anchors"] = std::move(anchors);
    root["_global"] = {{"mean_snr", grid.global.mean_snr},
                       {"mean_mir", grid.global.mean_mir},
                       {"mean_score", grid.global.mean_score},
                       {"mean_devices", grid.global.mean_devices},
                       {"sample_count", grid.global.sample_count}};
    json cells = json::object();
    for (const auto& [key, s] : grid.cells) {
        cells[key] = {{"mean_snr", s.mean_snr},
                      {"mean_mir", s.mean_mir},
                      {"mean_score", s.mean_score},
                      {"sample_count", s.sample_count}};
    }
    root["cells"] = std::move(cells);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump(2) << '\n';
}

PerformanceGrid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedGridFile("cannot open grid file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw MalformedGridFile(std::string("grid parse error: ") + e.what());
    }
    PerformanceGrid grid;
    try {
        grid.circumradius_km = root.at("circumradius_km").get<double>();
        for (const auto& [beam, arr] : root.at("_anchors").items())
            grid.beam_anchors.emplace(
                beam, GeoPoint(arr[1].get<double>(), arr[0].get<double>()));
        const json& g = root.at("_global");
        grid.global = {g.at("mean_snr").get<double>(),
                       g.at("mean_mir").get<double>(),
                       g.at("mean_score").get<double>(),
                       g.at("mean_devices").get<double>(),
                       g.at("sample_count").get<long long>()};
        for (const auto& [key, c] : root.at("cells").items()) {
            CellStats s;
            const auto p1 = key.find('/');
            const auto p2 = key.rfind('/');
            if (p1 == std::string::npos || p2 == p1)
                throw MalformedGridFile("bad cell key: " + key);
            s.beam_id = key.substr(0, p1);
            s.cell.q = std::stoll(key.substr(p1 + 1, p2 - p1 - 1));
            s.cell.r = std::stoll(key.substr(p2 + 1));
            const auto a = grid.beam_anchors.find(s.beam_id);
            if (a != grid.beam_anchors.end()) s.cell.origin = a->second;
            s.mean_snr = c.at("mean_snr").get<double>();
            s.mean_mir = c.at("mean_mir").get<double>();
            s.mean_score = c.at("mean_score").get<double>();
            s.sample_count = c.at("sample_count").get<long long>();
            grid.cells.emplace(key, std::move(s));
        }
    } catch (const json::exception& e) {
        throw MalformedGridFile(std::string("grid field error: ") + e.what());
    }
    return grid;
}

}  // namespace linkcast
