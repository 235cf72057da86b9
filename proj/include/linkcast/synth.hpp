#pragma once

// Synthetic GEO constellation, beam layout, flight trajectories at a fixed
// cadence, handover events and ground-truth 1..10 scores. Stands in for the
// proprietary operational dataset; everything is deterministic under the
// scenario seed.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "linkcast/atlas.hpp"
#include "linkcast/geo.hpp"
#include "linkcast/telemetry.hpp"

namespace linkcast {

struct Beam {
    std::string beam_id;
    std::string satellite_id;
    GeoPoint center;
    double radius_km = 400.0;
    char polarization = 'A';  // opposite polarization forces break-before-make
    double base_snr_db = 15.0;
    double mir_cap_mbps = 60.0;
};

struct ScoreCoefficients {
    double snr_gain = 0.9;        // sigmoid slope on (snr - midpoint)
    double snr_midpoint_db = 6.0;
    double congestion_weight = 0.4;
    double handover_penalty = 2.0;
    double noise_sigma = 0.55;
};

// Rectangular region with degraded SNR, used to plant a low-performance
// corridor in ranking scenarios.
struct CorridorConfig {
    double lat_min = 0.0, lat_max = 0.0;
    double lon_min = 0.0, lon_max = 0.0;
    double snr_penalty_db = 0.0;

    bool active() const { return snr_penalty_db != 0.0; }
    bool contains(const GeoPoint& p) const {
        return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min &&
               p.lon <= lon_max;
    }
    // full penalty at the corridor center, tapering toward the edges
    double penalty_at(const GeoPoint& p) const {
        if (!contains(p)) return 0.0;
        const double cy = 0.5 * (lat_min + lat_max);
        const double cx = 0.5 * (lon_min + lon_max);
        const double ny = std::fabs(p.lat - cy) / (0.5 * (lat_max - lat_min));
        const double nx = std::fabs(p.lon - cx) / (0.5 * (lon_max - lon_min));
        const double edge = std::max(nx, ny);  // 0 center, 1 edge
        return snr_penalty_db * (1.0 - 0.45 * edge);
    }
};

struct ScenarioConfig {
    std::uint64_t seed = 42;
    int n_satellites = 4;
    int beams_per_satellite = 19;
    int n_airports = 16;
    int n_flights = 4500;
    long long date_start = 1704067200;  // 2024-01-01T00:00:00Z
    long long date_end = 1730332800;    // 2024-10-31T00:00:00Z
    double cruise_speed_kmh = 900.0;
    int sample_period_s = 30;
    double beam_radius_km = 480.0;
    int fleet_size = 0;  // 0: derived from n_flights
    double region_lat_min = 22.0, region_lat_max = 52.0;
    double region_lon_min = -130.0, region_lon_max = -60.0;
    double min_route_km = 1200.0;
    ScoreCoefficients score;
    CorridorConfig corridor{33.0, 39.0, -105.0, -95.0, 10.5};
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ScenarioConfig load_scenario_config(const std::string& path);
void save_scenario_config(const ScenarioConfig& config, const std::string& path);

struct Airport {
    std::string id;
    GeoPoint position;
};

std::vector<Beam> generate_constellation(const ScenarioConfig& config);

// Spherical interpolation along the great circle a -> b at fraction f.
GeoPoint gc_interpolate(const GeoPoint& a, const GeoPoint& b, double f);

// clamp(round(1 + 9*sigmoid(gain*(snr - midpoint))
//             - congestion_weight*congestion*9 - handover_penalty), 1, 10)
// plus Gaussian noise before rounding.
int score_oracle(double snr_db, double congestion, bool in_handover,
                 const ScoreCoefficients& c, std::mt19937_64& rng);

struct GeneratedFlight {
    std::vector<TelemetryRecord> records;
    std::vector<HandoverEvent> events;
};

GeneratedFlight generate_flight(const ScenarioConfig& config,
                                const std::vector<Beam>& beams,
                                const Airport& origin, const Airport& dest,
                                long long departure_ts,
                                const std::string& flight_id,
                                const std::string& tail_id,
                                std::uint64_t flight_seed);

struct Scenario {
    std::vector<Beam> beams;
    std::vector<Airport> airports;
    std::vector<TelemetryRecord> records;
    std::vector<HandoverEvent> events;
};

Scenario generate_scenario(const ScenarioConfig& config);

void save_beams(const std::vector<Beam>& beams, const std::string& path);
std::vector<Beam> load_beams(const std::string& path);
void save_airports(const std::vector<Airport>& airports, const std::string& path);
std::vector<Airport> load_airports(const std::string& path);

}  // namespace linkcast
