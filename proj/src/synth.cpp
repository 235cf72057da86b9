#include "linkcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

using nlohmann::json;

namespace linkcast {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void validate(const ScenarioConfig& c) {
    if (c.n_satellites < 1 || c.beams_per_satellite < 1 || c.n_airports < 2 ||
        c.n_flights < 1)
        throw ConfigError("scenario counts must be >= 1 (airports >= 2)");
    if (c.date_end <= c.date_start)
        throw ConfigError("scenario date range is empty");
    if (!(c.cruise_speed_kmh > 0.0) || c.sample_period_s < 1)
        throw ConfigError("cruise speed and sample period must be positive");
    if (!(c.beam_radius_km > 0.0))
        throw ConfigError("beam radius must be positive");
}

}  // namespace

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario config parse error: ") + e.what());
    }
    ScenarioConfig c;
    try {
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("n_satellites")) c.n_satellites = j["n_satellites"].get<int>();
        if (j.contains("beams_per_satellite"))
            c.beams_per_satellite = j["beams_per_satellite"].get<int>();
        if (j.contains("n_airports")) c.n_airports = j["n_airports"].get<int>();
        if (j.contains("n_flights")) c.n_flights = j["n_flights"].get<int>();
        if (j.contains("date_start")) c.date_start = j["date_start"].get<long long>();
        if (j.contains("date_end")) c.date_end = j["date_end"].get<long long>();
        if (j.contains("cruise_speed_kmh"))
            c.cruise_speed_kmh = j["cruise_speed_kmh"].get<double>();
        if (j.contains("sample_period_s"))
            c.sample_period_s = j["sample_period_s"].get<int>();
        if (j.contains("beam_radius_km"))
            c.beam_radius_km = j["beam_radius_km"].get<double>();
        if (j.contains("fleet_size")) c.fleet_size = j["fleet_size"].get<int>();
        if (j.contains("min_route_km")) c.min_route_km = j["min_route_km"].get<double>();
        if (j.contains("region")) {
            const json& r = j["region"];
            c.region_lat_min = r.at("lat_min").get<double>();
            c.region_lat_max = r.at("lat_max").get<double>();
            c.region_lon_min = r.at("lon_min").get<double>();
            c.region_lon_max = r.at("lon_max").get<double>();
        }
        if (j.contains("score")) {
            const json& s = j["score"];
            if (s.contains("snr_gain")) c.score.snr_gain = s["snr_gain"].get<double>();
            if (s.contains("snr_midpoint_db"))
                c.score.snr_midpoint_db = s["snr_midpoint_db"].get<double>();
            if (s.contains("congestion_weight"))
                c.score.congestion_weight = s["congestion_weight"].get<double>();
            if (s.contains("handover_penalty"))
                c.score.handover_penalty = s["handover_penalty"].get<double>();
            if (s.contains("noise_sigma"))
                c.score.noise_sigma = s["noise_sigma"].get<double>();
        }
        if (j.contains("corridor")) {
            const json& r = j["corridor"];
            if (r.is_null()) {
                c.corridor = CorridorConfig{};
            } else {
                c.corridor.lat_min = r.at("lat_min").get<double>();
                c.corridor.lat_max = r.at("lat_max").get<double>();
                c.corridor.lon_min = r.at("lon_min").get<double>();
                c.corridor.lon_max = r.at("lon_max").get<double>();
                c.corridor.snr_penalty_db = r.at("snr_penalty_db").get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario config field error: ") + e.what());
    }
    validate(c);
    return c;
}

void save_scenario_config(const ScenarioConfig& c, const std::string& path) {
    json j;
    j["seed"] = c.seed;
    j["n_satellites"] = c.n_satellites;
    j["beams_per_satellite"] = c.beams_per_satellite;
    j["n_airports"] = c.n_airports;
    j["n_flights"] = c.n_flights;
    j["date_start"] = c.date_start;
    j["date_end"] = c.date_end;
    j["cruise_speed_kmh"] = c.cruise_speed_kmh;
    j["sample_period_s"] = c.sample_period_s;
    j["beam_radius_km"] = c.beam_radius_km;
    j["fleet_size"] = c.fleet_size;
    j["min_route_km"] = c.min_route_km;
    j["region"] = {{"lat_min", c.region_lat_min},
                   {"lat_max", c.region_lat_max},
                   {"lon_min", c.region_lon_min},
                   {"lon_max", c.region_lon_max}};
    j["score"] = {{"snr_gain", c.score.snr_gain},
                  {"snr_midpoint_db", c.score.snr_midpoint_db},
                  {"congestion_weight", c.score.congestion_weight},
                  {"handover_penalty", c.score.handover_penalty},
                  {"noise_sigma", c.score.noise_sigma}};
    if (c.corridor.active())
        j["corridor"] = {{"lat_min", c.corridor.lat_min},
                         {"lat_max", c.corridor.lat_max},
                         {"lon_min", c.corridor.lon_min},
                         {"lon_max", c.corridor.lon_max},
                         {"snr_penalty_db", c.corridor.snr_penalty_db}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << j.dump(2) << '\n';
}

std::vector<Beam> generate_constellation(const ScenarioConfig& config) {
    validate(config);
    std::mt19937_64 rng(mix_seed(config.seed, 0xbea3));
    std::uniform_real_distribution<double> snr_jitter(-2.0, 2.0);
    std::uniform_real_distribution<double> mir_jitter(0.0, 40.0);

    const double center_lat =
        0.5 * (config.region_lat_min + config.region_lat_max);
    std::vector<Beam> beams;
    for (int s = 0; s < config.n_satellites; ++s) {
        const double frac =
            config.n_satellites == 1
                ? 0.5
                : static_cast<double>(s) / (config.n_satellites - 1);
        const double sat_lon =
            config.region_lon_min + 8.0 +
            frac * (config.region_lon_max - config.region_lon_min - 16.0);
        const std::string sat_id = "SAT" + std::to_string(s + 1);
        const GeoPoint coverage_center(center_lat, sat_lon);

        // center beam plus hex rings; ring spacing leaves a small overlap
        const double spacing = config.beam_radius_km * 1.55;
        int made = 0, ring = 0;
        while (made < config.beams_per_satellite) {
            const int in_ring = ring == 0 ? 1 : 6 * ring;
            for (int p = 0; p < in_ring && made < config.beams_per_satellite;
                 ++p, ++made) {
                GeoPoint center = coverage_center;
                if (ring > 0) {
                    const double angle = 360.0 * p / in_ring;
                    center = destination_point(coverage_center, angle,
                                               spacing * ring);
                }
                Beam b;
                b.beam_id = sat_id + "-B" + std::to_string(made);
                b.satellite_id = sat_id;
                b.center = center;
                b.radius_km = config.beam_radius_km;
                b.polarization = (ring + p) % 2 == 0 ? 'A' : 'B';
                b.base_snr_db = 15.0 + snr_jitter(rng);
                b.mir_cap_mbps = 40.0 + mir_jitter(rng);
                beams.push_back(std::move(b));
            }
            ++ring;
        }
    }
    return beams;
}

GeoPoint gc_interpolate(const GeoPoint& a, const GeoPoint& b, double f) {
    f = std::clamp(f, 0.0, 1.0);
    const double phi1 = deg2rad(a.lat), lam1 = deg2rad(a.lon);
    const double phi2 = deg2rad(b.lat), lam2 = deg2rad(b.lon);
    const double x1 = std::cos(phi1) * std::cos(lam1),
                 y1 = std::cos(phi1) * std::sin(lam1), z1 = std::sin(phi1);
    const double x2 = std::cos(phi2) * std::cos(lam2),
                 y2 = std::cos(phi2) * std::sin(lam2), z2 = std::sin(phi2);
    const double dot = std::clamp(x1 * x2 + y1 * y2 + z1 * z2, -1.0, 1.0);
    const double omega = std::acos(dot);
    if (omega < 1e-12) return a;
    const double s1 = std::sin((1.0 - f) * omega) / std::sin(omega);
    const double s2 = std::sin(f * omega) / std::sin(omega);
    const double x = s1 * x1 + s2 * x2;
    const double y = s1 * y1 + s2 * y2;
    const double z = s1 * z1 + s2 * z2;
    const double norm = std::sqrt(x * x + y * y + z * z);
    return GeoPoint(rad2deg(std::asin(z / norm)),
                    rad2deg(std::atan2(y, x)));
}

int score_oracle(double snr_db, double congestion, bool in_handover,
                 const ScoreCoefficients& c, std::mt19937_64& rng) {
    const double sig =
        1.0 / (1.0 + std::exp(-c.snr_gain * (snr_db - c.snr_midpoint_db)));
    double s = 1.0 + 9.0 * sig - c.congestion_weight * congestion * 9.0 -
               (in_handover ? c.handover_penalty : 0.0);
    if (c.noise_sigma > 0.0)
        s += std::normal_distribution<double>(0.0, c.noise_sigma)(rng);
    const long long r = std::llround(s);
    return static_cast<int>(std::clamp<long long>(r, 1, 10));
}

namespace {

double beam_congestion(const Beam& beam, long long ts, double device_load) {
    // demand concentrates in a few busy hours: a narrow peak whose timing
    // follows the serving satellite (small per-beam offset), invisible to
    // purely positional predictors
    const double sat_phase =
        2.0 * kPi * static_cast<double>(fnv1a(beam.satellite_id) % 4) / 4.0;
    const double beam_jitter =
        (static_cast<double>(fnv1a(beam.beam_id) % 100) / 100.0 - 0.5) * 0.8;
    const double day_frac = static_cast<double>(ts % 86400) / 86400.0;
    const double s =
        std::sin(2.0 * kPi * day_frac + sat_phase + beam_jitter);
    const double peak = s > 0.0 ? std::pow(s, 8.0) : 0.0;
    return std::clamp(device_load + peak, 0.0, 1.0);
}

}  // namespace

GeneratedFlight generate_flight(const ScenarioConfig& config,
                                const std::vector<Beam>& beams,
                                const Airport& origin, const Airport& dest,
                                long long departure_ts,
                                const std::string& flight_id,
                                const std::string& tail_id,
                                std::uint64_t flight_seed) {
    if (origin.position == dest.position)
        throw ConfigError("generate_flight: origin == destination");

    std::mt19937_64 rng(flight_seed);
    std::normal_distribution<double> snr_noise(0.0, 0.5);
    std::normal_distribution<double> mir_noise(0.0, 2.0);

    const double dist_km = haversine_km(origin.position, dest.position);
    const double duration_s = dist_km / config.cruise_speed_kmh * 3600.0;
    const int n =
        static_cast<int>(duration_s / config.sample_period_s) + 1;

    // device count is a persistent trait of the aircraft plus a per-flight
    // wobble; the fleet skews light with a few heavy users, so the rolling
    // per-tail average carries real signal
    const double u = static_cast<double>(fnv1a(tail_id) % 1000) / 1000.0;
    const int tail_base = 1 + static_cast<int>(13.0 * std::pow(u, 3.5));
    std::uniform_int_distribution<int> wobble(-1, 2);
    const int devices = std::clamp(tail_base + wobble(rng), 1, 14);
    const double device_load = static_cast<double>(devices) / 22.0;

    std::vector<GeoPoint> path(n);
    for (int k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * config.sample_period_s;
        path[k] = gc_interpolate(origin.position, dest.position,
                                 duration_s > 0.0 ? t / duration_s : 1.0);
    }
    std::vector<double> headings(n, 0.0);
    for (int k = 0; k < n; ++k) {
        if (k + 1 < n && !(path[k] == path[k + 1]))
            headings[k] = initial_bearing_deg(path[k], path[k + 1]);
        else if (k > 0)
            headings[k] = headings[k - 1];
    }

    GeneratedFlight out;
    out.records.reserve(n);
    int prev_beam = -1;
    for (int k = 0; k < n; ++k) {
        const long long ts = departure_ts +
                             static_cast<long long>(k) * config.sample_period_s;
        const GeoPoint& pos = path[k];

        // serving beam: highest nominal SNR among covering beams
        int serving = -1;
        double best_snr = -1e30;
        double serving_load = 0.0;
        for (size_t b = 0; b < beams.size(); ++b) {
            const double d = haversine_km(pos, beams[b].center);
            if (d > beams[b].radius_km) continue;
            const double ratio = d / beams[b].radius_km;
            const double load = beam_congestion(beams[b], ts, device_load);
            const double snr =
                beams[b].base_snr_db - 3.0 * ratio * ratio - 4.0 * load;
            if (snr > best_snr) {
                best_snr = snr;
                serving = static_cast<int>(b);
                serving_load = load;
            }
        }

        TelemetryRecord r;
        r.timestamp = ts;
        r.flight_id = flight_id;
        r.tail_id = tail_id;
        r.origin_airport = origin.id;
        r.destination_airport = dest.id;
        r.position = pos;
        const double t_s = static_cast<double>(k) * config.sample_period_s;
        const double climb = std::min(t_s, std::max(0.0, duration_s - t_s));
        r.altitude_ft = std::min(40000.0, 2000.0 + climb * 25.0);
        r.connected_devices = devices;

        bool in_handover = false;
        if (serving < 0) {
            // outside all beams: null link, floor score
            r.satellite_id.clear();
            r.beam_id.clear();
            r.snr_db = -5.0 + snr_noise(rng);
            r.mir_mbps = 0.0;
            r.score = 1;
            prev_beam = -1;
        } else {
            const Beam& beam = beams[static_cast<size_t>(serving)];
            r.satellite_id = beam.satellite_id;
            r.beam_id = beam.beam_id;
            double snr = best_snr + snr_noise(rng);
            if (config.corridor.active())
                snr -= config.corridor.penalty_at(pos);
            r.snr_db = snr;
            r.mir_mbps = std::max(
                1.0, beam.mir_cap_mbps * (1.0 - 0.4 * serving_load) +
                         mir_noise(rng));
            if (prev_beam >= 0 && prev_beam != serving) {
                in_handover = true;
                const Beam& prev = beams[static_cast<size_t>(prev_beam)];
                HandoverEvent e;
                e.position = pos;
                e.quadrant = quadrant_of(headings[k]);
                e.timestamp = ts;
                e.flight_id = flight_id;
                if (prev.satellite_id != beam.satellite_id)
                    e.kind = HandoverKind::Satellite;
                else if (prev.polarization != beam.polarization)
                    e.kind = HandoverKind::BreakBeforeMake;
                else
                    e.kind = HandoverKind::MakeBeforeBreak;
                out.events.push_back(std::move(e));
            }
            r.score = score_oracle(snr, serving_load, in_handover,
                                   config.score, rng);
            prev_beam = serving;
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

Scenario generate_scenario(const ScenarioConfig& config) {
    validate(config);
    Scenario scenario;
    scenario.beams = generate_constellation(config);

    // airports with a minimum separation, rejection-sampled
    std::mt19937_64 rng(mix_seed(config.seed, 0xa1f0));
    std::uniform_real_distribution<double> lat_dist(config.region_lat_min,
                                                    config.region_lat_max);
    std::uniform_real_distribution<double> lon_dist(config.region_lon_min,
                                                    config.region_lon_max);
    for (int i = 0; i < config.n_airports; ++i) {
        GeoPoint p(0.0, 0.0);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            p = GeoPoint(lat_dist(rng), lon_dist(rng));
            bool ok = true;
            for (const auto& a : scenario.airports)
                if (haversine_km(a.position, p) < 250.0) {
                    ok = false;
                    break;
                }
            if (ok) break;
        }
        char id[16];
        std::snprintf(id, sizeof id, "AP%02d", i);
        scenario.airports.push_back({id, p});
    }

    const int n_tails =
        config.fleet_size > 0
            ? config.fleet_size
            : std::max(2, config.n_flights / 25);
    const int per_tail = (config.n_flights + n_tails - 1) / n_tails;
    const double slot = static_cast<double>(config.date_end - config.date_start) /
                        static_cast<double>(per_tail);

    // flight plans drawn serially so generation order cannot shift them
    struct Plan {
        int origin, dest;
        long long departure;
        std::string flight_id, tail_id;
        std::uint64_t seed;
    };
    std::uniform_int_distribution<int> airport_dist(0, config.n_airports - 1);
    std::uniform_real_distribution<double> jitter(0.0, 0.45);
    std::vector<Plan> plans(config.n_flights);
    std::vector<int> tail_counts(n_tails, 0);
    for (int i = 0; i < config.n_flights; ++i) {
        Plan& p = plans[i];
        p.origin = airport_dist(rng);
        p.dest = airport_dist(rng);
        for (int attempt = 0; attempt < 64; ++attempt) {
            if (p.dest != p.origin &&
                haversine_km(scenario.airports[p.origin].position,
                             scenario.airports[p.dest].position) >=
                    config.min_route_km)
                break;
            p.dest = airport_dist(rng);
        }
        if (p.dest == p.origin) p.dest = (p.origin + 1) % config.n_airports;
        const int tail = i % n_tails;
        const int seq = tail_counts[tail]++;
        p.departure = config.date_start +
                      static_cast<long long>((seq + jitter(rng)) * slot);
        char fid[24], tid[24];
        std::snprintf(fid, sizeof fid, "F%05d", i);
        std::snprintf(tid, sizeof tid, "T%03d", tail);
        p.flight_id = fid;
        p.tail_id = tid;
        p.seed = mix_seed(config.seed, 0xf000 + static_cast<std::uint64_t>(i));
    }

    // flights are independent given their seeds; slots keep output order
    std::vector<GeneratedFlight> flights(plans.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(plans.size()); ++i) {
        const Plan& p = plans[i];
        flights[i] = generate_flight(config, scenario.beams,
                                     scenario.airports[p.origin],
                                     scenario.airports[p.dest], p.departure,
                                     p.flight_id, p.tail_id, p.seed);
    }
    for (auto& f : flights) {
        scenario.records.insert(scenario.records.end(), f.records.begin(),
                                f.records.end());
        scenario.events.insert(scenario.events.end(), f.events.begin(),
                               f.events.end());
    }
    return scenario;
}

void save_beams(const std::vector<Beam>& beams, const std::string& path) {
    json arr = json::array();
    for (const auto& b : beams)
        arr.push_back({{"beam_id", b.beam_id},
                       {"satellite_id", b.satellite_id},
                       {"lat", b.center.lat},
                       {"lon", b.center.lon},
                       {"radius_km", b.radius_km},
                       {"polarization", std::string(1, b.polarization)},
                       {"base_snr_db", b.base_snr_db},
                       {"mir_cap_mbps", b.mir_cap_mbps}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << arr.dump(2) << '\n';
}

std::vector<Beam> load_beams(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open beams file: " + path);
    json arr;
    in >> arr;
    std::vector<Beam> beams;
    for (const auto& j : arr) {
        Beam b;
        b.beam_id = j.at("beam_id").get<std::string>();
        b.satellite_id = j.at("satellite_id").get<std::string>();
        b.center = GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
        b.radius_km = j.at("radius_km").get<double>();
        b.polarization = j.at("polarization").get<std::string>().at(0);
        b.base_snr_db = j.at("base_snr_db").get<double>();
        b.mir_cap_mbps = j.at("mir_cap_mbps").get<double>();
        beams.push_back(std::move(b));
    }
    return beams;
}

void save_airports(const std::vector<Airport>& airports,
                   const std::string& path) {
    json arr = json::array();
    for (const auto& a : airports)
        arr.push_back({{"id", a.id}, {"lat", a.position.lat},
                       {"lon", a.position.lon}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << arr.dump(2) << '\n';
}

std::vector<Airport> load_airports(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open airports file: " + path);
    json arr;
    in >> arr;
    std::vector<Airport> airports;
    for (const auto& j : arr)
        airports.push_back(
            {j.at("id").get<std::string>(),
             GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>())});
    return airports;
}

}  // namespace linkcast
