#include "linkcast/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "linkcast/synth.hpp"

using nlohmann::json;

namespace linkcast {

Prepared prepare_dataset(const std::vector<TelemetryRecord>& records,
                         const std::vector<HandoverEvent>& events,
                         const PrepareOptions& options) {
    const auto flights = group_by_flight(records);
    const SplitIndices split = split_dataset(flights.size(), options.seed);

    std::set<std::string> train_ids;
    for (size_t i : split.train) train_ids.insert(flights[i].front().flight_id);

    std::vector<TelemetryRecord> train_records;
    for (size_t i : split.train)
        train_records.insert(train_records.end(), flights[i].begin(),
                             flights[i].end());

    std::vector<HandoverEvent> train_events;
    for (const auto& e : events)
        if (train_ids.count(e.flight_id)) train_events.push_back(e);

    Prepared out;
    out.atlas = build_contoured_regions(train_events, options.contour);
    out.grid = build_grid(train_records, options.cell_radius_km,
                          options.beam_centers);
    out.rule = build_rule_table(train_records, options.cell_radius_km,
                                options.beam_centers);
    out.bundle.vocab = build_vocab(train_records);

    const auto summaries = summarize_flights(flights);

    auto featurize_split =
        [&](const std::vector<size_t>& idx, const char* name,
            std::vector<FlightSequence>& seqs,
            std::vector<std::vector<TelemetryRecord>>& resampled) {
            for (size_t i : idx) {
                const auto& flight = flights[i];
                auto sampled = resample_10min(flight);
                if (sampled.size() < 2) continue;  // too short to featurize
                const AircraftStats aircraft = rolling_aircraft_stats(
                    summaries, flight.front().tail_id, flight.front().timestamp,
                    out.grid.global.mean_score, out.grid.global.mean_devices);
                seqs.push_back(featurize_flight(sampled, out.atlas, out.grid,
                                                aircraft, out.bundle.vocab,
                                                options.holidays));
                out.bundle.split[flight.front().flight_id] = name;
                resampled.push_back(std::move(sampled));
            }
        };

    featurize_split(split.train, "train", out.bundle.train, out.resampled_train);
    featurize_split(split.val, "val", out.bundle.val, out.resampled_val);
    featurize_split(split.test, "test", out.bundle.test, out.resampled_test);

    out.bundle.norm = fit_minmax(out.bundle.train);
    for (auto& s : out.bundle.train) apply_minmax(out.bundle.norm, s);
    for (auto& s : out.bundle.val) apply_minmax(out.bundle.norm, s);
    for (auto& s : out.bundle.test) apply_minmax(out.bundle.norm, s);
    return out;
}

namespace {

std::vector<TelemetryRecord> flatten(
    const std::vector<std::vector<TelemetryRecord>>& flights) {
    std::vector<TelemetryRecord> out;
    for (const auto& f : flights) out.insert(out.end(), f.begin(), f.end());
    return out;
}

}  // namespace

void save_prepared(const Prepared& prepared, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_atlas(prepared.atlas, dir + "/atlas.json");
    save_grid(prepared.grid, dir + "/grid.json");
    save_rule_table(prepared.rule, dir + "/rule.json");
    save_bundle(prepared.bundle, dir);
    write_records(flatten(prepared.resampled_train),
                  dir + "/records_train.jsonl");
    write_records(flatten(prepared.resampled_val), dir + "/records_val.jsonl");
    write_records(flatten(prepared.resampled_test), dir + "/records_test.jsonl");
}

Prepared load_prepared(const std::string& dir) {
    Prepared out;
    out.atlas = load_atlas(dir + "/atlas.json");
    out.grid = load_grid(dir + "/grid.json");
    out.rule = load_rule_table(dir + "/rule.json");
    out.bundle = load_bundle(dir);
    out.resampled_train = group_by_flight(read_records(dir + "/records_train.jsonl"));
    out.resampled_val = group_by_flight(read_records(dir + "/records_val.jsonl"));
    out.resampled_test = group_by_flight(read_records(dir + "/records_test.jsonl"));
    return out;
}

std::string nearest_beam(const PerformanceGrid& grid, const GeoPoint& p) {
    std::string best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [beam, anchor] : grid.beam_anchors) {
        const double d = haversine_km(p, anchor);
        if (d < best_d) {
            best_d = d;
            best = beam;
        }
    }
    return best;
}

std::vector<FlightPlan> load_plans(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlanError("cannot open plans file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw PlanError(std::string("plans parse error: ") + e.what());
    }
    std::vector<FlightPlan> plans;
    try {
        for (const auto& j : root.at("plans")) {
            FlightPlan p;
            p.plan_id = j.at("plan_id").get<std::string>();
            p.tail_id = j.value("tail_id", std::string{});
            p.departure_ts = j.at("departure_time").get<long long>();
            for (const auto& w : j.at("waypoints")) {
                const double lon = w.at(0).get<double>();
                const double lat = w.at(1).get<double>();
                const double alt = w.size() > 2 ? w.at(2).get<double>() : 38000.0;
                p.waypoints.emplace_back(GeoPoint(lat, lon), alt);
            }
            if (p.waypoints.size() < 2)
                throw PlanError("plan " + p.plan_id + " has fewer than 2 waypoints");
            plans.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw PlanError(std::string("plans field error: ") + e.what());
    }
    if (plans.empty()) throw PlanError("plans file contains no plans");
    return plans;
}

void save_plans(const std::vector<FlightPlan>& plans, const std::string& path) {
    json arr = json::array();
    for (const auto& p : plans) {
        json w = json::array();
        for (const auto& [pos, alt] : p.waypoints)
            w.push_back({pos.lon, pos.lat, alt});
        arr.push_back({{"plan_id", p.plan_id},
                       {"tail_id", p.tail_id},
                       {"departure_time", p.departure_ts},
                       {"waypoints", w}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << json{{"plans", arr}}.dump(2) << '\n';
}

namespace {

// 10-minute pseudo-telemetry along the plan's great-circle legs
std::vector<TelemetryRecord> synthesize_trajectory(
    const FlightPlan& plan, const PerformanceGrid& grid,
    double cruise_speed_kmh) {
    struct Leg {
        GeoPoint from, to;
        double alt_from, alt_to;
        double start_km, length_km;
    };
    std::vector<Leg> legs;
    double total_km = 0.0;
    for (size_t w = 0; w + 1 < plan.waypoints.size(); ++w) {
        Leg leg;
        leg.from = plan.waypoints[w].first;
        leg.to = plan.waypoints[w + 1].first;
        leg.alt_from = plan.waypoints[w].second;
        leg.alt_to = plan.waypoints[w + 1].second;
        leg.start_km = total_km;
        leg.length_km = haversine_km(leg.from, leg.to);
        total_km += leg.length_km;
        legs.push_back(leg);
    }
    if (total_km <= 0.0)
        throw PlanError("plan " + plan.plan_id + " has zero length");

    const double duration_s = total_km / cruise_speed_kmh * 3600.0;
    const double step_s = 600.0;

    auto position_at = [&](double dist_km) -> std::pair<GeoPoint, double> {
        for (const auto& leg : legs) {
            if (dist_km <= leg.start_km + leg.length_km || &leg == &legs.back()) {
                const double f = leg.length_km > 0.0
                                     ? std::clamp((dist_km - leg.start_km) /
                                                      leg.length_km,
                                                  0.0, 1.0)
                                     : 0.0;
                return {gc_interpolate(leg.from, leg.to, f),
                        leg.alt_from + f * (leg.alt_to - leg.alt_from)};
            }
        }
        return {legs.back().to, legs.back().alt_to};
    };

    std::vector<TelemetryRecord> records;
    for (double t = 0.0;; t += step_s) {
        const bool last = t >= duration_s;
        const double at = last ? duration_s : t;
        const double dist = at / 3600.0 * cruise_speed_kmh;
        const auto [pos, alt] = position_at(dist);
        TelemetryRecord r;
        r.timestamp = plan.departure_ts + static_cast<long long>(at);
        r.flight_id = plan.plan_id;
        r.tail_id = plan.tail_id;
        r.origin_airport = "";
        r.destination_airport = "";
        r.position = pos;
        r.altitude_ft = alt;
        r.beam_id = nearest_beam(grid, pos);
        r.satellite_id = "";
        r.score = 1;  // placeholder label, never consumed by predict
        records.push_back(std::move(r));
        if (last) break;
    }
    if (records.size() < 2)
        throw PlanError("plan " + plan.plan_id + " is too short to rank");
    return records;
}

}  // namespace

std::vector<RankedPlan> rank_plans(const std::vector<FlightPlan>& plans,
                                   const nn::Checkpoint& ckpt,
                                   const HandoverAtlas& atlas,
                                   const PerformanceGrid& grid,
                                   double cruise_speed_kmh,
                                   const std::set<std::string>& holidays) {
    std::vector<FlightSequence> sequences;
    sequences.reserve(plans.size());
    for (const auto& plan : plans) {
        const auto trajectory =
            synthesize_trajectory(plan, grid, cruise_speed_kmh);
        const AircraftStats aircraft{plan.tail_id, grid.global.mean_score,
                                     grid.global.mean_devices, 0};
        FlightSequence seq = featurize_flight(trajectory, atlas, grid,
                                              aircraft, ckpt.vocab, holidays);
        apply_minmax(ckpt.norm, seq);
        sequences.push_back(std::move(seq));
    }

    const nn::Prediction pred = nn::predict(ckpt, sequences);

    std::vector<RankedPlan> ranked(plans.size());
    for (size_t i = 0; i < plans.size(); ++i) {
        RankedPlan& r = ranked[i];
        r.plan_id = plans[i].plan_id;
        r.scores = pred.scores[i];
        double sum = 0.0;
        int mn = kNumClasses;
        for (int s : r.scores) {
            sum += s;
            mn = std::min(mn, s);
        }
        r.mean_score = sum / static_cast<double>(r.scores.size());
        r.min_score = mn;
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedPlan& a, const RankedPlan& b) {
                         if (a.mean_score != b.mean_score)
                             return a.mean_score > b.mean_score;
                         if (a.min_score != b.min_score)
                             return a.min_score > b.min_score;
                         return a.plan_id < b.plan_id;
                     });
    return ranked;
}

void save_ranked(const std::vector<RankedPlan>& ranked,
                 const std::string& path) {
    json arr = json::array();
    int rank = 1;
    for (const auto& r : ranked)
        arr.push_back({{"rank", rank++},
                       {"plan_id", r.plan_id},
                       {"mean_predicted_score", r.mean_score},
                       {"min_segment_score", r.min_score},
                       {"scores", r.scores}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << json{{"ranking", arr}}.dump(2) << '\n';
}

}  // namespace linkcast
