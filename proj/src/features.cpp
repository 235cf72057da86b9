#include "linkcast/features.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"

using nlohmann::json;

namespace linkcast {

namespace {

// days-from-civil / civil-from-days, proleptic Gregorian
struct CivilDate {
    int year, month, day;
};

CivilDate civil_from_days(long long z) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long y = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
            static_cast<int>(d)};
}

}  // namespace

CalendarFeatures calendar_features(long long utc_seconds,
                                   const std::set<std::string>& holidays) {
    long long days = utc_seconds / 86400;
    long long secs = utc_seconds % 86400;
    if (secs < 0) {
        secs += 86400;
        days -= 1;
    }
    const CivilDate date = civil_from_days(days);

    CalendarFeatures f{};
    f.year = date.year;
    f.month = date.month;
    f.day = date.day;
    f.hour = static_cast<int>(secs / 3600);
    f.minute = static_cast<int>((secs % 3600) / 60);

    // meteorological northern-hemisphere seasons
    if (date.month == 12 || date.month <= 2)
        f.season_index = 0;
    else if (date.month <= 5)
        f.season_index = 1;
    else if (date.month <= 8)
        f.season_index = 2;
    else
        f.season_index = 3;

    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month,
                  date.day);
    f.holiday_index = holidays.count(buf) ? 1 : 0;

    // 1970-01-01 was a Thursday
    const int weekday = static_cast<int>(((days % 7) + 11) % 7);  // 0 = Sunday
    f.weekend_index = (weekday == 0 || weekday == 6) ? 1 : 0;
    return f;
}

void Vocab::fit(const std::string& value) {
    if (codes.emplace(value, static_cast<int>(ordered.size()) + 1).second)
        ordered.push_back(value);
}

int Vocab::encode(const std::string& value) const {
    const auto it = codes.find(value);
    return it == codes.end() ? 0 : it->second;
}

VocabSet build_vocab(const std::vector<TelemetryRecord>& train_records) {
    VocabSet v;
    for (const auto& r : train_records) {
        v.tail.fit(r.tail_id);
        v.airport.fit(r.origin_airport);
        v.airport.fit(r.destination_airport);
        if (!r.satellite_id.empty()) v.satellite.fit(r.satellite_id);
        if (!r.beam_id.empty()) v.beam.fit(r.beam_id);
    }
    return v;
}

std::vector<TelemetryRecord> resample_10min(
    const std::vector<TelemetryRecord>& flight) {
    if (flight.empty()) return {};
    std::vector<TelemetryRecord> kept;
    kept.push_back(flight.front());
    for (size_t i = 1; i + 1 < flight.size(); ++i)
        if (flight[i].timestamp - kept.back().timestamp >= 600)
            kept.push_back(flight[i]);
    // arrival state always kept; destination-distance features need it
    if (flight.size() > 1) kept.push_back(flight.back());
    return kept;
}

FlightSequence featurize_flight(const std::vector<TelemetryRecord>& resampled,
                                const HandoverAtlas& atlas,
                                const PerformanceGrid& grid,
                                const AircraftStats& aircraft,
                                const VocabSet& vocab,
                                const std::set<std::string>& holidays) {
    const size_t n = resampled.size();
    if (n < 2)
        throw TooShortFlight("featurize_flight: fewer than 2 resampled records");

    FlightSequence seq;
    seq.flight_id = resampled.front().flight_id;
    seq.tail_id = resampled.front().tail_id;
    seq.inputs.resize(n);
    seq.scores.resize(n);

    // cumulative distance along recorded positions
    std::vector<double> cum(n, 0.0);
    for (size_t i = 1; i < n; ++i)
        cum[i] = cum[i - 1] +
                 haversine_km(resampled[i - 1].position, resampled[i].position);
    const double total_km = cum.back();
    const long long t0 = resampled.front().timestamp;
    const long long t_end = resampled.back().timestamp;

    double prev_heading = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const TelemetryRecord& r = resampled[i];
        auto& x = seq.inputs[i];
        x.fill(0.0);

        const CalendarFeatures cal = calendar_features(r.timestamp, holidays);
        x[kFYear] = cal.year;
        x[kFMonth] = cal.month;
        x[kFDay] = cal.day;
        x[kFHour] = cal.hour;
        x[kFMinute] = cal.minute;
        x[kFSeason] = cal.season_index;
        x[kFHoliday] = cal.holiday_index;
        x[kFWeekend] = cal.weekend_index;

        x[kFTailCode] = vocab.tail.encode(r.tail_id);
        x[kFDestCode] = vocab.airport.encode(r.destination_airport);
        x[kFDepCode] = vocab.airport.encode(r.origin_airport);

        const auto [lon_sin, lon_cos] = cyclic_encode(r.position.lon, 360.0);
        const auto [lat_sin, lat_cos] = cyclic_encode(r.position.lat, 360.0);
        x[kFLonSin] = lon_sin;
        x[kFLonCos] = lon_cos;
        x[kFLatSin] = lat_sin;
        x[kFLatCos] = lat_cos;
        x[kFAltitude] = r.altitude_ft;

        double heading = prev_heading;
        if (i + 1 < n && !(r.position == resampled[i + 1].position))
            heading = initial_bearing_deg(r.position, resampled[i + 1].position);
        x[kFHeading] = heading;
        prev_heading = heading;

        x[kFDistSinceStart] = cum[i];
        x[kFTimeSinceStart] = static_cast<double>(r.timestamp - t0);
        x[kFDistToDest] = total_km - cum[i];
        x[kFTimeToDest] = static_cast<double>(t_end - r.timestamp);

        const CellQuery cell = query_cell(grid, r.position, r.beam_id);
        x[kFAvgSnr] = cell.mean_snr;
        x[kFAvgMir] = cell.mean_mir;
        x[kFAvgScore] = cell.mean_score;
        x[kFAvgDevices] = aircraft.mean_recent_devices;

        x[kFSatCode] = vocab.satellite.encode(r.satellite_id);
        x[kFBeamCode] = vocab.beam.encode(r.beam_id);

        const HeadingQuadrant quad = quadrant_of(heading);
        x[kFProbSatHandover] =
            query_probability(atlas, r.position, quad, HandoverKind::Satellite);
        x[kFProbMbbHandover] = query_probability(atlas, r.position, quad,
                                                 HandoverKind::MakeBeforeBreak);
        x[kFProbBbbHandover] = query_probability(atlas, r.position, quad,
                                                 HandoverKind::BreakBeforeMake);

        seq.scores[i] = r.score;
    }
    return seq;
}

NormalizationStats fit_minmax(const std::vector<FlightSequence>& train) {
    NormalizationStats stats;
    bool first = true;
    for (const auto& seq : train) {
        for (const auto& x : seq.inputs) {
            if (first) {
                for (int f = 0; f < kFeatureDim; ++f)
                    stats.min[f] = stats.max[f] = x[f];
                first = false;
                continue;
            }
            for (int f = 0; f < kFeatureDim; ++f) {
                stats.min[f] = std::min(stats.min[f], x[f]);
                stats.max[f] = std::max(stats.max[f], x[f]);
            }
        }
    }
    return stats;
}

void apply_minmax(const NormalizationStats& stats, FlightSequence& seq) {
    for (auto& x : seq.inputs) {
        for (int f = 0; f < kFeatureDim; ++f) {
            const double range = stats.max[f] - stats.min[f];
            const double v = range == 0.0 ? 0.0 : (x[f] - stats.min[f]) / range;
            x[f] = std::clamp(v, 0.0, 1.0);
        }
    }
}

SplitIndices split_dataset(size_t n_flights, std::uint64_t seed) {
    if (n_flights < 10)
        throw TooFewFlights("split_dataset: need at least 10 flights, got " +
                            std::to_string(n_flights));
    std::vector<size_t> order(n_flights);
    for (size_t i = 0; i < n_flights; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (size_t i = n_flights - 1; i > 0; --i) {
        std::uniform_int_distribution<size_t> dist(0, i);
        std::swap(order[i], order[dist(rng)]);
    }
    const size_t n_train = (n_flights * 8) / 10;
    const size_t n_val = n_flights / 10;
    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    split.test.assign(order.begin() + n_train + n_val, order.end());
    return split;
}

const std::set<std::string>& default_holidays() {
    static const std::set<std::string> holidays = {
        "2024-01-01", "2024-01-15", "2024-02-19", "2024-05-27", "2024-06-19",
        "2024-07-04", "2024-09-02", "2024-10-14", "2024-11-11", "2024-11-28",
        "2024-12-25", "2025-01-01", "2025-01-20", "2025-02-17", "2025-05-26",
        "2025-06-19", "2025-07-04", "2025-09-01", "2025-10-13", "2025-11-11",
        "2025-11-27", "2025-12-25"};
    return holidays;
}

// ---- bundle io -------------------------------------------------------------

namespace {

json vocab_to_json(const Vocab& v) { return json(v.ordered); }

Vocab vocab_from_json(const json& j) {
    Vocab v;
    for (const auto& s : j) v.fit(s.get<std::string>());
    return v;
}

}  // namespace

void save_vocab(const VocabSet& vocab, const std::string& path) {
    json root;
    root["tail"] = vocab_to_json(vocab.tail);
    root["airport"] = vocab_to_json(vocab.airport);
    root["satellite"] = vocab_to_json(vocab.satellite);
    root["beam"] = vocab_to_json(vocab.beam);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump(2) << '\n';
}

VocabSet load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedBundle("cannot open vocab file: " + path);
    json root;
    try {
        in >> root;
        VocabSet v;
        v.tail = vocab_from_json(root.at("tail"));
        v.airport = vocab_from_json(root.at("airport"));
        v.satellite = vocab_from_json(root.at("satellite"));
        v.beam = vocab_from_json(root.at("beam"));
        return v;
    } catch (const json::exception& e) {
        throw MalformedBundle(std::string("vocab error: ") + e.what());
    }
}

void save_norm(const NormalizationStats& stats, const std::string& path) {
    json root;
    root["min"] = stats.min;
    root["max"] = stats.max;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump(2) << '\n';
}

NormalizationStats load_norm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedBundle("cannot open normalization file: " + path);
    json root;
    try {
        in >> root;
        NormalizationStats stats;
        for (int f = 0; f < kFeatureDim; ++f) {
            stats.min[f] = root.at("min").at(f).get<double>();
            stats.max[f] = root.at("max").at(f).get<double>();
        }
        return stats;
    } catch (const json::exception& e) {
        throw MalformedBundle(std::string("normalization error: ") + e.what());
    }
}

void save_sequences(const std::vector<FlightSequence>& seqs,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    for (const auto& s : seqs) {
        json j;
        j["flight_id"] = s.flight_id;
        j["tail_id"] = s.tail_id;
        j["inputs"] = s.inputs;
        j["scores"] = s.scores;
        out << j.dump() << '\n';
    }
}

std::vector<FlightSequence> load_sequences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedBundle("cannot open sequences file: " + path);
    std::vector<FlightSequence> seqs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            FlightSequence s;
            s.flight_id = j.at("flight_id").get<std::string>();
            s.tail_id = j.at("tail_id").get<std::string>();
            for (const auto& row : j.at("inputs")) {
                std::array<double, kFeatureDim> x{};
                if (row.size() != kFeatureDim)
                    throw MalformedBundle("input row width != 36");
                for (int f = 0; f < kFeatureDim; ++f) x[f] = row[f].get<double>();
                s.inputs.push_back(x);
            }
            for (const auto& v : j.at("scores")) {
                const int score = v.get<int>();
                if (score < 1 || score > 10)
                    throw MalformedBundle("score out of [1,10]");
                s.scores.push_back(score);
            }
            if (s.inputs.size() != s.scores.size())
                throw MalformedBundle("inputs/scores length mismatch");
            seqs.push_back(std::move(s));
        } catch (const MalformedBundle&) {
            throw;
        } catch (const std::exception& e) {
            throw MalformedBundle("sequences line " + std::to_string(line_no) +
                                  ": " + e.what());
        }
    }
    return seqs;
}

void save_bundle(const DatasetBundle& bundle, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_vocab(bundle.vocab, dir + "/vocab.json");
    save_norm(bundle.norm, dir + "/norm.json");
    json split = json::object();
    for (const auto& [flight, name] : bundle.split) split[flight] = name;
    std::ofstream out(dir + "/split.json");
    if (!out) throw std::runtime_error("cannot open for write: " + dir);
    out << split.dump(2) << '\n';
    save_sequences(bundle.train, dir + "/sequences_train.jsonl");
    save_sequences(bundle.val, dir + "/sequences_val.jsonl");
    save_sequences(bundle.test, dir + "/sequences_test.jsonl");
}

DatasetBundle load_bundle(const std::string& dir) {
    DatasetBundle bundle;
    bundle.vocab = load_vocab(dir + "/vocab.json");
    bundle.norm = load_norm(dir + "/norm.json");
    std::ifstream in(dir + "/split.json");
    if (!in) throw MalformedBundle("cannot open split manifest: " + dir);
    json split;
    try {
        in >> split;
        for (const auto& [flight, name] : split.items())
            bundle.split[flight] = name.get<std::string>();
    } catch (const json::exception& e) {
        throw MalformedBundle(std::string("split manifest error: ") + e.what());
    }
    bundle.train = load_sequences(dir + "/sequences_train.jsonl");
    bundle.val = load_sequences(dir + "/sequences_val.jsonl");
    bundle.test = load_sequences(dir + "/sequences_test.jsonl");
    return bundle;
}

}  // namespace linkcast
