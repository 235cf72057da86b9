#pragma once

// Feature pipeline: 10-minute resampling, calendar and positional
// augmentation, categorical vocabularies, the 36-component per-timestep
// feature vector with one-hot labels, min-max normalization fitted on the
// training split, and the shuffled 0.8/0.1/0.1 flight split.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkcast/atlas.hpp"
#include "linkcast/grid.hpp"
#include "linkcast/telemetry.hpp"

namespace linkcast {

inline constexpr int kFeatureDim = 36;
inline constexpr int kNumClasses = 10;

// Feature vector layout. The trailing reserved slots hold zeros; they keep
// the declared input width without inventing semantics for them.
enum FeatureIndex : int {
    kFYear = 0,
    kFMonth,
    kFDay,
    kFHour,
    kFMinute,
    kFSeason,
    kFHoliday,
    kFWeekend,
    kFTailCode,
    kFDestCode,
    kFDepCode,
    kFLonSin,
    kFLonCos,
    kFLatSin,
    kFLatCos,
    kFAltitude,
    kFHeading,
    kFDistSinceStart,
    kFTimeSinceStart,
    kFDistToDest,
    kFTimeToDest,
    kFAvgSnr,
    kFAvgMir,
    kFAvgScore,
    kFAvgDevices,
    kFSatCode,
    kFBeamCode,
    kFProbSatHandover,
    kFProbMbbHandover,
    kFProbBbbHandover,
    kFReservedFirst,  // 30..35 reserved, always zero
};

struct CalendarFeatures {
    int year, month, day, hour, minute;
    int season_index;   // 0 winter (Dec-Feb), 1 spring, 2 summer, 3 autumn
    int holiday_index;  // 1 when the date is in the holiday calendar
    int weekend_index;  // 1 for Saturday/Sunday
};

// Holiday calendar entries are "YYYY-MM-DD" strings.
CalendarFeatures calendar_features(long long utc_seconds,
                                   const std::set<std::string>& holidays);

// Integer codes in first-seen order starting at 1; 0 is reserved for
// values unseen at fit time.
struct Vocab {
    std::map<std::string, int> codes;
    std::vector<std::string> ordered;

    void fit(const std::string& value);
    int encode(const std::string& value) const;
    bool operator==(const Vocab&) const = default;
};

struct VocabSet {
    Vocab tail, airport, satellite, beam;
    bool operator==(const VocabSet&) const = default;
};

VocabSet build_vocab(const std::vector<TelemetryRecord>& train_records);

// Keeps the first record, then each record at least 600 s after the last
// kept one; the final record is always kept.
std::vector<TelemetryRecord> resample_10min(
    const std::vector<TelemetryRecord>& flight);

struct TooShortFlight : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewFlights : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlightSequence {
    std::string flight_id;
    std::string tail_id;
    std::vector<std::array<double, kFeatureDim>> inputs;
    std::vector<int> scores;  // 1..10, same length as inputs

    size_t length() const { return inputs.size(); }
    std::array<double, kNumClasses> one_hot(size_t t) const {
        std::array<double, kNumClasses> label{};
        label[static_cast<size_t>(scores[t] - 1)] = 1.0;
        return label;
    }
};

// Builds the unnormalized feature sequence for one resampled flight.
FlightSequence featurize_flight(const std::vector<TelemetryRecord>& resampled,
                                const HandoverAtlas& atlas,
                                const PerformanceGrid& grid,
                                const AircraftStats& aircraft,
                                const VocabSet& vocab,
                                const std::set<std::string>& holidays);

struct NormalizationStats {
    std::array<double, kFeatureDim> min{};
    std::array<double, kFeatureDim> max{};
    bool operator==(const NormalizationStats&) const = default;
};

NormalizationStats fit_minmax(const std::vector<FlightSequence>& train);

// x' = (x - min) / (max - min); constant features map to 0; values are
// clamped to [0, 1] so inference inputs outside the training range stay
// bounded.
void apply_minmax(const NormalizationStats& stats, FlightSequence& seq);

struct SplitIndices {
    std::vector<size_t> train, val, test;
};

// Shuffled whole-flight split, sizes floor(0.8 n) / floor(0.1 n) / rest.
SplitIndices split_dataset(size_t n_flights, std::uint64_t seed);

// Default holiday calendar (US federal holidays 2024-2025); the prepare
// step accepts an override file.
const std::set<std::string>& default_holidays();

// ---- dataset bundle -------------------------------------------------------

struct DatasetBundle {
    VocabSet vocab;
    NormalizationStats norm;
    std::map<std::string, std::string> split;  // flight_id -> train|val|test
    std::vector<FlightSequence> train, val, test;
};

struct MalformedBundle : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void save_vocab(const VocabSet& vocab, const std::string& path);
VocabSet load_vocab(const std::string& path);
void save_norm(const NormalizationStats& stats, const std::string& path);
NormalizationStats load_norm(const std::string& path);
void save_sequences(const std::vector<FlightSequence>& seqs,
                    const std::string& path);
std::vector<FlightSequence> load_sequences(const std::string& path);

void save_bundle(const DatasetBundle& bundle, const std::string& dir);
DatasetBundle load_bundle(const std::string& dir);

}  // namespace linkcast
