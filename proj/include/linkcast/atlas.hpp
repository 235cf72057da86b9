#pragma once

// Contoured handover regions: historical handover events are partitioned by
// (handover kind, heading quadrant), clustered with DBSCAN, hulled, then
// refined layer by layer with a shrinking epsilon. Each child ring is
// subtracted from its parent, and probabilities follow child/parent event
// counts. A built atlas is immutable and answers position queries.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linkcast/geo.hpp"
#include "linkcast/geometry.hpp"

namespace linkcast {

enum class HandoverKind { Satellite = 0, MakeBeforeBreak = 1, BreakBeforeMake = 2 };

const char* to_string(HandoverKind k);
HandoverKind handover_kind_from_string(const std::string& s);

struct HandoverEvent {
    GeoPoint position;
    HeadingQuadrant quadrant = HeadingQuadrant::NE;
    HandoverKind kind = HandoverKind::Satellite;
    long long timestamp = 0;    // UTC seconds
    std::string flight_id;      // source flight, used for split filtering
};

struct ContourConfig {
    int num_layers = 4;
    double min_distance_km = 10.0;
    double max_distance_km = 50.0;
    int min_samples = 5;
    double eps1_km = 50.0;  // initial DBSCAN epsilon, defaults to max_distance

    bool operator==(const ContourConfig&) const = default;
};

// step = (max_distance - min_distance) / num_layers
double compute_step(const ContourConfig& config);

// Epsilon used when producing the children of layer `layer_i` (0-based):
// max(eps1 - step * (layer_i + 1), min_distance). Non-increasing in layer_i.
double layer_eps(const ContourConfig& config, int layer_i);

struct ContourRegion {
    int region_id = 0;
    std::optional<int> parent_id;
    int layer = 0;  // 0 = parent hull layer
    Ring outer_ring;
    std::vector<Ring> holes;
    long long event_count = 0;
    double probability = 0.0;

    bool operator==(const ContourRegion&) const = default;
};

// Inside the outer ring and inside no hole. Edges count as inside the ring
// they bound, so hole boundaries belong to the deeper region.
bool region_contains(const ContourRegion& region, const GeoPoint& p);

struct HandoverAtlas {
    ContourConfig config;
    long long source_event_count = 0;
    // key "<kind>/<quadrant>", e.g. "Satellite/NE"
    std::map<std::string, std::vector<ContourRegion>> partitions;

    // build diagnostics, not serialized
    std::vector<std::string> skipped_partitions;
    int clip_warnings = 0;

    bool operator==(const HandoverAtlas& o) const {
        return config == o.config &&
               source_event_count == o.source_event_count &&
               partitions == o.partitions;
    }
};

std::string partition_key(HandoverKind kind, HeadingQuadrant quadrant);

HandoverAtlas build_contoured_regions(const std::vector<HandoverEvent>& events,
                                      const ContourConfig& config);

// Probability of the deepest-layer region containing p in the partition,
// 0.0 when no region contains p.
double query_probability(const HandoverAtlas& atlas, const GeoPoint& p,
                         HeadingQuadrant quadrant, HandoverKind kind);

struct MalformedAtlasFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void save_atlas(const HandoverAtlas& atlas, const std::string& path);
HandoverAtlas load_atlas(const std::string& path);

// Line-delimited JSON event files.
struct MalformedEventFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};
void save_events(const std::vector<HandoverEvent>& events,
                 const std::string& path);
std::vector<HandoverEvent> load_events(const std::string& path);

}  // namespace linkcast
