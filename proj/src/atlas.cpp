#include "linkcast/atlas.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "linkcast/dbscan.hpp"

using nlohmann::json;

namespace linkcast {

const char* to_string(HandoverKind k) {
    switch (k) {
        case HandoverKind::Satellite: return "Satellite";
        case HandoverKind::MakeBeforeBreak: return "MakeBeforeBreak";
        case HandoverKind::BreakBeforeMake: return "BreakBeforeMake";
    }
    return "Satellite";
}

HandoverKind handover_kind_from_string(const std::string& s) {
    if (s == "Satellite") return HandoverKind::Satellite;
    if (s == "MakeBeforeBreak") return HandoverKind::MakeBeforeBreak;
    if (s == "BreakBeforeMake") return HandoverKind::BreakBeforeMake;
    throw std::invalid_argument("unknown handover kind: " + s);
}

double compute_step(const ContourConfig& config) {
    return (config.max_distance_km - config.min_distance_km) /
           static_cast<double>(config.num_layers);
}

double layer_eps(const ContourConfig& config, int layer_i) {
    const double eps =
        config.eps1_km - compute_step(config) * static_cast<double>(layer_i + 1);
    return std::max(eps, config.min_distance_km);
}

std::string partition_key(HandoverKind kind, HeadingQuadrant quadrant) {
    return std::string(to_string(kind)) + "/" + to_string(quadrant);
}

bool region_contains(const ContourRegion& region, const GeoPoint& p) {
    if (!ring_contains(region.outer_ring, p)) return false;
    for (const auto& hole : region.holes)
        if (ring_contains(hole, p)) return false;
    return true;
}

namespace {

void validate_config(const ContourConfig& c) {
    if (c.num_layers < 1)
        throw std::invalid_argument("ContourConfig: num_layers < 1");
    if (!(c.min_distance_km > 0.0))
        throw std::invalid_argument("ContourConfig: min_distance <= 0");
    if (c.max_distance_km < c.min_distance_km)
        throw std::invalid_argument("ContourConfig: max_distance < min_distance");
    if (c.min_samples < 1)
        throw std::invalid_argument("ContourConfig: min_samples < 1");
}

// Hull of a cluster; clusters without 3 non-collinear points become a disc
// of radius min_distance around their centroid.
Ring cluster_ring(const std::vector<GeoPoint>& pts, double min_distance_km) {
    if (pts.size() >= 3) {
        try {
            return convex_hull(pts);
        } catch (const DegenerateCluster&) {
        }
    }
    return disc_ring(centroid_of(pts), min_distance_km);
}

struct PartitionBuild {
    std::vector<ContourRegion> regions;
    int clip_warnings = 0;
};

PartitionBuild build_partition(const std::vector<GeoPoint>& points,
                               const ContourConfig& config) {
    PartitionBuild out;
    const long long total = static_cast<long long>(points.size());

    struct Active {
        int region_index;                 // into out.regions
        std::vector<GeoPoint> points;
    };

    // layer 0: parent clusters over the whole partition
    std::vector<int> labels = dbscan(points, config.eps1_km, config.min_samples);
    int n_clusters = 0;
    for (int l : labels) n_clusters = std::max(n_clusters, l + 1);

    std::vector<Active> active;
    for (int c = 0; c < n_clusters; ++c) {
        std::vector<GeoPoint> members;
        for (size_t i = 0; i < points.size(); ++i)
            if (labels[i] == c) members.push_back(points[i]);
        ContourRegion region;
        region.region_id = static_cast<int>(out.regions.size());
        region.layer = 0;
        region.outer_ring = cluster_ring(members, config.min_distance_km);
        region.event_count = static_cast<long long>(members.size());
        region.probability = static_cast<double>(members.size()) /
                             static_cast<double>(total);
        out.regions.push_back(std::move(region));
        active.push_back({static_cast<int>(out.regions.size()) - 1,
                          std::move(members)});
    }

    // refinement layers with shrinking epsilon
    for (int i = 0; i < config.num_layers; ++i) {
        const double eps2 = layer_eps(config, i);
        std::vector<Active> next;
        for (const Active& parent : active) {
            const std::vector<int> sub =
                dbscan(parent.points, eps2, config.min_samples);
            int n_children = 0;
            for (int l : sub) n_children = std::max(n_children, l + 1);
            const long long parent_count =
                out.regions[parent.region_index].event_count;
            for (int c = 0; c < n_children; ++c) {
                std::vector<GeoPoint> members;
                for (size_t k = 0; k < parent.points.size(); ++k)
                    if (sub[k] == c) members.push_back(parent.points[k]);
                Ring ring = cluster_ring(members, config.min_distance_km);
                const Ring& parent_ring =
                    out.regions[parent.region_index].outer_ring;
                if (!ring_inside(ring, parent_ring)) {
                    ring = clip_to_convex(ring, parent_ring);
                    ++out.clip_warnings;
                    if (ring.size() < 3) continue;
                }
                ContourRegion child;
                child.region_id = static_cast<int>(out.regions.size());
                child.parent_id = out.regions[parent.region_index].region_id;
                child.layer = i + 1;
                child.outer_ring = ring;
                child.event_count = static_cast<long long>(members.size());
                child.probability = static_cast<double>(members.size()) /
                                    static_cast<double>(parent_count);
                out.regions[parent.region_index].holes.push_back(
                    child.outer_ring);
                out.regions.push_back(std::move(child));
                next.push_back({static_cast<int>(out.regions.size()) - 1,
                                std::move(members)});
            }
        }
        active = std::move(next);
    }
    return out;
}

}  // namespace

HandoverAtlas build_contoured_regions(const std::vector<HandoverEvent>& events,
                                      const ContourConfig& config) {
    validate_config(config);

    HandoverAtlas atlas;
    atlas.config = config;
    atlas.source_event_count = static_cast<long long>(events.size());

    constexpr HandoverKind kKinds[] = {HandoverKind::Satellite,
                                       HandoverKind::MakeBeforeBreak,
                                       HandoverKind::BreakBeforeMake};
    constexpr HeadingQuadrant kQuads[] = {HeadingQuadrant::NE,
                                          HeadingQuadrant::SE,
                                          HeadingQuadrant::SW,
                                          HeadingQuadrant::NW};

    std::vector<std::pair<std::string, std::vector<GeoPoint>>> buckets;
    for (HandoverKind k : kKinds)
        for (HeadingQuadrant q : kQuads)
            buckets.emplace_back(partition_key(k, q), std::vector<GeoPoint>{});
    for (const auto& e : events) {
        const std::string key = partition_key(e.kind, e.quadrant);
        for (auto& [k, pts] : buckets)
            if (k == key) {
                pts.push_back(e.position);
                break;
            }
    }

    // Partitions are independent; each slot is written by one thread only,
    // so the result does not depend on scheduling.
    std::vector<PartitionBuild> built(buckets.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(buckets.size()); ++i) {
        if (!buckets[i].second.empty())
            built[i] = build_partition(buckets[i].second, config);
    }

    // renumber region ids to be unique across the atlas, deterministic order
    int next_id = 0;
    for (size_t i = 0; i < buckets.size(); ++i) {
        if (buckets[i].second.empty()) {
            atlas.skipped_partitions.push_back(buckets[i].first);
            continue;
        }
        auto regions = std::move(built[i].regions);
        const int offset = next_id;
        for (auto& r : regions) {
            r.region_id += offset;
            if (r.parent_id) r.parent_id = *r.parent_id + offset;
        }
        next_id += static_cast<int>(regions.size());
        atlas.clip_warnings += built[i].clip_warnings;
        if (!regions.empty())
            atlas.partitions.emplace(buckets[i].first, std::move(regions));
    }
    return atlas;
}

double query_probability(const HandoverAtlas& atlas, const GeoPoint& p,
                         HeadingQuadrant quadrant, HandoverKind kind) {
    const auto it = atlas.partitions.find(partition_key(kind, quadrant));
    if (it == atlas.partitions.end()) return 0.0;

    std::vector<const ContourRegion*> order;
    order.reserve(it->second.size());
    for (const auto& r : it->second) order.push_back(&r);
    std::sort(order.begin(), order.end(),
              [](const ContourRegion* a, const ContourRegion* b) {
                  if (a->layer != b->layer) return a->layer > b->layer;
                  return a->region_id < b->region_id;
              });
    for (const ContourRegion* r : order)
        if (region_contains(*r, p)) return r->probability;
    return 0.0;
}

namespace {

json ring_to_json(const Ring& ring) {
    json arr = json::array();
    for (const auto& p : ring) arr.push_back({p.lon, p.lat});
    return arr;
}

Ring ring_from_json(const json& arr) {
    if (!arr.is_array()) throw MalformedAtlasFile("ring is not an array");
    Ring ring;
    for (const auto& v : arr) {
        if (!v.is_array() || v.size() != 2)
            throw MalformedAtlasFile("ring vertex is not a [lon, lat] pair");
        ring.push_back(GeoPoint(v[1].get<double>(), v[0].get<double>()));
    }
    return ring;
}

}  // namespace

void save_atlas(const HandoverAtlas& atlas, const std::string& path) {
    json root;
    root["config"] = {{"num_layers", atlas.config.num_layers},
                      {"min_distance", atlas.config.min_distance_km},
                      {"max_distance", atlas.config.max_distance_km},
                      {"min_samples", atlas.config.min_samples},
                      {"eps1", atlas.config.eps1_km}};
    root["source_event_count"] = atlas.source_event_count;
    json parts = json::object();
    for (const auto& [key, regions] : atlas.partitions) {
        json arr = json::array();
        for (const auto& r : regions) {
            json jr;
            jr["region_id"] = r.region_id;
            if (r.parent_id)
                jr["parent_id"] = *r.parent_id;
            else
                jr["parent_id"] = nullptr;
            jr["layer"] = r.layer;
            jr["outer_ring"] = ring_to_json(r.outer_ring);
            json holes = json::array();
            for (const auto& h : r.holes) holes.push_back(ring_to_json(h));
            jr["holes"] = holes;
            jr["event_count"] = r.event_count;
            jr["probability"] = r.probability;
            arr.push_back(std::move(jr));
        }
        parts[key] = std::move(arr);
    }
    root["partitions"] = std::move(parts);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump(2) << '\n';
}

HandoverAtlas load_atlas(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedAtlasFile("cannot open atlas file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw MalformedAtlasFile(std::string("atlas parse error: ") + e.what());
    }

    HandoverAtlas atlas;
    try {
        const json& c = root.at("config");
        atlas.config.num_layers = c.at("num_layers").get<int>();
        atlas.config.min_distance_km = c.at("min_distance").get<double>();
        atlas.config.max_distance_km = c.at("max_distance").get<double>();
        atlas.config.min_samples = c.at("min_samples").get<int>();
        atlas.config.eps1_km = c.at("eps1").get<double>();
        atlas.source_event_count = root.at("source_event_count").get<long long>();
        for (const auto& [key, arr] : root.at("partitions").items()) {
            std::vector<ContourRegion> regions;
            for (const auto& jr : arr) {
                ContourRegion r;
                r.region_id = jr.at("region_id").get<int>();
                if (!jr.at("parent_id").is_null())
                    r.parent_id = jr.at("parent_id").get<int>();
                r.layer = jr.at("layer").get<int>();
                r.outer_ring = ring_from_json(jr.at("outer_ring"));
                for (const auto& h : jr.at("holes"))
                    r.holes.push_back(ring_from_json(h));
                r.event_count = jr.at("event_count").get<long long>();
                r.probability = jr.at("probability").get<double>();
                if (r.probability < 0.0 || r.probability > 1.0)
                    throw MalformedAtlasFile("probability out of [0,1] in region " +
                                             std::to_string(r.region_id));
                regions.push_back(std::move(r));
            }
            atlas.partitions.emplace(key, std::move(regions));
        }
    } catch (const json::exception& e) {
        throw MalformedAtlasFile(std::string("atlas field error: ") + e.what());
    }
    return atlas;
}

void save_events(const std::vector<HandoverEvent>& events,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    for (const auto& e : events) {
        json j;
        j["lat"] = e.position.lat;
        j["lon"] = e.position.lon;
        j["quadrant"] = to_string(e.quadrant);
        j["kind"] = to_string(e.kind);
        j["timestamp"] = e.timestamp;
        j["flight_id"] = e.flight_id;
        out << j.dump() << '\n';
    }
}

std::vector<HandoverEvent> load_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedEventFile("cannot open events file: " + path);
    std::vector<HandoverEvent> events;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            HandoverEvent e;
            e.position = GeoPoint(j.at("lat").get<double>(),
                                  j.at("lon").get<double>());
            e.quadrant = quadrant_from_string(j.at("quadrant").get<std::string>());
            e.kind = handover_kind_from_string(j.at("kind").get<std::string>());
            e.timestamp = j.at("timestamp").get<long long>();
            if (j.contains("flight_id"))
                e.flight_id = j.at("flight_id").get<std::string>();
            events.push_back(std::move(e));
        } catch (const std::exception& e) {
            throw MalformedEventFile("events line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return events;
}

}  // namespace linkcast
