#include "linkcast/rule.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

using nlohmann::json;

namespace linkcast {

RuleTable build_rule_table(const std::vector<TelemetryRecord>& train_records,
                           double circumradius_km,
                           const std::map<std::string, GeoPoint>& beam_centers) {
    if (train_records.empty())
        throw EmptyTraining("build_rule_table: empty training records");

    RuleTable table;
    table.circumradius_km = circumradius_km;
    table.beam_anchors = beam_centers.empty()
                             ? estimate_beam_centers(train_records)
                             : beam_centers;

    std::map<std::string, std::pair<double, long long>> acc;
    double gsum = 0.0;
    for (const auto& r : train_records) {
        gsum += static_cast<double>(r.score);
        if (r.beam_id.empty()) continue;
        const auto a = table.beam_anchors.find(r.beam_id);
        if (a == table.beam_anchors.end()) continue;
        const HexIndex cell = hex_index(r.position, a->second, circumradius_km);
        auto& [sum, n] = acc[cell_key(r.beam_id, cell)];
        sum += static_cast<double>(r.score);
        n += 1;
    }
    for (const auto& [key, sn] : acc)
        table.cell_means.emplace(key, sn.first / static_cast<double>(sn.second));
    table.global_mean = gsum / static_cast<double>(train_records.size());
    return table;
}

int round_score(double mean) {
    const double fl = std::floor(mean);
    const double frac = mean - fl;
    double rounded;
    if (frac < 0.5)
        rounded = fl;
    else if (frac > 0.5)
        rounded = fl + 1.0;
    else
        rounded = std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;  // ties to even
    return static_cast<int>(std::clamp(rounded, 1.0, 10.0));
}

int predict_rule_at(const RuleTable& table, const GeoPoint& p,
                    const std::string& beam_id) {
    const auto a = table.beam_anchors.find(beam_id);
    if (a != table.beam_anchors.end()) {
        const HexIndex cell = hex_index(p, a->second, table.circumradius_km);
        const auto it = table.cell_means.find(cell_key(beam_id, cell));
        if (it != table.cell_means.end()) return round_score(it->second);
    }
    return round_score(table.global_mean);
}

std::vector<std::vector<int>> predict_rule(
    const RuleTable& table,
    const std::vector<std::vector<TelemetryRecord>>& flights) {
    std::vector<std::vector<int>> out(flights.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(flights.size()); ++i) {
        const auto& flight = flights[static_cast<size_t>(i)];
        auto& scores = out[static_cast<size_t>(i)];
        scores.resize(flight.size());
        for (size_t t = 0; t < flight.size(); ++t)
            scores[t] =
                predict_rule_at(table, flight[t].position, flight[t].beam_id);
    }
    return out;
}

void save_rule_table(const RuleTable& table, const std::string& path) {
    json root;
    root["circumradius_km"] = table.circumradius_km;
    json anchors = json::object();
    for (const auto& [beam, p] : table.beam_anchors)
        anchors[beam] = {p.lon, p.lat};
    root["_anchors"] = std::move(anchors);
    root["_global"] = table.global_mean;
    json cells = json::object();
    for (const auto& [key, mean] : table.cell_means) cells[key] = mean;
    root["cells"] = std::move(cells);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump(2) << '\n';
}

RuleTable load_rule_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedRuleFile("cannot open rule table: " + path);
    json root;
    try {
        in >> root;
        RuleTable table;
        table.circumradius_km = root.at("circumradius_km").get<double>();
        for (const auto& [beam, arr] : root.at("_anchors").items())
            table.beam_anchors.emplace(
                beam, GeoPoint(arr[1].get<double>(), arr[0].get<double>()));
        table.global_mean = root.at("_global").get<double>();
        for (const auto& [key, mean] : root.at("cells").items())
            table.cell_means.emplace(key, mean.get<double>());
        return table;
    } catch (const json::exception& e) {
        throw MalformedRuleFile(std::string("rule table error: ") + e.what());
    }
}

}  // namespace linkcast
