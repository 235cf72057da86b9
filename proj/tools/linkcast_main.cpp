// Command-line front end: generate synthetic datasets, prepare feature
// bundles, train the sequence model, evaluate the three predictors and rank
// candidate flight plans.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "linkcast/atlas.hpp"
#include "linkcast/features.hpp"
#include "linkcast/grid.hpp"
#include "linkcast/knn.hpp"
#include "linkcast/metrics.hpp"
#include "linkcast/nn.hpp"
#include "linkcast/pipeline.hpp"
#include "linkcast/rule.hpp"
#include "linkcast/synth.hpp"
#include "linkcast/telemetry.hpp"

namespace fs = std::filesystem;
using namespace linkcast;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitMalformedInput = 3;
constexpr int kExitEmptySplit = 4;
constexpr int kExitMissingArtifact = 5;
constexpr int kExitBadPlan = 6;

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 long long seed_override) {
    ScenarioConfig config;
    try {
        config = config_path.empty() ? ScenarioConfig{}
                                     : load_scenario_config(config_path);
        if (seed_override >= 0)
            config.seed = static_cast<std::uint64_t>(seed_override);
        fs::create_directories(out_dir);
        const Scenario scenario = generate_scenario(config);
        write_records(scenario.records, out_dir + "/records.jsonl");
        save_events(scenario.events, out_dir + "/events.jsonl");
        save_beams(scenario.beams, out_dir + "/beams.json");
        save_airports(scenario.airports, out_dir + "/airports.json");
        save_scenario_config(config, out_dir + "/scenario.json");
        std::cout << "generated flights: " << config.n_flights
                  << "\nrecords: " << scenario.records.size()
                  << "\nhandover events: " << scenario.events.size()
                  << "\nbeams: " << scenario.beams.size()
                  << "\nairports: " << scenario.airports.size() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_prepare(const std::string& records_path, const std::string& events_path,
                const std::string& out_dir, std::uint64_t seed,
                double cell_radius_km, const ContourConfig& contour,
                const std::string& beams_path,
                const std::string& holidays_path) {
    try {
        PrepareOptions options;
        options.seed = seed;
        options.cell_radius_km = cell_radius_km;
        options.contour = contour;
        if (!beams_path.empty())
            for (const auto& b : load_beams(beams_path))
                options.beam_centers.emplace(b.beam_id, b.center);
        if (!holidays_path.empty()) {
            std::ifstream in(holidays_path);
            if (!in) throw MalformedRecord(0, "cannot open holidays file");
            options.holidays.clear();
            std::string line;
            while (std::getline(in, line))
                if (!line.empty()) options.holidays.insert(line);
        }

        const auto records = read_records(records_path);
        const auto events = load_events(events_path);
        const Prepared prepared = prepare_dataset(records, events, options);
        save_prepared(prepared, out_dir);
        size_t regions = 0;
        for (const auto& [k, v] : prepared.atlas.partitions) regions += v.size();
        std::cout << "flights: train " << prepared.bundle.train.size() << " val "
                  << prepared.bundle.val.size() << " test "
                  << prepared.bundle.test.size()
                  << "\natlas regions: " << regions
                  << "\ngrid cells: " << prepared.grid.cells.size() << "\n";
        return 0;
    } catch (const MalformedRecord& e) {
        std::cerr << "malformed records: " << e.what() << "\n";
        return kExitMalformedInput;
    } catch (const MalformedEventFile& e) {
        std::cerr << "malformed events: " << e.what() << "\n";
        return kExitMalformedInput;
    } catch (const TooFewFlights& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return kExitMalformedInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_train(const std::string& bundle_dir, const std::string& out_dir,
              nn::TrainConfig train_cfg) {
    try {
        const DatasetBundle bundle = load_bundle(bundle_dir);
        nn::LstmConfig cfg;
        const nn::TrainResult result =
            nn::train(cfg, train_cfg, bundle.train, bundle.val);

        fs::create_directories(out_dir);
        nn::Checkpoint ckpt;
        ckpt.params = result.best;
        ckpt.train_cfg = train_cfg;
        ckpt.class_weights = result.weights;
        ckpt.norm = bundle.norm;
        ckpt.vocab = bundle.vocab;
        nn::save_checkpoint(ckpt, out_dir + "/checkpoint.json");
        nn::write_train_log(result.log, out_dir + "/training_log.csv");
        std::cout << "epochs: " << result.log.size()
                  << "\nbest epoch: " << result.best_epoch
                  << "\nbest val loss: " << result.best_val << "\n";
        return 0;
    } catch (const nn::EmptySplit& e) {
        std::cerr << "empty split: " << e.what() << "\n";
        return kExitEmptySplit;
    } catch (const MalformedBundle& e) {
        std::cerr << "bundle error: " << e.what() << "\n";
        return kExitMalformedInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_evaluate(const std::string& bundle_dir, const std::string& model,
                 const std::string& checkpoint_path, const std::string& out_path,
                 int within_k) {
    try {
        const Prepared prepared = load_prepared(bundle_dir);
        FlightScores truth;
        for (const auto& s : prepared.bundle.test) truth.push_back(s.scores);
        if (truth.empty()) {
            std::cerr << "empty test split\n";
            return kExitEmptySplit;
        }

        const fs::path out_dir_path = fs::path(out_path).parent_path();
        const fs::path csv_dir = out_dir_path.empty() ? "." : out_dir_path;

        EvalReport report;
        FlightScores predicted;
        if (model == "lstm") {
            if (!fs::exists(checkpoint_path)) {
                std::cerr << "missing checkpoint: " << checkpoint_path << "\n";
                return kExitMissingArtifact;
            }
            const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint_path);
            report = evaluate_model(
                "lstm", truth,
                [&] {
                    predicted = nn::predict(ckpt, prepared.bundle.test).scores;
                    return predicted;
                },
                within_k);
        } else if (model == "knn") {
            if (prepared.bundle.train.empty()) {
                std::cerr << "missing training sequences for knn\n";
                return kExitMissingArtifact;
            }
            const KnnIndex index = KnnIndex::build(prepared.bundle.train);
            index.save((csv_dir / "knn_index.json").string());
            report = evaluate_model(
                "knn", truth,
                [&] {
                    predicted = index.predict(prepared.bundle.test);
                    return predicted;
                },
                within_k);
        } else {
            report = evaluate_model(
                "rule", truth,
                [&] {
                    predicted =
                        predict_rule(prepared.rule, prepared.resampled_test);
                    return predicted;
                },
                within_k);
        }

        save_report(report, out_path);
        const std::string prefix = (csv_dir / model).string();
        export_confusion_csv(report.confusion, prefix + "_confusion.csv");
        export_correlation_csv(report.correlation_histogram,
                               prefix + "_correlation.csv");
        export_error_trace_csv(prepared.resampled_test, truth, predicted,
                               prefix + "_error_trace.csv");

        std::printf("model: %s\n", report.model.c_str());
        std::printf("precision: %.1f  recall: %.1f  f1: %.1f  accuracy: %.1f\n",
                    report.precision_pct, report.recall_pct, report.f1_pct,
                    report.accuracy_pct);
        std::printf("rmse: %.3f  within-%d: %.1f%%\n", report.rmse,
                    report.within_k, report.within_k_pct);
        std::printf("inference: %.3f s over %lld timesteps\n",
                    report.timing_seconds, report.timesteps);
        return 0;
    } catch (const MalformedBundle& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return kExitMissingArtifact;
    } catch (const MalformedRuleFile& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return kExitMissingArtifact;
    } catch (const nn::CorruptCheckpoint& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return kExitMissingArtifact;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_rank(const std::string& plans_path, const std::string& checkpoint_path,
             const std::string& atlas_path, const std::string& grid_path,
             const std::string& out_path, double cruise_speed_kmh) {
    try {
        const auto plans = load_plans(plans_path);
        const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint_path);
        const HandoverAtlas atlas = load_atlas(atlas_path);
        const PerformanceGrid grid = load_grid(grid_path);

        // warn when plans do not share a city pair
        for (size_t i = 1; i < plans.size(); ++i) {
            const auto& a = plans[0];
            const auto& b = plans[i];
            if (haversine_km(a.waypoints.front().first,
                             b.waypoints.front().first) > 50.0 ||
                haversine_km(a.waypoints.back().first,
                             b.waypoints.back().first) > 50.0) {
                std::cerr << "warning: plans " << a.plan_id << " and "
                          << b.plan_id << " do not share a city pair\n";
                break;
            }
        }

        const auto ranked =
            rank_plans(plans, ckpt, atlas, grid, cruise_speed_kmh);
        save_ranked(ranked, out_path);
        int rank = 1;
        for (const auto& r : ranked)
            std::printf("%d. %s  mean %.3f  min %d\n", rank++,
                        r.plan_id.c_str(), r.mean_score, r.min_score);
        return 0;
    } catch (const PlanError& e) {
        std::cerr << "plan error: " << e.what() << "\n";
        return kExitBadPlan;
    } catch (const TooShortFlight& e) {
        std::cerr << "plan error: " << e.what() << "\n";
        return kExitBadPlan;
    } catch (const nn::CorruptCheckpoint& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return kExitMissingArtifact;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flight-path network performance prediction toolkit"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "generate a synthetic dataset");
    std::string gen_config, gen_out = "data";
    long long gen_seed = -1;
    gen->add_option("--config", gen_config, "scenario config JSON");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--seed", gen_seed, "override the scenario seed");

    auto* prep = app.add_subcommand("prepare", "build atlas, grid and bundle");
    std::string prep_records, prep_events, prep_out = "bundle", prep_beams,
                prep_holidays;
    std::uint64_t prep_seed = 42;
    double cell_radius = 50.0;
    ContourConfig contour;
    prep->add_option("--records", prep_records, "telemetry JSONL")->required();
    prep->add_option("--events", prep_events, "handover events JSONL")
        ->required();
    prep->add_option("--out", prep_out, "bundle directory")->required();
    prep->add_option("--seed", prep_seed, "split shuffle seed");
    prep->add_option("--cell-radius-km", cell_radius, "hex circumradius (km)");
    prep->add_option("--beams", prep_beams, "beam layout JSON (grid anchors)");
    prep->add_option("--holidays", prep_holidays,
                     "holiday dates file, one YYYY-MM-DD per line");
    prep->add_option("--contour-layers", contour.num_layers, "contour layers");
    prep->add_option("--contour-min-km", contour.min_distance_km,
                     "densest-layer epsilon (km)");
    prep->add_option("--contour-max-km", contour.max_distance_km,
                     "outermost epsilon (km)");
    prep->add_option("--contour-min-samples", contour.min_samples,
                     "DBSCAN min samples");
    prep->add_option("--contour-eps1", contour.eps1_km, "initial epsilon (km)");

    auto* tr = app.add_subcommand("train", "train the sequence model");
    std::string train_bundle, train_out = "model";
    nn::TrainConfig train_cfg;
    train_cfg.max_epochs = 60;
    bool unweighted = false;
    tr->add_option("--bundle", train_bundle, "bundle directory")->required();
    tr->add_option("--out", train_out, "output directory")->required();
    tr->add_option("--seed", train_cfg.seed, "training seed");
    tr->add_option("--max-epochs", train_cfg.max_epochs, "epoch cap");
    tr->add_option("--lr", train_cfg.lr, "initial learning rate");
    tr->add_option("--weight-decay", train_cfg.weight_decay, "decay factor");
    tr->add_option("--batch-size", train_cfg.batch_size, "mini-batch size");
    tr->add_option("--accumulation", train_cfg.accumulation_steps,
                   "gradient accumulation factor");
    tr->add_option("--dropout", train_cfg.dropout_rate, "dropout rate");
    tr->add_option("--early-stop", train_cfg.early_stop_patience,
                   "early stopping patience (epochs)");
    tr->add_flag("--unweighted", unweighted,
                 "disable class weighting in the loss");

    auto* ev = app.add_subcommand("evaluate",
                                  "evaluate a model on the test split");
    std::string eval_bundle, eval_model = "lstm",
                eval_ckpt = "model/checkpoint.json", eval_out;
    int within_k = 1;
    ev->add_option("--bundle", eval_bundle, "bundle directory")->required();
    ev->add_option("--model", eval_model, "lstm|knn|rule")
        ->check(CLI::IsMember({"lstm", "knn", "rule"}));
    ev->add_option("--checkpoint", eval_ckpt, "trained checkpoint (lstm)");
    ev->add_option("--out", eval_out, "report JSON path");
    ev->add_option("--k", within_k, "within-k tolerance for the rate metric");

    auto* rk = app.add_subcommand("rank", "rank candidate flight plans");
    std::string rank_plans_path, rank_ckpt, rank_atlas, rank_grid,
                rank_out = "ranked.json";
    double cruise = 900.0;
    rk->add_option("--plans", rank_plans_path, "plans JSON")->required();
    rk->add_option("--checkpoint", rank_ckpt, "trained checkpoint")->required();
    rk->add_option("--atlas", rank_atlas, "handover atlas JSON")->required();
    rk->add_option("--grid", rank_grid, "performance grid JSON")->required();
    rk->add_option("--out", rank_out, "ranked output JSON");
    rk->add_option("--cruise-speed", cruise, "cruise speed (km/h)");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) return cmd_generate(gen_config, gen_out, gen_seed);
    if (prep->parsed())
        return cmd_prepare(prep_records, prep_events, prep_out, prep_seed,
                           cell_radius, contour, prep_beams, prep_holidays);
    if (tr->parsed()) {
        train_cfg.weighted_loss = !unweighted;
        return cmd_train(train_bundle, train_out, train_cfg);
    }
    if (ev->parsed()) {
        if (eval_out.empty())
            eval_out = eval_bundle + "/report_" + eval_model + ".json";
        return cmd_evaluate(eval_bundle, eval_model, eval_ckpt, eval_out,
                            within_k);
    }
    if (rk->parsed())
        return cmd_rank(rank_plans_path, rank_ckpt, rank_atlas, rank_grid,
                        rank_out, cruise);
    return 0;
}
