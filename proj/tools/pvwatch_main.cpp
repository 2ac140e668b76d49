// pvwatch: simulate a PV-heavy distribution feeder, inject cyber-physical
// attacks, train multi-modal anomaly detectors, and evaluate them.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>

#include "pvwatch/pipeline.hpp"

namespace {

using nlohmann::json;
using namespace pvwatch;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPowerFlow = 3;
constexpr int kExitDataAlignment = 4;
constexpr int kExitSchema = 5;
constexpr int kExitSingleClass = 6;
constexpr int kExitOther = 1;

json load_json_or_exit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

int dispatch(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const PowerFlowDivergence& e) {
        std::cerr << "power flow error: " << e.what() << "\n";
        return kExitPowerFlow;
    } catch (const SchemaMismatch& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const SingleClassLabels& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return kExitSingleClass;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataAlignment;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pvwatch - feeder simulation, PV attack injection and anomaly detection"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_out;
    std::optional<std::uint64_t> sim_seed;
    auto* simulate_cmd = app.add_subcommand("simulate", "generate a normal-operation dataset");
    simulate_cmd->add_option("-c,--config", sim_config, "scenario.json")->required();
    simulate_cmd->add_option("-o,--out", sim_out, "output directory")->required();
    simulate_cmd->add_option("--seed", sim_seed, "override the scenario seed");

    // attack
    std::string atk_config, atk_normal, atk_out;
    std::optional<std::uint64_t> atk_seed;
    std::optional<double> atk_penetration;
    auto* attack_cmd = app.add_subcommand("attack", "mutate a normal run with attacks");
    attack_cmd->add_option("-c,--config", atk_config, "attack.json")->required();
    attack_cmd->add_option("--normal", atk_normal, "normal run directory")->required();
    attack_cmd->add_option("-o,--out", atk_out, "output directory")->required();
    attack_cmd->add_option("--seed", atk_seed, "override the attack seed");
    attack_cmd->add_option("--penetration", atk_penetration,
                           "override the penetration of every spec");
    bool atk_impute = false;
    attack_cmd->add_flag("--impute", atk_impute, "impute missing CSV cells (previous value)");

    // train
    std::string trn_normal, trn_out, trn_detector = "pca-ch", trn_fusion = "most-anomalous";
    std::string trn_weights;
    std::optional<std::uint64_t> trn_seed;
    std::size_t trn_steps = 0;
    int trn_window_min = 15, trn_pca_dims = 5, trn_epochs = 50;
    auto* train_cmd = app.add_subcommand("train", "fit detector models on normal data");
    train_cmd->add_option("--normal", trn_normal, "normal run directory")->required();
    train_cmd->add_option("-o,--out", trn_out, "model output directory")->required();
    train_cmd
        ->add_option("-d,--detector", trn_detector,
                     "nn|dae|ocsvm|iforest|corrupt-rf|pca-ch|ipca")
        ->required();
    train_cmd->add_option("--fusion", trn_fusion, "linear|most-anomalous");
    train_cmd->add_option("--weights", trn_weights, "w1,w2,w3 for linear fusion");
    train_cmd->add_option("--seed", trn_seed, "detector seed (defaults to the scenario seed)");
    train_cmd->add_option("--train-steps", trn_steps,
                          "training span in steps (default: all but the last day)");
    train_cmd->add_option("--window-min", trn_window_min, "sliding window length");
    train_cmd->add_option("--pca-dims", trn_pca_dims, "projected dimensions");
    train_cmd->add_option("--epochs", trn_epochs, "nn/dae training epochs");
    bool trn_impute = false;
    train_cmd->add_flag("--impute", trn_impute, "impute missing CSV cells (previous value)");

    // detect
    std::string det_model, det_data, det_out;
    auto* detect_cmd = app.add_subcommand("detect", "score a run with trained models");
    detect_cmd->add_option("-m,--model", det_model, "model directory")->required();
    detect_cmd->add_option("--data", det_data, "run directory to score")->required();
    detect_cmd->add_option("-o,--out", det_out, "output directory")->required();
    bool det_impute = false;
    detect_cmd->add_flag("--impute", det_impute, "impute missing CSV cells (previous value)");

    // evaluate
    std::string evl_scores, evl_data, evl_out, evl_devices = "pv";
    bool evl_timing = false;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "compare decisions against labels");
    evaluate_cmd->add_option("--scores", evl_scores, "detect output directory")->required();
    evaluate_cmd->add_option("--data", evl_data, "labeled run directory")->required();
    evaluate_cmd->add_option("-o,--out", evl_out, "output directory")->required();
    evaluate_cmd->add_option("--devices", evl_devices,
                             "device pool: pv (PV-equipped houses) or all");
    evaluate_cmd->add_flag("--timing", evl_timing, "also measure per-sample detector timing");

    CLI11_PARSE(app, argc, argv);

    if (simulate_cmd->parsed()) {
        return dispatch([&] {
            const json config = load_json_or_exit(sim_config);
            Scenario scenario = scenario_from_json(config);
            if (sim_seed) {
                scenario.seed = *sim_seed;
                scenario.seed_set = true;
            }
            scenario.validate();
            run_simulate(scenario, sim_out);
            std::cout << "simulated " << scenario.days << " days for " << scenario.n_houses
                      << " houses -> " << sim_out << "\n";
        });
    }
    if (attack_cmd->parsed()) {
        return dispatch([&] {
            const json config = load_json_or_exit(atk_config);
            IngestOptions ingest;
            ingest.impute_missing = atk_impute;
            const LoadedRun normal = load_run(atk_normal, ingest);
            AttackRunConfig attack = attack_config_from_json(config, normal.data.scenario);
            if (atk_seed) {
                attack.seed = *atk_seed;
                attack.seed_set = true;
            }
            if (atk_penetration) {
                for (auto& spec : attack.specs) spec.penetration = *atk_penetration;
            }
            run_attack(atk_normal, attack, atk_out, ingest);
            std::cout << "attacked run written to " << atk_out << "\n";
        });
    }
    if (train_cmd->parsed()) {
        return dispatch([&] {
            TrainOptions options;
            options.ingest.impute_missing = trn_impute;
            const auto kind = detector_kind_from_name(trn_detector);
            if (!kind) throw ConfigError("unknown detector: " + trn_detector);
            options.kind = *kind;
            options.train_steps = trn_steps;
            options.config.window_len = trn_window_min;
            options.config.pca_dims = trn_pca_dims;
            options.config.epochs = trn_epochs;
            if (trn_fusion == "linear") options.fusion.scheme = FusionSettings::Scheme::Linear;
            else if (trn_fusion == "most-anomalous")
                options.fusion.scheme = FusionSettings::Scheme::MostAnomalous;
            else throw ConfigError("unknown fusion scheme: " + trn_fusion);
            if (!trn_weights.empty()) {
                double w1, w2, w3;
                if (std::sscanf(trn_weights.c_str(), "%lf,%lf,%lf", &w1, &w2, &w3) != 3)
                    throw ConfigError("--weights expects w1,w2,w3");
                options.fusion.w1 = w1;
                options.fusion.w2 = w2;
                options.fusion.w3 = w3;
            }
            if (trn_seed) {
                options.config.seed = *trn_seed;
            } else {
                const LoadedRun normal = load_run(trn_normal);
                options.config.seed = normal.data.scenario.seed;
            }
            run_train(trn_normal, options, trn_out);
            std::cout << "models written to " << trn_out << "\n";
        });
    }
    if (detect_cmd->parsed()) {
        return dispatch([&] {
            IngestOptions ingest;
            ingest.impute_missing = det_impute;
            run_detect(det_model, det_data, det_out, ingest);
            std::cout << "scores written to " << det_out << "\n";
        });
    }
    if (evaluate_cmd->parsed()) {
        return dispatch([&] {
            EvaluateOptions options;
            if (evl_devices == "pv") options.devices = EvaluateOptions::Devices::PvOnly;
            else if (evl_devices == "all") options.devices = EvaluateOptions::Devices::All;
            else throw ConfigError("--devices expects pv or all");
            options.timing = evl_timing;
            run_evaluate(evl_scores, evl_data, options, evl_out);
            std::cout << "report written to " << evl_out << "\n";
        });
    }
    return kExitOther;
}
