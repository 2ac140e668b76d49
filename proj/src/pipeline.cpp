#include "pvwatch/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pvwatch/metrics.hpp"
#include "pvwatch/svg.hpp"

namespace pvwatch {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hash_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

namespace {

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return json::parse(in);
}

} // namespace

void RunManifest::write(const fs::path& dir) const {
    json j;
    j["schema_version"] = 1;
    j["tool"] = "pvwatch";
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["config"] = json::parse(config_json);
    j["config_hash"] = config_hash;
    j["parents"] = parents;
    j["parent_hashes"] = parent_hashes;
    j["outputs"] = outputs;
    j["created"] = created.empty() ? now_iso8601() : created;
    write_text(dir / "manifest.json", j.dump(2) + "\n");
}

RunManifest load_manifest(const fs::path& dir) {
    const json j = read_json_file(dir / "manifest.json");
    if (!j.contains("schema_version") || j.at("schema_version") != 1)
        throw SchemaMismatch("unsupported manifest schema in " + dir.string());
    RunManifest m;
    m.command = j.at("command");
    m.config_json = j.at("config").dump();
    m.config_hash = j.at("config_hash");
    m.parents = j.at("parents").get<std::vector<std::string>>();
    m.parent_hashes = j.at("parent_hashes").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.created = j.at("created");
    if (hash_hex(fnv1a64(m.config_json)) != m.config_hash)
        throw SchemaMismatch("manifest config hash mismatch in " + dir.string());
    return m;
}

// ---------------------------------------------------------------------------
// config parsing

Scenario scenario_from_json(const json& j) {
    Scenario sc;
    try {
        if (j.contains("n_houses")) sc.n_houses = j.at("n_houses");
        if (j.contains("pv_fraction")) sc.pv_fraction = j.at("pv_fraction");
        if (j.contains("days")) sc.days = j.at("days");
        if (j.contains("step_seconds")) sc.step_seconds = j.at("step_seconds");
        if (j.contains("seed")) {
            sc.seed = j.at("seed");
            sc.seed_set = true;
        }
        if (j.contains("feeder")) {
            const auto& f = j.at("feeder");
            if (f.contains("source_voltage")) {
                const auto v = f.at("source_voltage").get<std::vector<double>>();
                if (v.size() != 2) throw ConfigError("source_voltage must be [re, im]");
                sc.feeder.source_voltage = {v[0], v[1]};
            }
            if (f.contains("series_impedance")) {
                const auto z = f.at("series_impedance").get<std::vector<double>>();
                if (z.size() != 2) throw ConfigError("series_impedance must be [R, X]");
                sc.feeder.series_impedance = {z[0], z[1]};
            }
            if (f.contains("base_power_kva")) sc.feeder.base_power_kva = f.at("base_power_kva");
            if (f.contains("base_voltage_kv")) sc.feeder.base_voltage_kv = f.at("base_voltage_kv");
        }
        if (j.contains("weather")) {
            const auto& w = j.at("weather");
            if (w.contains("sunrise_min")) sc.weather.sunrise_min = w.at("sunrise_min");
            if (w.contains("sunset_min")) sc.weather.sunset_min = w.at("sunset_min");
            if (w.contains("clear_sky_peak")) sc.weather.clear_sky_peak = w.at("clear_sky_peak");
            if (w.contains("cloud_event_rate_per_hour"))
                sc.weather.cloud_event_rate_per_hour = w.at("cloud_event_rate_per_hour");
            if (w.contains("cloud_depth")) sc.weather.cloud_depth = w.at("cloud_depth");
            if (w.contains("noise_std")) sc.weather.noise_std = w.at("noise_std");
        }
        if (j.contains("load")) {
            const auto& l = j.at("load");
            if (l.contains("base_kw_min")) sc.load.base_kw_min = l.at("base_kw_min");
            if (l.contains("base_kw_max")) sc.load.base_kw_max = l.at("base_kw_max");
            if (l.contains("ar1_phi")) sc.load.ar1_phi = l.at("ar1_phi");
            if (l.contains("ar1_std_kw")) sc.load.ar1_std_kw = l.at("ar1_std_kw");
            if (l.contains("min_demand_kw")) sc.load.min_demand_kw = l.at("min_demand_kw");
        }
        if (j.contains("pv")) {
            const auto& p = j.at("pv");
            if (p.contains("rating_kw_min")) sc.pv.rating_kw_min = p.at("rating_kw_min");
            if (p.contains("rating_kw_max")) sc.pv.rating_kw_max = p.at("rating_kw_max");
            if (p.contains("power_factor")) sc.pv.power_factor = p.at("power_factor");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad scenario config: ") + e.what());
    }
    return sc;
}

json scenario_to_json(const Scenario& sc) {
    json j;
    j["n_houses"] = sc.n_houses;
    j["pv_fraction"] = sc.pv_fraction;
    j["days"] = sc.days;
    j["step_seconds"] = sc.step_seconds;
    j["seed"] = sc.seed;
    j["feeder"] = {
        {"source_voltage", {sc.feeder.source_voltage.real(), sc.feeder.source_voltage.imag()}},
        {"series_impedance",
         {sc.feeder.series_impedance.real(), sc.feeder.series_impedance.imag()}},
        {"base_power_kva", sc.feeder.base_power_kva},
        {"base_voltage_kv", sc.feeder.base_voltage_kv}};
    j["weather"] = {{"sunrise_min", sc.weather.sunrise_min},
                    {"sunset_min", sc.weather.sunset_min},
                    {"clear_sky_peak", sc.weather.clear_sky_peak},
                    {"cloud_event_rate_per_hour", sc.weather.cloud_event_rate_per_hour},
                    {"cloud_depth", sc.weather.cloud_depth},
                    {"noise_std", sc.weather.noise_std}};
    j["load"] = {{"base_kw_min", sc.load.base_kw_min},
                 {"base_kw_max", sc.load.base_kw_max},
                 {"ar1_phi", sc.load.ar1_phi},
                 {"ar1_std_kw", sc.load.ar1_std_kw},
                 {"min_demand_kw", sc.load.min_demand_kw}};
    j["pv"] = {{"rating_kw_min", sc.pv.rating_kw_min},
               {"rating_kw_max", sc.pv.rating_kw_max},
               {"power_factor", sc.pv.power_factor}};
    return j;
}

AttackRunConfig attack_config_from_json(const json& j, const Scenario& scenario) {
    AttackRunConfig config;
    try {
        if (j.contains("seed")) {
            config.seed = j.at("seed");
            config.seed_set = true;
        }
        json attacks = json::array();
        if (j.contains("attacks")) attacks = j.at("attacks");
        else attacks.push_back(j); // single-spec shorthand
        for (const auto& a : attacks) {
            AttackSpec spec;
            const auto kind = attack_kind_from_name(a.at("kind"));
            if (!kind) throw ConfigError("unknown attack kind: " + a.at("kind").get<std::string>());
            spec.kind = *kind;
            if (a.contains("penetration")) spec.penetration = a.at("penetration");
            if (a.contains("curtail_factor")) spec.curtail_factor = a.at("curtail_factor");
            if (a.contains("power_factor")) spec.attacked_power_factor = a.at("power_factor");
            if (a.contains("load_off_fraction"))
                spec.load_off_fraction = a.at("load_off_fraction");
            if (a.contains("intervals")) {
                for (const auto& iv : a.at("intervals"))
                    spec.intervals.emplace_back(iv.at(0).get<std::size_t>(),
                                                iv.at(1).get<std::size_t>());
            } else {
                const int day = a.contains("day") ? a.at("day").get<int>() : scenario.days - 1;
                spec.intervals = default_attack_intervals(scenario, day);
            }
            config.specs.push_back(std::move(spec));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad attack config: ") + e.what());
    }
    if (config.specs.empty()) throw ConfigError("attack config lists no attacks");
    return config;
}

json attack_config_to_json(const AttackRunConfig& config) {
    json attacks = json::array();
    for (const auto& spec : config.specs) {
        json a;
        a["kind"] = attack_kind_name(spec.kind);
        a["penetration"] = spec.penetration;
        a["curtail_factor"] = spec.curtail_factor;
        a["power_factor"] = spec.attacked_power_factor;
        a["load_off_fraction"] = spec.load_off_fraction;
        json intervals = json::array();
        for (const auto& [s, e] : spec.intervals) intervals.push_back({s, e});
        a["intervals"] = std::move(intervals);
        attacks.push_back(std::move(a));
    }
    return json{{"seed", config.seed}, {"attacks", attacks}};
}

// ---------------------------------------------------------------------------
// simulate / attack

namespace {

json run_config_json(const SimOutput& data, const json& extra) {
    json j;
    j["scenario"] = scenario_to_json(data.scenario);
    j["pv_rating_kw"] = data.pv_rating_kw;
    j["pv_power_factor"] = data.pv_power_factor;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

void write_run_dir(const SimOutput& data, const LabelSeries& labels, const std::string& command,
                   const json& config, const std::vector<std::string>& parents,
                   const std::vector<std::string>& parent_hashes, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.command = command;
    manifest.config_json = config.dump();
    manifest.config_hash = hash_hex(fnv1a64(manifest.config_json));
    manifest.parents = parents;
    manifest.parent_hashes = parent_hashes;

    for (std::size_t h = 0; h < data.houses.size(); ++h) {
        const std::string name = "house_" + std::to_string(h) + ".csv";
        emit_csv(data.houses[h], out_dir / name);
        manifest.outputs.push_back(name);
    }
    emit_csv(data.node, out_dir / "node.csv");
    manifest.outputs.push_back("node.csv");
    write_labels_csv(labels, data.node, out_dir / "labels.csv");
    manifest.outputs.push_back("labels.csv");
    manifest.write(out_dir);
}

} // namespace

void write_labels_csv(const LabelSeries& labels, const TimeSeriesFrame& reference,
                      const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "timestamp,house_id,attacked,kind\n";
    for (std::size_t t = 0; t < labels.n_steps(); ++t) {
        for (std::size_t h = 0; h < labels.n_houses(); ++h) {
            out << reference.time_at(t) << ',' << h << ',' << int(labels.attacked[h][t]) << ',';
            if (labels.attacked[h][t])
                out << attack_kind_name(static_cast<AttackKind>(labels.kind[h][t]));
            out << '\n';
        }
    }
}

LabelSeries load_labels(const fs::path& csv_path, std::size_t n_houses, std::size_t n_steps,
                        std::int64_t start_time, std::int64_t step) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open " + csv_path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty labels file");
    LabelSeries labels = make_empty_labels(n_houses, n_steps);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string ts_s, house_s, attacked_s, kind_s;
        std::getline(ss, ts_s, ',');
        std::getline(ss, house_s, ',');
        std::getline(ss, attacked_s, ',');
        std::getline(ss, kind_s);
        const std::int64_t ts = std::stoll(ts_s);
        if ((ts - start_time) % step != 0)
            throw DataError("label timestamp off the sampling grid: " + ts_s);
        const auto t = static_cast<std::size_t>((ts - start_time) / step);
        const auto h = static_cast<std::size_t>(std::stoul(house_s));
        if (t >= n_steps || h >= n_houses)
            throw DataError("label row out of range: " + line);
        labels.attacked[h][t] = static_cast<std::uint8_t>(std::stoi(attacked_s));
        if (labels.attacked[h][t]) {
            const auto kind = attack_kind_from_name(kind_s);
            if (!kind) throw DataError("unknown attack kind in labels: " + kind_s);
            labels.kind[h][t] = static_cast<std::uint8_t>(*kind);
        }
        ++rows;
    }
    if (rows != n_houses * n_steps)
        throw DataError("labels cover " + std::to_string(rows) + " rows, expected " +
                        std::to_string(n_houses * n_steps));
    return labels;
}

void run_simulate(const Scenario& scenario, const fs::path& out_dir) {
    const SimOutput data = simulate(scenario);
    const LabelSeries labels = make_empty_labels(data.houses.size(), data.node.length());
    write_run_dir(data, labels, "simulate", run_config_json(data, json::object()), {}, {},
                  out_dir);
}

LoadedRun load_run(const fs::path& dir, const IngestOptions& ingest) {
    LoadedRun run;
    run.manifest = load_manifest(dir);
    const json config = json::parse(run.manifest.config_json);
    run.data.scenario = scenario_from_json(config.at("scenario"));
    run.data.scenario.seed_set = true;
    run.data.pv_rating_kw = config.at("pv_rating_kw").get<std::vector<double>>();
    run.data.pv_power_factor = config.at("pv_power_factor").get<std::vector<double>>();

    const std::vector<ChannelGroup> house_schema = {pv_group(), load_group()};
    run.data.houses.resize(run.data.scenario.n_houses);
    for (int h = 0; h < run.data.scenario.n_houses; ++h) {
        const fs::path path = dir / ("house_" + std::to_string(h) + ".csv");
        run.data.houses[h] = ingest_csv(path, house_schema, ingest);
    }
    run.data.node = ingest_csv(dir / "node.csv", {node_group()}, ingest);
    return run;
}

void run_attack(const fs::path& normal_dir, const AttackRunConfig& config,
                const fs::path& out_dir, const IngestOptions& ingest) {
    if (!config.seed_set) throw ConfigError("attack seed is mandatory");
    const LoadedRun normal = load_run(normal_dir, ingest);
    const AttackResult result = apply_attacks(normal.data, config.specs, config.seed);
    json cfg = run_config_json(result.data, json{{"attack", attack_config_to_json(config)}});
    write_run_dir(result.data, result.labels, "attack", cfg, {normal_dir.string()},
                  {normal.manifest.config_hash}, out_dir);
}

// ---------------------------------------------------------------------------
// train

namespace {

json fusion_to_json(const FusionSettings& fusion) {
    return json{{"scheme",
                 fusion.scheme == FusionSettings::Scheme::MostAnomalous ? "most-anomalous"
                                                                        : "linear"},
                {"weights", {fusion.w1, fusion.w2, fusion.w3}},
                {"per_model_or", fusion.per_model_or}};
}

FusionSettings fusion_from_json(const json& j) {
    FusionSettings fusion;
    fusion.scheme = j.at("scheme") == "linear" ? FusionSettings::Scheme::Linear
                                               : FusionSettings::Scheme::MostAnomalous;
    const auto w = j.at("weights").get<std::vector<double>>();
    fusion.w1 = w.at(0);
    fusion.w2 = w.at(1);
    fusion.w3 = w.at(2);
    fusion.per_model_or = j.at("per_model_or");
    return fusion;
}

json detector_config_to_json(const DetectorConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["window_len"] = c.window_len;
    j["pca_dims"] = c.pca_dims;
    j["ocsvm_nu"] = c.ocsvm_nu;
    j["iforest_trees"] = c.iforest_trees;
    j["iforest_subsample"] = c.iforest_subsample;
    j["contamination"] = c.contamination;
    j["rf_trees"] = c.rf_trees;
    j["rf_min_leaf"] = c.rf_min_leaf;
    j["dae_noise_std"] = c.dae_noise_std;
    j["residual_percentile"] = c.residual_percentile;
    j["mlp_hidden"] = c.mlp_hidden;
    j["dae_hidden"] = c.dae_hidden;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["holdout_fraction"] = c.holdout_fraction;
    j["ocsvm_max_train"] = c.ocsvm_max_train;
    j["rf_max_train"] = c.rf_max_train;
    j["hull_max_vertices"] = c.hull_max_vertices;
    j["hull_tolerance"] = c.hull_tolerance;
    return j;
}

DetectorConfig detector_config_from_json(const json& j) {
    DetectorConfig c;
    c.seed = j.at("seed");
    c.window_len = j.at("window_len");
    c.pca_dims = j.at("pca_dims");
    c.ocsvm_nu = j.at("ocsvm_nu");
    c.iforest_trees = j.at("iforest_trees");
    c.iforest_subsample = j.at("iforest_subsample");
    c.contamination = j.at("contamination");
    c.rf_trees = j.at("rf_trees");
    c.rf_min_leaf = j.at("rf_min_leaf");
    c.dae_noise_std = j.at("dae_noise_std");
    c.residual_percentile = j.at("residual_percentile");
    c.mlp_hidden = j.at("mlp_hidden").get<std::vector<int>>();
    c.dae_hidden = j.at("dae_hidden").get<std::vector<int>>();
    c.learning_rate = j.at("learning_rate");
    c.epochs = j.at("epochs");
    c.batch_size = j.at("batch_size");
    c.holdout_fraction = j.at("holdout_fraction");
    c.ocsvm_max_train = j.at("ocsvm_max_train");
    c.rf_max_train = j.at("rf_max_train");
    c.hull_max_vertices = j.at("hull_max_vertices");
    c.hull_tolerance = j.at("hull_tolerance");
    return c;
}

json threshold_rule_to_json(const ThresholdRule& rule) {
    const char* kind = nullptr;
    switch (rule.kind) {
    case ThresholdRuleKind::MedianMinus3Sigma: kind = "median_minus_3_sigma"; break;
    case ThresholdRuleKind::MeanPlus3Sigma: kind = "mean_plus_3_sigma"; break;
    case ThresholdRuleKind::FixedValue: kind = "fixed"; break;
    case ThresholdRuleKind::PdfQuantile: kind = "pdf_quantile"; break;
    }
    return json{{"kind", kind},
                {"orientation", rule.orientation == Orientation::LowIsAnomalous ? "low" : "high"},
                {"value", rule.value}};
}

ThresholdRule threshold_rule_from_json(const json& j) {
    ThresholdRule rule;
    const std::string kind = j.at("kind");
    if (kind == "median_minus_3_sigma") rule.kind = ThresholdRuleKind::MedianMinus3Sigma;
    else if (kind == "mean_plus_3_sigma") rule.kind = ThresholdRuleKind::MeanPlus3Sigma;
    else if (kind == "fixed") rule.kind = ThresholdRuleKind::FixedValue;
    else if (kind == "pdf_quantile") rule.kind = ThresholdRuleKind::PdfQuantile;
    else throw SchemaMismatch("unknown threshold rule: " + kind);
    rule.orientation =
        j.at("orientation") == "low" ? Orientation::LowIsAnomalous : Orientation::HighIsAnomalous;
    rule.value = j.at("value");
    return rule;
}

json fused_threshold_to_json(const FusedThreshold& t) {
    return json{{"divisor_m1", t.divisor_m1},
                {"divisor_m2", t.divisor_m2},
                {"divisor_m3", t.divisor_m3},
                {"fused_rule", threshold_rule_to_json(t.fused_rule)},
                {"rule_m1", threshold_rule_to_json(t.rule_m1)},
                {"rule_m2", threshold_rule_to_json(t.rule_m2)},
                {"rule_m3", threshold_rule_to_json(t.rule_m3)}};
}

FusedThreshold fused_threshold_from_json(const json& j) {
    FusedThreshold t;
    t.divisor_m1 = j.at("divisor_m1");
    t.divisor_m2 = j.at("divisor_m2");
    t.divisor_m3 = j.at("divisor_m3");
    t.fused_rule = threshold_rule_from_json(j.at("fused_rule"));
    t.rule_m1 = threshold_rule_from_json(j.at("rule_m1"));
    t.rule_m2 = threshold_rule_from_json(j.at("rule_m2"));
    t.rule_m3 = threshold_rule_from_json(j.at("rule_m3"));
    return t;
}

} // namespace

void run_train(const fs::path& normal_dir, const TrainOptions& options,
               const fs::path& out_dir) {
    const LoadedRun normal = load_run(normal_dir, options.ingest);
    const Scenario& scenario = normal.data.scenario;
    const std::size_t total_steps = normal.data.node.length();
    std::size_t train_steps = options.train_steps;
    if (train_steps == 0)
        train_steps = total_steps - std::min(total_steps, scenario.steps_per_day());
    if (train_steps < 2 || train_steps > total_steps)
        throw ConfigError("train_steps out of range");

    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.command = "train";
    json cfg;
    cfg["detector"] = detector_kind_name(options.kind);
    cfg["detector_config"] = detector_config_to_json(options.config);
    cfg["fusion"] = fusion_to_json(options.fusion);
    cfg["train_steps"] = train_steps;
    cfg["n_houses"] = scenario.n_houses;

    const auto slice = [&](const Eigen::MatrixXd& m) {
        return Eigen::MatrixXd(m.topRows(static_cast<Eigen::Index>(train_steps)));
    };

    // Shared node model.
    const Eigen::MatrixXd node_raw = group_matrix(normal.data.node, node_group());
    GroupModel m3 = fit_group_model(options.kind, node_group(), slice(node_raw), options.config);
    write_text(out_dir / "m3.json", group_model_to_json(m3).dump() + "\n");
    manifest.outputs.push_back("m3.json");

    json thresholds = json::array();
    for (int h = 0; h < scenario.n_houses; ++h) {
        const Eigen::MatrixXd pv_raw = group_matrix(normal.data.houses[h], pv_group());
        const Eigen::MatrixXd load_raw = group_matrix(normal.data.houses[h], load_group());
        GroupModel m1 =
            fit_group_model(options.kind, pv_group(), slice(pv_raw), options.config);
        GroupModel m2 =
            fit_group_model(options.kind, load_group(), slice(load_raw), options.config);
        const FusedThreshold threshold =
            fit_fused_threshold(options.kind, options.config, options.fusion, m1, m2, m3);

        const std::string m1_name = "m1_house_" + std::to_string(h) + ".json";
        const std::string m2_name = "m2_house_" + std::to_string(h) + ".json";
        write_text(out_dir / m1_name, group_model_to_json(m1).dump() + "\n");
        write_text(out_dir / m2_name, group_model_to_json(m2).dump() + "\n");
        manifest.outputs.push_back(m1_name);
        manifest.outputs.push_back(m2_name);

        json t = fused_threshold_to_json(threshold);
        t["house_id"] = h;
        thresholds.push_back(std::move(t));
    }
    write_text(out_dir / "thresholds.json",
               json{{"per_house", thresholds}}.dump(2) + "\n");
    manifest.outputs.push_back("thresholds.json");

    manifest.config_json = cfg.dump();
    manifest.config_hash = hash_hex(fnv1a64(manifest.config_json));
    manifest.parents = {normal_dir.string()};
    manifest.parent_hashes = {normal.manifest.config_hash};
    manifest.write(out_dir);
}

// ---------------------------------------------------------------------------
// detect

void run_detect(const fs::path& model_dir, const fs::path& data_dir, const fs::path& out_dir,
                const IngestOptions& ingest) {
    const RunManifest model_manifest = load_manifest(model_dir);
    const json model_cfg = json::parse(model_manifest.config_json);
    const auto kind = detector_kind_from_name(model_cfg.at("detector"));
    if (!kind) throw SchemaMismatch("model manifest names an unknown detector");
    const DetectorConfig config = detector_config_from_json(model_cfg.at("detector_config"));
    const FusionSettings fusion = fusion_from_json(model_cfg.at("fusion"));
    const std::size_t train_steps = model_cfg.at("train_steps");
    const int n_houses = model_cfg.at("n_houses");

    const LoadedRun run = load_run(data_dir, ingest);
    if (run.data.scenario.n_houses != n_houses)
        throw SchemaMismatch("model was trained for " + std::to_string(n_houses) +
                             " houses, data has " +
                             std::to_string(run.data.scenario.n_houses));
    const std::size_t total_steps = run.data.node.length();
    if (train_steps >= total_steps)
        throw DataError("no evaluation steps beyond the training span");

    auto load_model = [&](const std::string& name) {
        return group_model_from_json(read_json_file(model_dir / name));
    };
    auto check_schema = [&](const GroupModel& model, const ChannelGroup& group) {
        if (model.channels != group.channel_names)
            throw SchemaMismatch("model channel schema does not match the data schema");
        if (model.kind != *kind) throw SchemaMismatch("model kind mismatch");
    };

    const GroupModel m3 = load_model("m3.json");
    check_schema(m3, node_group());

    const json thresholds_json = read_json_file(model_dir / "thresholds.json");
    std::map<int, FusedThreshold> thresholds;
    for (const auto& t : thresholds_json.at("per_house"))
        thresholds[t.at("house_id").get<int>()] = fused_threshold_from_json(t);

    // Slice from train_steps minus the window so window-based detectors can
    // score the first evaluation step.
    const std::size_t slice_start =
        train_steps > static_cast<std::size_t>(config.window_len)
            ? train_steps - static_cast<std::size_t>(config.window_len)
            : 0;
    const auto slice = [&](const Eigen::MatrixXd& m) {
        return Eigen::MatrixXd(m.bottomRows(m.rows() - static_cast<Eigen::Index>(slice_start)));
    };

    const Eigen::MatrixXd node_raw = slice(group_matrix(run.data.node, node_group()));
    const ScoredSeries m3_scores = m3.score(node_raw);

    fs::create_directories(out_dir);
    std::ofstream scores(out_dir / "scores.csv", std::ios::binary);
    if (!scores) throw DataError("cannot write scores.csv");
    scores << "timestamp,house_id,m1_score,m2_score,m3_score,fused_score,decision\n";

    for (int h = 0; h < n_houses; ++h) {
        GroupModel m1 = load_model("m1_house_" + std::to_string(h) + ".json");
        GroupModel m2 = load_model("m2_house_" + std::to_string(h) + ".json");
        check_schema(m1, pv_group());
        check_schema(m2, load_group());
        const auto it = thresholds.find(h);
        if (it == thresholds.end())
            throw SchemaMismatch("thresholds.json lacks house " + std::to_string(h));

        const Eigen::MatrixXd pv_raw = slice(group_matrix(run.data.houses[h], pv_group()));
        const Eigen::MatrixXd load_raw = slice(group_matrix(run.data.houses[h], load_group()));
        const HouseScores hs =
            score_house(m1, m2, m3_scores, it->second, fusion, pv_raw, load_raw);

        for (std::size_t i = 0; i < hs.fused.size(); ++i) {
            const std::size_t abs_step = slice_start + hs.start + i;
            if (abs_step < train_steps) continue;
            scores << run.data.node.time_at(abs_step) << ',' << h << ','
                   << format_double(hs.m1[i]) << ',' << format_double(hs.m2[i]) << ','
                   << format_double(hs.m3[i]) << ',' << format_double(hs.fused[i]) << ','
                   << int(hs.decisions[i]) << '\n';
        }
    }
    scores.close();

    RunManifest manifest;
    manifest.command = "detect";
    json cfg;
    cfg["detector"] = model_cfg.at("detector");
    cfg["train_steps"] = train_steps;
    cfg["eval_start"] = train_steps;
    cfg["orientation"] =
        detector_orientation(*kind) == Orientation::LowIsAnomalous ? "low" : "high";
    manifest.config_json = cfg.dump();
    manifest.config_hash = hash_hex(fnv1a64(manifest.config_json));
    manifest.parents = {model_dir.string(), data_dir.string()};
    manifest.parent_hashes = {model_manifest.config_hash, run.manifest.config_hash};
    manifest.outputs = {"scores.csv"};
    manifest.write(out_dir);
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

struct ScoreRow {
    std::int64_t timestamp;
    int house_id;
    double fused;
    std::uint8_t decision;
};

std::vector<ScoreRow> load_scores_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty scores file");
    std::vector<ScoreRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        ScoreRow row{};
        std::getline(ss, field, ',');
        row.timestamp = std::stoll(field);
        std::getline(ss, field, ',');
        row.house_id = std::stoi(field);
        std::getline(ss, field, ','); // m1
        std::getline(ss, field, ','); // m2
        std::getline(ss, field, ','); // m3
        std::getline(ss, field, ',');
        row.fused = std::stod(field);
        std::getline(ss, field);
        row.decision = static_cast<std::uint8_t>(std::stoi(field));
        rows.push_back(row);
    }
    return rows;
}

std::string metrics_csv_value(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

} // namespace

void run_evaluate(const fs::path& scores_dir, const fs::path& data_dir,
                  const EvaluateOptions& options, const fs::path& out_dir) {
    const RunManifest scores_manifest = load_manifest(scores_dir);
    const json scores_cfg = json::parse(scores_manifest.config_json);
    const std::string detector = scores_cfg.at("detector");
    const bool low_is_anomalous = scores_cfg.at("orientation") == "low";

    const LoadedRun run = load_run(data_dir);
    const std::size_t n_steps = run.data.node.length();
    const LabelSeries labels =
        load_labels(data_dir / "labels.csv", run.data.houses.size(), n_steps,
                    run.data.node.start_time, run.data.node.step);

    const auto rows = load_scores_csv(scores_dir / "scores.csv");
    if (rows.empty()) throw DataError("scores.csv has no rows");

    std::vector<std::uint8_t> decisions, label_attacked, label_kind;
    std::vector<double> graded;
    for (const auto& row : rows) {
        if ((row.timestamp - run.data.node.start_time) % run.data.node.step != 0)
            throw DataError("score timestamp off the sampling grid");
        const auto t =
            static_cast<std::size_t>((row.timestamp - run.data.node.start_time) /
                                     run.data.node.step);
        if (t >= n_steps || row.house_id < 0 ||
            row.house_id >= static_cast<int>(run.data.houses.size()))
            throw DataError("score row does not align with the evaluated run");
        if (options.devices == EvaluateOptions::Devices::PvOnly &&
            run.data.pv_rating_kw[row.house_id] <= 0.0)
            continue;
        decisions.push_back(row.decision);
        // ROC wants higher-is-anomalous.
        graded.push_back(low_is_anomalous ? -row.fused : row.fused);
        label_attacked.push_back(labels.attacked[row.house_id][t]);
        label_kind.push_back(labels.kind[row.house_id][t]);
    }

    const EvalReport report = evaluate_run(decisions, graded, label_attacked, label_kind);

    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.command = "evaluate";

    std::ofstream rep(out_dir / "report.csv", std::ios::binary);
    if (!rep) throw DataError("cannot write report.csv");
    rep << "attack,precision,recall,f1,accuracy,roc_auc\n";
    auto write_row = [&](const std::string& name, const MetricsRow& row) {
        rep << name << ',' << format_double(row.precision) << ',' << format_double(row.recall)
            << ',' << format_double(row.f1) << ',' << format_double(row.accuracy) << ','
            << metrics_csv_value(row.roc_auc) << '\n';
    };
    write_row("overall", report.overall);
    for (AttackKind kind : {AttackKind::Disconnect, AttackKind::ReversePowerFlow,
                            AttackKind::Curtailment, AttackKind::VoltVar}) {
        const auto it = report.per_kind.find(kind);
        if (it != report.per_kind.end()) write_row(attack_kind_name(kind), it->second);
    }
    rep.close();
    manifest.outputs.push_back("report.csv");

    {
        const auto curve = roc_curve(graded, label_attacked);
        std::ofstream roc(out_dir / ("roc_" + detector + ".csv"), std::ios::binary);
        roc << "fpr,tpr\n";
        for (const auto& [fpr, tpr] : curve)
            roc << format_double(fpr) << ',' << format_double(tpr) << '\n';
        manifest.outputs.push_back("roc_" + detector + ".csv");
        write_text(out_dir / ("roc_" + detector + ".svg"),
                   svg_line_chart(curve, "ROC - " + detector, "false positive rate",
                                  "true positive rate"));
        manifest.outputs.push_back("roc_" + detector + ".svg");
    }

    if (options.timing) {
        // Timing needs training data: walk scores -> model -> normal run.
        fs::path model_dir = scores_manifest.parents.at(0);
        const RunManifest model_manifest = load_manifest(model_dir);
        const json model_cfg = json::parse(model_manifest.config_json);
        const fs::path normal_dir = model_manifest.parents.at(0);
        const LoadedRun normal = load_run(normal_dir);
        DetectorConfig config = detector_config_from_json(model_cfg.at("detector_config"));
        config.epochs = std::min(config.epochs, 10); // keep timing runs bounded

        const Eigen::MatrixXd pv_raw = group_matrix(normal.data.houses[0], pv_group());
        const Eigen::Index n_train = std::min<Eigen::Index>(512, pv_raw.rows() / 2);
        const Eigen::Index n_test = std::min<Eigen::Index>(256, pv_raw.rows() - n_train);
        const Eigen::MatrixXd train_slice = pv_raw.topRows(n_train);
        const Eigen::MatrixXd test_slice = pv_raw.middleRows(n_train, n_test);

        std::vector<std::string> names;
        std::vector<double> train_us, test_us;
        std::ofstream timing(out_dir / "timing.csv", std::ios::binary);
        timing << "detector,train_us_per_sample,test_us_per_sample\n";
        for (DetectorKind kind : all_detector_kinds()) {
            const TimingRow row = time_detector(kind, train_slice, test_slice, config);
            timing << row.detector << ',' << format_double(row.train_us_per_sample) << ','
                   << format_double(row.test_us_per_sample) << '\n';
            names.push_back(row.detector);
            train_us.push_back(row.train_us_per_sample);
            test_us.push_back(row.test_us_per_sample);
        }
        manifest.outputs.push_back("timing.csv");
        write_text(out_dir / "timing.svg",
                   svg_bar_chart(names, {train_us, test_us}, {"train", "test"},
                                 "Per-sample time", "microseconds"));
        manifest.outputs.push_back("timing.svg");
    }

    json cfg;
    cfg["detector"] = detector;
    cfg["devices"] = options.devices == EvaluateOptions::Devices::PvOnly ? "pv" : "all";
    cfg["timing"] = options.timing;
    manifest.config_json = cfg.dump();
    manifest.config_hash = hash_hex(fnv1a64(manifest.config_json));
    manifest.parents = {scores_dir.string(), data_dir.string()};
    manifest.parent_hashes = {scores_manifest.config_hash, run.manifest.config_hash};
    manifest.write(out_dir);
}

} // namespace pvwatch
