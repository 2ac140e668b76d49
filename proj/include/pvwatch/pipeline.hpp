#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pvwatch/attack.hpp"
#include "pvwatch/detector.hpp"

namespace pvwatch {

inline constexpr const char* kToolVersion = "0.1.0";

// 64-bit FNV-1a, used for manifest config hashes.
std::uint64_t fnv1a64(const std::string& data);
std::string hash_hex(std::uint64_t value);

// Every run directory holds exactly one manifest describing the command,
// its configuration (inline, hashed) and the produced files.
struct RunManifest {
    std::string command;
    std::string config_json;  // canonical dump
    std::string config_hash;
    std::vector<std::string> parents; // parent run directories
    std::vector<std::string> parent_hashes;
    std::vector<std::string> outputs;
    std::string created; // informational timestamp

    void write(const std::filesystem::path& dir) const;
};

RunManifest load_manifest(const std::filesystem::path& dir); // verifies the hash

// ---- config parsing ----
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& scenario);

struct AttackRunConfig {
    std::vector<AttackSpec> specs;
    std::uint64_t seed = 0;
    bool seed_set = false;
};
AttackRunConfig attack_config_from_json(const nlohmann::json& j, const Scenario& scenario);
nlohmann::json attack_config_to_json(const AttackRunConfig& config);

// ---- pipeline stages (each writes a manifest into out_dir) ----
void run_simulate(const Scenario& scenario, const std::filesystem::path& out_dir);

struct LoadedRun {
    SimOutput data;
    RunManifest manifest;
};
LoadedRun load_run(const std::filesystem::path& dir, const IngestOptions& ingest = {});

void run_attack(const std::filesystem::path& normal_dir, const AttackRunConfig& config,
                const std::filesystem::path& out_dir, const IngestOptions& ingest = {});

LabelSeries load_labels(const std::filesystem::path& csv_path, std::size_t n_houses,
                        std::size_t n_steps, std::int64_t start_time, std::int64_t step);

struct TrainOptions {
    DetectorKind kind = DetectorKind::PcaHull;
    DetectorConfig config;
    FusionSettings fusion;
    std::size_t train_steps = 0; // 0 = all but the final day
    IngestOptions ingest;
};
void run_train(const std::filesystem::path& normal_dir, const TrainOptions& options,
               const std::filesystem::path& out_dir);

void run_detect(const std::filesystem::path& model_dir, const std::filesystem::path& data_dir,
                const std::filesystem::path& out_dir, const IngestOptions& ingest = {});

struct EvaluateOptions {
    enum class Devices { PvOnly, All };
    Devices devices = Devices::PvOnly;
    bool timing = false;
};
void run_evaluate(const std::filesystem::path& scores_dir,
                  const std::filesystem::path& data_dir, const EvaluateOptions& options,
                  const std::filesystem::path& out_dir);

void write_labels_csv(const LabelSeries& labels, const TimeSeriesFrame& reference,
                      const std::filesystem::path& path);

} // namespace pvwatch
