#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pvwatch/corrupt_rf.hpp"
#include "pvwatch/fusion.hpp"
#include "pvwatch/gaussian_residual.hpp"
#include "pvwatch/hull.hpp"
#include "pvwatch/iforest.hpp"
#include "pvwatch/metrics.hpp"
#include "pvwatch/mlp.hpp"
#include "pvwatch/ocsvm.hpp"
#include "pvwatch/pca.hpp"
#include "pvwatch/timeseries.hpp"

namespace pvwatch {

enum class DetectorKind { Nn, Dae, Ocsvm, IsoForest, CorruptRf, PcaHull, InversePca };

std::string detector_kind_name(DetectorKind kind);
std::optional<DetectorKind> detector_kind_from_name(const std::string& name);
std::vector<DetectorKind> all_detector_kinds();

// Score orientation is fixed per detector kind: decision values, path
// lengths and pdf values drop under attack; attack probabilities,
// reconstruction errors and hull distances rise.
Orientation detector_orientation(DetectorKind kind);

// OCSVM, isolation forest and the pdf-based detectors are normalized by the
// maximum training measure; probabilities, hull distances and raw
// reconstruction errors are thresholded directly.
bool detector_normalizes(DetectorKind kind);

ThresholdRuleKind detector_threshold_rule(DetectorKind kind);

struct DetectorConfig {
    std::uint64_t seed = 0;
    int window_len = 15; // nn/dae sliding window (minutes at 1-min step)
    int pca_dims = 5;
    double ocsvm_nu = 0.001;
    double ocsvm_kkt_tol = 1e-6;
    int iforest_trees = 200;
    int iforest_subsample = 256;
    double contamination = 1e-8;
    int rf_trees = 100;
    int rf_min_leaf = 5;
    double dae_noise_std = 0.1;
    double residual_percentile = 0.001;
    std::vector<int> mlp_hidden = {64, 32, 16};
    std::vector<int> dae_hidden = {32};
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 64;
    double holdout_fraction = 0.15;
    // Desk-scale training caps (even stride subsampling) for the expensive
    // fits; scoring always runs on the full series.
    int ocsvm_max_train = 2520;
    int rf_max_train = 2520;
    int hull_max_vertices = 2520;
    double hull_tolerance = 1e-9;
};

// Per-timestep score series; `start` is the first scored step (window-based
// detectors cannot score the first window_len steps).
struct ScoredSeries {
    std::size_t start = 0;
    std::vector<double> values;
};

// One detector fitted to one channel group (m1/m2/m3) of one device.
struct GroupModel {
    DetectorKind kind = DetectorKind::PcaHull;
    GroupKind group = GroupKind::Pv;
    std::vector<std::string> channels;
    std::uint64_t seed = 0;
    int window_len = 15;
    Standardizer scaler;

    std::optional<OcsvmModel> ocsvm;
    std::optional<IsolationForestModel> iforest;
    std::optional<CorruptRfModel> rf;
    std::optional<PcaModel> pca;
    std::optional<HullModel> hull;
    std::optional<MlpEstimator> mlp;
    std::optional<DaeModel> dae;
    std::optional<GaussianResidualModel> residual;

    // Raw anomaly measures over the training span (transient; feeds the
    // normalization divisor and threshold fit, not serialized).
    ScoredSeries train_scores;

    ScoredSeries score(const Eigen::MatrixXd& raw) const;
};

GroupModel fit_group_model(DetectorKind kind, const ChannelGroup& group,
                           const Eigen::MatrixXd& raw_train, const DetectorConfig& config,
                           bool compute_train_scores = true);

nlohmann::json group_model_to_json(const GroupModel& model);
GroupModel group_model_from_json(const nlohmann::json& j);

struct FusionSettings {
    enum class Scheme { MostAnomalous, Linear };
    Scheme scheme = Scheme::MostAnomalous;
    double w1 = 1.0 / 3.0, w2 = 1.0 / 3.0, w3 = 1.0 / 3.0;
    bool per_model_or = false; // flag alternative: OR of per-model decisions
};

// Normalization divisors plus the decision rule fitted on fused training
// scores (and per-model rules for the per_model_or variant).
struct FusedThreshold {
    double divisor_m1 = 1.0, divisor_m2 = 1.0, divisor_m3 = 1.0;
    ThresholdRule fused_rule;
    ThresholdRule rule_m1, rule_m2, rule_m3;
};

FusedThreshold fit_fused_threshold(DetectorKind kind, const DetectorConfig& config,
                                   const FusionSettings& fusion, const GroupModel& m1,
                                   const GroupModel& m2, const GroupModel& m3);

struct HouseScores {
    std::size_t start = 0; // first scored absolute step within the given slice
    std::vector<double> m1, m2, m3; // normalized eval scores
    std::vector<double> fused;
    std::vector<std::uint8_t> decisions;
};

// Scores one house given its two per-house models and the shared node
// series (already scored once upstream).
HouseScores score_house(const GroupModel& m1_model, const GroupModel& m2_model,
                        const ScoredSeries& m3_scores, const FusedThreshold& threshold,
                        const FusionSettings& fusion, const Eigen::MatrixXd& pv_raw,
                        const Eigen::MatrixXd& load_raw);

// Fig.7-style per-sample timing of one detector kind on a fixed dataset
// (median over `repetitions` runs, standardization excluded).
TimingRow time_detector(DetectorKind kind, const Eigen::MatrixXd& train_raw,
                        const Eigen::MatrixXd& test_raw, const DetectorConfig& config,
                        int repetitions = 3);

} // namespace pvwatch
