#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvwatch/attack.hpp"

namespace pvwatch {

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::uint64_t total() const { return tp + fp + tn + fn; }
};

struct MetricsRow {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::optional<double> roc_auc;
    ConfusionCounts counts;
};

// Pr = TP/(TP+FP), Re = TP/(TP+FN), F1 = harmonic mean, Acc = (TP+TN)/total.
// Zero-denominator conventions: Pr = 0 when nothing was predicted positive,
// Re = 0 with no positives, F1 = 0 when Pr + Re = 0.
MetricsRow precision_recall_f1(const ConfusionCounts& counts);

// Area under the ROC by the rank statistic (ties count 1/2); scores must be
// oriented so that higher means more anomalous.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Threshold-sweep ROC polyline (fpr, tpr), for report plots.
std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores,
                                                 std::span<const std::uint8_t> labels);

// Point-wise evaluation over a pooled (device x timestep) series. Per-kind
// rows restrict positives to that kind's labels and exclude timesteps
// attacked by other kinds from the negatives; the overall row pools all
// attacks.
struct EvalReport {
    MetricsRow overall;
    std::map<AttackKind, MetricsRow> per_kind;
};

EvalReport evaluate_run(std::span<const std::uint8_t> decisions,
                        std::span<const double> graded_scores,
                        std::span<const std::uint8_t> label_attacked,
                        std::span<const std::uint8_t> label_kind);

struct TimingRow {
    std::string detector;
    double train_us_per_sample = 0.0;
    double test_us_per_sample = 0.0;
};

} // namespace pvwatch
