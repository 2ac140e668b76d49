#pragma once

#include <span>
#include <vector>

#include "pvwatch/errors.hpp"

namespace pvwatch {

enum class Orientation { LowIsAnomalous, HighIsAnomalous };

// Anomaly measures divided by the maximum measure observed on the normal
// training data; evaluation scores may exceed 1.
struct NormalizedScores {
    std::vector<double> train;
    std::vector<double> eval;
    double divisor = 1.0;
    bool zero_max_fallback = false;
};

NormalizedScores normalize_scores(std::span<const double> train_scores,
                                  std::span<const double> eval_scores);

double median(std::span<const double> values);
double sample_std(std::span<const double> values);

// t = median(normalized train) - 3 * std; anomaly iff score < t
// (LowIsAnomalous convention).
double threshold_median_sigma(std::span<const double> normalized_train);

std::vector<double> fuse_linear(std::span<const double> m1, std::span<const double> m2,
                                std::span<const double> m3, double w1, double w2, double w3);

std::vector<double> fuse_most_anomalous(std::span<const double> m1, std::span<const double> m2,
                                        std::span<const double> m3, Orientation orientation);

// Flips a HighIsAnomalous series into LowIsAnomalous space (or back) for
// mixed-orientation fusion.
std::vector<double> align_orientation(std::span<const double> values, Orientation from,
                                      Orientation to);

enum class ThresholdRuleKind { MedianMinus3Sigma, MeanPlus3Sigma, FixedValue, PdfQuantile };

struct ThresholdRule {
    ThresholdRuleKind kind = ThresholdRuleKind::MedianMinus3Sigma;
    Orientation orientation = Orientation::LowIsAnomalous;
    double value = 0.0;

    bool flags(double score) const {
        return orientation == Orientation::LowIsAnomalous ? score < value : score > value;
    }
};

// Fits the rule on normal training scores only. For FixedValue the parameter
// is the threshold itself; for PdfQuantile it is the quantile fraction.
ThresholdRule fit_threshold(ThresholdRuleKind kind, std::span<const double> train_scores,
                            Orientation orientation, double parameter);

} // namespace pvwatch
