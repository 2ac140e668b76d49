#include "pvwatch/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace pvwatch {

NormalizedScores normalize_scores(std::span<const double> train_scores,
                                  std::span<const double> eval_scores) {
    if (train_scores.empty()) throw TooFewSamples("cannot normalize without training scores");
    NormalizedScores out;
    double max_train = train_scores[0];
    for (double v : train_scores) max_train = std::max(max_train, v);
    if (max_train == 0.0) {
        std::cerr << "pvwatch: max training anomaly measure is zero, normalizing by 1\n";
        out.zero_max_fallback = true;
        out.divisor = 1.0;
    } else {
        out.divisor = max_train;
    }
    out.train.reserve(train_scores.size());
    for (double v : train_scores) out.train.push_back(v / out.divisor);
    out.eval.reserve(eval_scores.size());
    for (double v : eval_scores) out.eval.push_back(v / out.divisor);
    return out;
}

double median(std::span<const double> values) {
    if (values.empty()) throw TooFewSamples("median of empty range");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) throw TooFewSamples("sample std needs at least 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double threshold_median_sigma(std::span<const double> normalized_train) {
    if (normalized_train.size() < 2)
        throw TooFewSamples("median threshold needs at least 2 scores");
    return median(normalized_train) - 3.0 * sample_std(normalized_train);
}

std::vector<double> fuse_linear(std::span<const double> m1, std::span<const double> m2,
                                std::span<const double> m3, double w1, double w2, double w3) {
    if (m1.size() != m2.size() || m1.size() != m3.size())
        throw LengthMismatch("fusion inputs must have equal lengths");
    if (w1 == 0.0 && w2 == 0.0 && w3 == 0.0)
        std::cerr << "pvwatch: all fusion weights are zero, fused series is degenerate\n";
    std::vector<double> out(m1.size());
    for (std::size_t i = 0; i < m1.size(); ++i) out[i] = w1 * m1[i] + w2 * m2[i] + w3 * m3[i];
    return out;
}

std::vector<double> fuse_most_anomalous(std::span<const double> m1, std::span<const double> m2,
                                        std::span<const double> m3, Orientation orientation) {
    if (m1.size() != m2.size() || m1.size() != m3.size())
        throw LengthMismatch("fusion inputs must have equal lengths");
    std::vector<double> out(m1.size());
    if (orientation == Orientation::LowIsAnomalous) {
        for (std::size_t i = 0; i < m1.size(); ++i) out[i] = std::min({m1[i], m2[i], m3[i]});
    } else {
        for (std::size_t i = 0; i < m1.size(); ++i) out[i] = std::max({m1[i], m2[i], m3[i]});
    }
    return out;
}

std::vector<double> align_orientation(std::span<const double> values, Orientation from,
                                      Orientation to) {
    std::vector<double> out(values.begin(), values.end());
    if (from != to)
        for (double& v : out) v = -v;
    return out;
}

ThresholdRule fit_threshold(ThresholdRuleKind kind, std::span<const double> train_scores,
                            Orientation orientation, double parameter) {
    ThresholdRule rule;
    rule.kind = kind;
    rule.orientation = orientation;
    switch (kind) {
    case ThresholdRuleKind::MedianMinus3Sigma:
        rule.value = threshold_median_sigma(train_scores);
        break;
    case ThresholdRuleKind::MeanPlus3Sigma: {
        if (train_scores.size() < 2) throw TooFewSamples("mean threshold needs >= 2 scores");
        double mean = 0.0;
        for (double v : train_scores) mean += v;
        mean /= static_cast<double>(train_scores.size());
        rule.value = mean + 3.0 * sample_std(train_scores);
        break;
    }
    case ThresholdRuleKind::FixedValue:
        rule.value = parameter;
        break;
    case ThresholdRuleKind::PdfQuantile: {
        if (train_scores.empty()) throw TooFewSamples("quantile threshold needs scores");
        if (parameter <= 0.0 || parameter >= 1.0)
            throw ConfigError("quantile must lie in (0, 1)");
        std::vector<double> sorted(train_scores.begin(), train_scores.end());
        std::sort(sorted.begin(), sorted.end());
        const std::size_t rank = std::max<std::size_t>(
            1, static_cast<std::size_t>(parameter * static_cast<double>(sorted.size())));
        rule.value = sorted[rank - 1];
        break;
    }
    }
    return rule;
}

} // namespace pvwatch
