#include "pvwatch/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "pvwatch/errors.hpp"

namespace pvwatch {

MetricsRow precision_recall_f1(const ConfusionCounts& counts) {
    if (counts.total() == 0) throw AllZeroCounts("no evaluated samples");
    MetricsRow row;
    row.counts = counts;
    const double tp = static_cast<double>(counts.tp);
    row.precision = counts.tp + counts.fp == 0 ? 0.0 : tp / static_cast<double>(counts.tp + counts.fp);
    row.recall = counts.tp + counts.fn == 0 ? 0.0 : tp / static_cast<double>(counts.tp + counts.fn);
    row.f1 = row.precision + row.recall == 0.0
                 ? 0.0
                 : 2.0 * row.precision * row.recall / (row.precision + row.recall);
    row.accuracy = static_cast<double>(counts.tp + counts.tn) / static_cast<double>(counts.total());
    return row;
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw LengthMismatch("scores/labels length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (auto l : labels) (l ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw SingleClassLabels(n_pos == 0 ? "no positive labels" : "no negative labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks within tie groups, then the Mann-Whitney statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores,
                                                 std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw LengthMismatch("scores/labels length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (auto l : labels) (l ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw SingleClassLabels("roc curve needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<std::pair<double, double>> curve;
    curve.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) (labels[order[k]] ? tp : fp)++;
        curve.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                           static_cast<double>(tp) / static_cast<double>(n_pos));
        i = j + 1;
    }
    return curve;
}

namespace {

MetricsRow row_for(std::span<const std::uint8_t> decisions, std::span<const double> graded,
                   const std::vector<std::uint8_t>& positive,
                   const std::vector<std::uint8_t>& include) {
    ConfusionCounts counts;
    std::vector<double> sub_scores;
    std::vector<std::uint8_t> sub_labels;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (!include[i]) continue;
        const bool pos = positive[i] != 0;
        const bool flagged = decisions[i] != 0;
        if (pos && flagged) ++counts.tp;
        else if (pos && !flagged) ++counts.fn;
        else if (!pos && flagged) ++counts.fp;
        else ++counts.tn;
        if (!graded.empty()) {
            sub_scores.push_back(graded[i]);
            sub_labels.push_back(pos ? 1 : 0);
        }
    }
    MetricsRow row = precision_recall_f1(counts);
    if (!sub_scores.empty() && counts.tp + counts.fn > 0 && counts.fp + counts.tn > 0)
        row.roc_auc = roc_auc(sub_scores, sub_labels);
    return row;
}

} // namespace

EvalReport evaluate_run(std::span<const std::uint8_t> decisions,
                        std::span<const double> graded_scores,
                        std::span<const std::uint8_t> label_attacked,
                        std::span<const std::uint8_t> label_kind) {
    const std::size_t n = decisions.size();
    if (label_attacked.size() != n || label_kind.size() != n ||
        (!graded_scores.empty() && graded_scores.size() != n))
        throw LengthMismatch("evaluate_run inputs must have equal lengths");

    bool has_pos = false, has_neg = false;
    for (auto a : label_attacked) (a ? has_pos : has_neg) = true;
    if (!has_pos) throw SingleClassLabels("evaluation set has no attacked samples");
    if (!has_neg) throw SingleClassLabels("evaluation set has no normal samples");

    EvalReport report;
    std::vector<std::uint8_t> all_pos(label_attacked.begin(), label_attacked.end());
    std::vector<std::uint8_t> all_inc(n, 1);
    report.overall = row_for(decisions, graded_scores, all_pos, all_inc);

    for (AttackKind kind : {AttackKind::Disconnect, AttackKind::Curtailment, AttackKind::VoltVar,
                            AttackKind::ReversePowerFlow}) {
        const auto kind_code = static_cast<std::uint8_t>(kind);
        std::vector<std::uint8_t> positive(n, 0), include(n, 0);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (label_attacked[i] && label_kind[i] == kind_code) {
                positive[i] = 1;
                include[i] = 1;
                any = true;
            } else if (!label_attacked[i]) {
                include[i] = 1; // negatives: every unattacked sample
            }
        }
        if (!any) continue;
        report.per_kind[kind] = row_for(decisions, graded_scores, positive, include);
    }
    return report;
}

} // namespace pvwatch
