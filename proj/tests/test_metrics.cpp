#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "pvwatch/metrics.hpp"

using namespace pvwatch;

namespace {

// Independent trapezoidal threshold-sweep AUC, the oracle for the rank-based
// implementation.
double trapezoid_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    std::vector<double> cuts(scores.begin(), scores.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::size_t n_pos = 0, n_neg = 0;
    for (auto l : labels) (l ? n_pos : n_neg)++;

    // sweep thresholds from above max to below min; decision: score >= cut
    std::vector<std::pair<double, double>> points; // (fpr, tpr)
    points.emplace_back(0.0, 0.0);
    for (auto it = cuts.rbegin(); it != cuts.rend(); ++it) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= *it) (labels[i] ? tp : fp)++;
        }
        points.emplace_back(static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos);
    }
    points.emplace_back(1.0, 1.0);
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].first - points[i - 1].first) *
                (points[i].second + points[i - 1].second) / 2.0;
    }
    return area;
}

} // namespace

TEST_CASE("precision/recall/f1 reproduce the reference overall row") {
    // counts engineered so Pr = 0.9590 and Re = 0.5712 exactly
    ConfusionCounts c;
    c.tp = 3912720;
    c.fp = 167280;   // tp + fp = 4080000 -> Pr = 0.9590
    c.fn = 2937280;  // tp + fn = 6850000 -> Re = 0.5712
    c.tn = 1000000;
    const auto row = precision_recall_f1(c);
    CHECK(row.precision == doctest::Approx(0.9590).epsilon(1e-12));
    CHECK(row.recall == doctest::Approx(0.5712).epsilon(1e-12));
    CHECK(std::abs(row.f1 * 100.0 - 71.60) < 0.05);
}

TEST_CASE("metrics: perfect classifier") {
    ConfusionCounts c{5, 0, 5, 0};
    const auto row = precision_recall_f1(c);
    CHECK(row.precision == 1.0);
    CHECK(row.recall == 1.0);
    CHECK(row.f1 == 1.0);
    CHECK(row.accuracy == 1.0);
}

TEST_CASE("metrics: hand-checked small case") {
    ConfusionCounts c;
    c.tp = 2;
    c.fp = 1;
    c.fn = 3;
    c.tn = 4;
    const auto row = precision_recall_f1(c);
    CHECK(row.precision == doctest::Approx(2.0 / 3.0));
    CHECK(row.recall == doctest::Approx(0.4));
    CHECK(row.f1 == doctest::Approx(0.5));
    CHECK(row.accuracy == doctest::Approx(0.6));
}

TEST_CASE("metrics: zero-denominator conventions") {
    ConfusionCounts none_predicted{0, 0, 5, 5};
    const auto row = precision_recall_f1(none_predicted);
    CHECK(row.precision == 0.0);
    CHECK(row.recall == 0.0);
    CHECK(row.f1 == 0.0);

    ConfusionCounts empty{0, 0, 0, 0};
    CHECK_THROWS_AS(precision_recall_f1(empty), AllZeroCounts);
}

TEST_CASE("roc: perfectly separated scores give exactly 1") {
    std::vector<double> scores = {0.9, 0.8, 0.95, 0.1, 0.2, 0.05};
    std::vector<std::uint8_t> labels = {1, 1, 1, 0, 0, 0};
    CHECK(roc_auc(scores, labels) == 1.0);
}

TEST_CASE("roc: label-independent scores stay near 1/2") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = 10000;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = unit(rng);
        labels[i] = unit(rng) < 0.5 ? 1 : 0;
    }
    const double auc = roc_auc(scores, labels);
    CHECK(auc == doctest::Approx(0.5).epsilon(0.04)); // 0.5 +- 0.02 absolute
    CHECK(std::abs(auc - 0.5) < 0.02);
}

TEST_CASE("roc: one flipped pair among four points") {
    // positives score {0.9, 0.4}, negatives {0.6, 0.1}: 3 of 4 pairs ordered
    std::vector<double> scores = {0.9, 0.4, 0.6, 0.1};
    std::vector<std::uint8_t> labels = {1, 1, 0, 0};
    CHECK(roc_auc(scores, labels) == doctest::Approx(0.75));
}

TEST_CASE("roc: ties count one half") {
    std::vector<double> scores = {0.5, 0.5};
    std::vector<std::uint8_t> labels = {1, 0};
    CHECK(roc_auc(scores, labels) == doctest::Approx(0.5));
}

TEST_CASE("roc: single-class labels rejected") {
    std::vector<double> scores = {0.1, 0.2};
    std::vector<std::uint8_t> labels = {1, 1};
    CHECK_THROWS_AS(roc_auc(scores, labels), SingleClassLabels);
}

TEST_CASE("roc: rank statistic equals trapezoidal sweep on random sets") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> size_dist(5, 60);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size_dist(rng);
        std::vector<double> scores(n);
        std::vector<std::uint8_t> labels(n);
        bool has0 = false, has1 = false;
        for (int i = 0; i < n; ++i) {
            // coarse grid to force plenty of ties
            scores[i] = std::floor(unit(rng) * 8.0) / 8.0;
            labels[i] = unit(rng) < 0.4 ? 1 : 0;
            (labels[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) continue;
        CHECK(roc_auc(scores, labels) ==
              doctest::Approx(trapezoid_auc(scores, labels)).epsilon(1e-12));
    }
}

TEST_CASE("metrics invariant under joint permutation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = 200;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> decisions(n), attacked(n), kind(n, LabelSeries::kNoKind);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = unit(rng);
        decisions[i] = unit(rng) < 0.3;
        attacked[i] = unit(rng) < 0.3;
        if (attacked[i]) kind[i] = static_cast<std::uint8_t>(AttackKind::Disconnect);
    }
    const auto base = evaluate_run(decisions, scores, attacked, kind);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> s2(n);
    std::vector<std::uint8_t> d2(n), a2(n), k2(n);
    for (std::size_t i = 0; i < n; ++i) {
        s2[i] = scores[perm[i]];
        d2[i] = decisions[perm[i]];
        a2[i] = attacked[perm[i]];
        k2[i] = kind[perm[i]];
    }
    const auto permuted = evaluate_run(d2, s2, a2, k2);
    CHECK(base.overall.f1 == doctest::Approx(permuted.overall.f1).epsilon(1e-12));
    CHECK(base.overall.accuracy == doctest::Approx(permuted.overall.accuracy).epsilon(1e-12));
    CHECK(*base.overall.roc_auc == doctest::Approx(*permuted.overall.roc_auc).epsilon(1e-12));
}

TEST_CASE("evaluate_run: decisions equal to labels score all ones") {
    std::vector<std::uint8_t> attacked = {0, 1, 1, 0, 0, 1};
    std::vector<std::uint8_t> kind = {LabelSeries::kNoKind,
                                      static_cast<std::uint8_t>(AttackKind::VoltVar),
                                      static_cast<std::uint8_t>(AttackKind::VoltVar),
                                      LabelSeries::kNoKind,
                                      LabelSeries::kNoKind,
                                      static_cast<std::uint8_t>(AttackKind::Disconnect)};
    std::vector<double> graded = {0, 1, 1, 0, 0, 1};
    const auto report = evaluate_run(attacked, graded, attacked, kind);
    CHECK(report.overall.precision == 1.0);
    CHECK(report.overall.recall == 1.0);
    CHECK(report.overall.f1 == 1.0);
    CHECK(*report.overall.roc_auc == 1.0);
    CHECK(report.per_kind.at(AttackKind::VoltVar).recall == 1.0);
    CHECK(report.per_kind.at(AttackKind::Disconnect).recall == 1.0);
}

TEST_CASE("evaluate_run: all-negative decisions") {
    std::vector<std::uint8_t> attacked = {0, 1, 1, 0};
    std::vector<std::uint8_t> kind = {LabelSeries::kNoKind,
                                      static_cast<std::uint8_t>(AttackKind::Curtailment),
                                      static_cast<std::uint8_t>(AttackKind::Curtailment),
                                      LabelSeries::kNoKind};
    std::vector<std::uint8_t> decisions(4, 0);
    const auto report = evaluate_run(decisions, {}, attacked, kind);
    CHECK(report.overall.recall == 0.0);
    CHECK(report.overall.accuracy == doctest::Approx(0.5)); // negative fraction
}

TEST_CASE("evaluate_run: detector flagging only volt-var intervals") {
    // four-attack day in miniature: steps 0-3 voltvar, 4-7 disconnect, rest normal
    const std::size_t n = 16;
    std::vector<std::uint8_t> attacked(n, 0), kind(n, LabelSeries::kNoKind), decisions(n, 0);
    for (std::size_t i = 0; i < 4; ++i) {
        attacked[i] = 1;
        kind[i] = static_cast<std::uint8_t>(AttackKind::VoltVar);
        decisions[i] = 1; // flags exactly the volt-var steps
    }
    for (std::size_t i = 4; i < 8; ++i) {
        attacked[i] = 1;
        kind[i] = static_cast<std::uint8_t>(AttackKind::Disconnect);
    }
    const auto report = evaluate_run(decisions, {}, attacked, kind);
    CHECK(report.per_kind.at(AttackKind::VoltVar).recall == 1.0);
    CHECK(report.per_kind.at(AttackKind::Disconnect).recall == 0.0);
    CHECK(report.overall.recall == doctest::Approx(0.5));
    // per-kind TPs sum to the overall TP for disjoint intervals
    CHECK(report.per_kind.at(AttackKind::VoltVar).counts.tp +
              report.per_kind.at(AttackKind::Disconnect).counts.tp ==
          report.overall.counts.tp);
}

TEST_CASE("evaluate_run rejects single-class label sets") {
    std::vector<std::uint8_t> attacked(4, 0), kind(4, LabelSeries::kNoKind), decisions(4, 0);
    CHECK_THROWS_AS(evaluate_run(decisions, {}, attacked, kind), SingleClassLabels);
}
