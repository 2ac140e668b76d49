#include "pvwatch/corrupt_rf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pvwatch/rng.hpp"

namespace pvwatch {

Eigen::MatrixXd corrupt_with(const Eigen::MatrixXd& X, const Eigen::MatrixXd& noise) {
    if (noise.rows() != X.rows() || noise.cols() != X.cols())
        throw DimensionMismatch("noise matrix shape mismatch");
    return X.cwiseProduct(noise);
}

Eigen::MatrixXd corrupt(const Eigen::MatrixXd& X, std::uint64_t seed) {
    auto rng = make_rng(seed, RngStream::Corruption);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd noise(X.rows(), X.cols());
    for (Eigen::Index r = 0; r < X.rows(); ++r)
        for (Eigen::Index c = 0; c < X.cols(); ++c) noise(r, c) = unit(rng);
    return corrupt_with(X, noise);
}

double DecisionTree::predict_prob(const Eigen::VectorXd& x) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const auto& nd = nodes[node];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[node].prob1;
}

double CorruptRfModel::score(const Eigen::VectorXd& x) const {
    int votes = 0;
    for (const auto& tree : trees)
        if (tree.predict_prob(x) > 0.5) ++votes;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
}

namespace {

struct TreeBuilder {
    const Eigen::MatrixXd& X;           // stacked normal + corrupted rows
    const std::vector<std::uint8_t>& y; // labels
    int mtry;
    int min_leaf;
    std::mt19937_64& rng;
    DecisionTree& tree;

    int build(std::vector<Eigen::Index>& idx, std::size_t begin, std::size_t end) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        const std::size_t count = end - begin;
        std::size_t pos = 0;
        for (std::size_t i = begin; i < end; ++i) pos += y[idx[i]];

        auto make_leaf = [&]() {
            tree.nodes[node_id].feature = -1;
            tree.nodes[node_id].prob1 =
                static_cast<double>(pos) / static_cast<double>(count);
            return node_id;
        };
        if (count < 2 * static_cast<std::size_t>(min_leaf) || pos == 0 || pos == count)
            return make_leaf();

        // mtry features drawn without replacement.
        const int d = static_cast<int>(X.cols());
        std::vector<int> features(d);
        std::iota(features.begin(), features.end(), 0);
        for (int i = 0; i < mtry && i < d; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(features[i], features[pick(rng)]);
        }
        features.resize(std::min(mtry, d));

        // Best split by Gini impurity decrease, exact search over sorted
        // candidate values.
        double best_gini = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, std::uint8_t>> values(count);
        for (int f : features) {
            for (std::size_t i = 0; i < count; ++i)
                values[i] = {X(idx[begin + i], f), y[idx[begin + i]]};
            std::sort(values.begin(), values.end());
            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t i = 0; i + 1 < count; ++i) {
                ++left_n;
                left_pos += values[i].second;
                if (values[i].first == values[i + 1].first) continue;
                if (left_n < static_cast<std::size_t>(min_leaf)) continue;
                const std::size_t right_n = count - left_n;
                if (right_n < static_cast<std::size_t>(min_leaf)) break;
                const std::size_t right_pos = pos - left_pos;
                const double pl = static_cast<double>(left_pos) / static_cast<double>(left_n);
                const double pr = static_cast<double>(right_pos) / static_cast<double>(right_n);
                const double gini =
                    (static_cast<double>(left_n) * 2.0 * pl * (1.0 - pl) +
                     static_cast<double>(right_n) * 2.0 * pr * (1.0 - pr)) /
                    static_cast<double>(count);
                if (gini < best_gini) {
                    best_gini = gini;
                    best_feature = f;
                    best_threshold = 0.5 * (values[i].first + values[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        const auto mid_it = std::stable_partition(
            idx.begin() + static_cast<std::ptrdiff_t>(begin),
            idx.begin() + static_cast<std::ptrdiff_t>(end),
            [&](Eigen::Index i) { return X(i, best_feature) <= best_threshold; });
        const std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());
        if (mid == begin || mid == end) return make_leaf(); // midpoint rounding collapse

        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        tree.nodes[node_id].left = build(idx, begin, mid);
        tree.nodes[node_id].right = build(idx, mid, end);
        return node_id;
    }
};

} // namespace

CorruptRfModel corrupt_rf_fit(const Eigen::MatrixXd& X_normal, int n_trees, std::uint64_t seed,
                              int min_leaf) {
    return corrupt_rf_fit(X_normal, corrupt(X_normal, seed), n_trees, seed, min_leaf);
}

CorruptRfModel corrupt_rf_fit(const Eigen::MatrixXd& X_normal,
                              const Eigen::MatrixXd& X_corrupted, int n_trees,
                              std::uint64_t seed, int min_leaf) {
    if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
    const Eigen::Index n = X_normal.rows();
    if (n < 2) throw TooFewSamples("corrupt-rf needs at least 2 samples");
    if (X_corrupted.rows() != n || X_corrupted.cols() != X_normal.cols())
        throw DimensionMismatch("corrupted class shape mismatch");

    const Eigen::MatrixXd& corrupted = X_corrupted;
    if (corrupted.isApprox(X_normal))
        throw DegenerateLabels("corruption produced data identical to the normal set");

    Eigen::MatrixXd stacked(2 * n, X_normal.cols());
    stacked.topRows(n) = X_normal;
    stacked.bottomRows(n) = corrupted;
    std::vector<std::uint8_t> labels(2 * static_cast<std::size_t>(n), 0);
    std::fill(labels.begin() + n, labels.end(), std::uint8_t{1});

    CorruptRfModel model;
    model.seed = seed;
    model.trees.resize(n_trees);
    const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(
                                     static_cast<double>(X_normal.cols())))));

    for (int t = 0; t < n_trees; ++t) {
        auto rng = make_rng(seed, RngStream::RandomForest, static_cast<std::uint64_t>(t));
        std::uniform_int_distribution<Eigen::Index> boot(0, 2 * n - 1);
        std::vector<Eigen::Index> idx(2 * static_cast<std::size_t>(n));
        for (auto& i : idx) i = boot(rng);
        TreeBuilder builder{stacked, labels, mtry, min_leaf, rng, model.trees[t]};
        builder.build(idx, 0, idx.size());
    }
    return model;
}

} // namespace pvwatch
