#include "pvwatch/iforest.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "pvwatch/rng.hpp"

namespace pvwatch {

double average_path_adjustment(int m) {
    if (m <= 1) return 0.0;
    double harmonic = 0.0;
    for (int i = 1; i <= m - 1; ++i) harmonic += 1.0 / static_cast<double>(i);
    return 2.0 * harmonic - 2.0 * static_cast<double>(m - 1) / static_cast<double>(m);
}

double iso_tree_path_length(const IsoTree& tree, const Eigen::VectorXd& x) {
    int node = 0;
    double depth = 0.0;
    while (tree.nodes[node].feature >= 0) {
        const auto& nd = tree.nodes[node];
        node = x[nd.feature] <= nd.split ? nd.left : nd.right;
        depth += 1.0;
    }
    return depth + average_path_adjustment(tree.nodes[node].size);
}

double IsolationForestModel::score(const Eigen::VectorXd& x) const {
    double sum = 0.0;
    for (const auto& tree : trees) sum += iso_tree_path_length(tree, x);
    return sum / static_cast<double>(trees.size());
}

namespace {

int build_node(IsoTree& tree, const Eigen::MatrixXd& X, std::vector<Eigen::Index>& indices,
               std::size_t begin, std::size_t end, int depth, int max_depth,
               std::mt19937_64& rng) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto size = static_cast<int>(end - begin);

    auto make_leaf = [&]() {
        tree.nodes[node_id].feature = -1;
        tree.nodes[node_id].size = size;
        return node_id;
    };

    if (size <= 1 || depth >= max_depth) return make_leaf();

    std::vector<int> usable;
    for (Eigen::Index f = 0; f < X.cols(); ++f) {
        double lo = X(indices[begin], f), hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            const double v = X(indices[i], f);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi > lo) usable.push_back(static_cast<int>(f));
    }
    if (usable.empty()) return make_leaf();

    std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
    const int feature = usable[pick(rng)];
    double lo = X(indices[begin], feature), hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
        const double v = X(indices[i], feature);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::uniform_real_distribution<double> cut(lo, hi);
    const double split = cut(rng);

    // Stable partition keeps index order deterministic for the oracle.
    std::vector<Eigen::Index> left, right;
    for (std::size_t i = begin; i < end; ++i) {
        (X(indices[i], feature) <= split ? left : right).push_back(indices[i]);
    }
    std::copy(left.begin(), left.end(), indices.begin() + static_cast<std::ptrdiff_t>(begin));
    std::copy(right.begin(), right.end(),
              indices.begin() + static_cast<std::ptrdiff_t>(begin + left.size()));

    tree.nodes[node_id].feature = feature;
    tree.nodes[node_id].split = split;
    const std::size_t mid = begin + left.size();
    tree.nodes[node_id].left =
        build_node(tree, X, indices, begin, mid, depth + 1, max_depth, rng);
    tree.nodes[node_id].right =
        build_node(tree, X, indices, mid, end, depth + 1, max_depth, rng);
    return node_id;
}

} // namespace

IsolationForestModel iforest_fit(const Eigen::MatrixXd& X, int n_trees, int subsample_size,
                                 double contamination, std::uint64_t seed) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw TooFewSamples("isolation forest needs at least 2 samples");
    if (subsample_size < 2) throw ConfigError("subsample size must be >= 2");

    bool any_varying = false;
    for (Eigen::Index f = 0; f < X.cols() && !any_varying; ++f) {
        for (Eigen::Index i = 1; i < n; ++i) {
            if (X(i, f) != X(0, f)) {
                any_varying = true;
                break;
            }
        }
    }
    if (!any_varying) throw DegenerateSubsample("all points identical");

    IsolationForestModel model;
    model.subsample_size = std::min<int>(subsample_size, static_cast<int>(n));
    model.contamination = contamination;
    model.seed = seed;
    model.max_depth =
        static_cast<int>(std::ceil(std::log2(static_cast<double>(model.subsample_size))));
    model.trees.resize(n_trees);

    for (int t = 0; t < n_trees; ++t) {
        auto rng = make_rng(seed, RngStream::IsoForest, static_cast<std::uint64_t>(t));
        std::vector<Eigen::Index> indices(n);
        std::iota(indices.begin(), indices.end(), 0);
        if (model.subsample_size < n) {
            for (int i = 0; i < model.subsample_size; ++i) {
                std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                                static_cast<std::size_t>(n - 1));
                std::swap(indices[static_cast<std::size_t>(i)], indices[pick(rng)]);
            }
            indices.resize(model.subsample_size);
        }
        build_node(model.trees[t], X, indices, 0, indices.size(), 0, model.max_depth, rng);
    }
    return model;
}

} // namespace pvwatch
