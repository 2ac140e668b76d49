#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pvwatch/errors.hpp"

namespace pvwatch {

// Element-wise multiplication by i.i.d. Uniform(0,1) draws; breaks feature
// interdependencies while keeping marginal scale.
Eigen::MatrixXd corrupt(const Eigen::MatrixXd& X, std::uint64_t seed);
Eigen::MatrixXd corrupt_with(const Eigen::MatrixXd& X, const Eigen::MatrixXd& noise);

struct DecisionTree {
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        double prob1 = 0.0; // leaf class-1 fraction
    };
    std::vector<Node> nodes;

    double predict_prob(const Eigen::VectorXd& x) const;
};

// Binary classifier taught to separate normal rows (label 0) from corrupted
// copies (label 1); the anomaly score of a sample is the fraction of trees
// voting class 1, thresholded at 0.5 downstream.
struct CorruptRfModel {
    std::vector<DecisionTree> trees;
    std::uint64_t seed = 0;

    double score(const Eigen::VectorXd& x) const;
};

// min_leaf keeps every leaf populated by at least that many bootstrap rows;
// fully-grown single-row leaves memorize the training set and let the
// corrupted class claim all the space between training points.
CorruptRfModel corrupt_rf_fit(const Eigen::MatrixXd& X_normal, int n_trees = 100,
                              std::uint64_t seed = 0, int min_leaf = 5);

// Variant with an explicitly supplied corrupted class. The detector pipeline
// corrupts in floor-referenced raw units and maps both classes through the
// shared standardizer; corrupting after standardization would center the
// corrupted class on the normal mean and invert the intended geometry.
CorruptRfModel corrupt_rf_fit(const Eigen::MatrixXd& X_normal,
                              const Eigen::MatrixXd& X_corrupted, int n_trees,
                              std::uint64_t seed, int min_leaf = 5);

} // namespace pvwatch
