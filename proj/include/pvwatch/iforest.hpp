#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pvwatch/errors.hpp"

namespace pvwatch {

// Isolation forest scored by the raw average root-to-termination path length
// (higher = more normal). Unresolved leaves of size m add the standard
// adjustment c(m) = 2 H(m-1) - 2 (m-1)/m with exact harmonic numbers.
//
// Randomness protocol, mirrored verbatim by the test oracle: per tree t the
// generator is make_rng(seed, IsoForest, t); a partial Fisher-Yates draws the
// subsample when it is smaller than the dataset; each internal node draws a
// uniform index into the ascending list of non-constant features, then a
// uniform split within that feature's node range; children are built left
// first.
struct IsoTree {
    struct Node {
        int feature = -1;   // -1 marks a leaf
        double split = 0.0;
        int left = -1, right = -1;
        int size = 0;       // leaf population
    };
    std::vector<Node> nodes;
};

struct IsolationForestModel {
    std::vector<IsoTree> trees;
    int subsample_size = 256;
    int max_depth = 8;
    double contamination = 1e-8;
    std::uint64_t seed = 0;

    double score(const Eigen::VectorXd& x) const; // mean path length
};

double average_path_adjustment(int m); // c(m), exact harmonic sum
double iso_tree_path_length(const IsoTree& tree, const Eigen::VectorXd& x);

IsolationForestModel iforest_fit(const Eigen::MatrixXd& X, int n_trees = 200,
                                 int subsample_size = 256, double contamination = 1e-8,
                                 std::uint64_t seed = 0);

} // namespace pvwatch
