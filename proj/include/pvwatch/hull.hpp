#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pvwatch/errors.hpp"

namespace pvwatch {

// Convex hull of projected normal points. Membership is decided by convex
// feasibility: p is inside iff weights lambda >= 0 summing to 1 reproduce p
// within the tolerance. The graded anomaly measure is the Euclidean distance
// to the hull (0 if inside).
//
// If the points are affinely dependent (rank below the ambient dimension)
// the model degrades to a per-dimension bounding box with a warning.
struct HullModel {
    Eigen::MatrixXd vertices; // n x d
    int dimension = 0;
    double tolerance = 1e-9;
    bool degenerate = false;
    Eigen::VectorXd box_min, box_max; // valid when degenerate
};

HullModel hull_fit(const Eigen::MatrixXd& points, double tolerance = 1e-9);

struct HullQuery {
    bool inside;
    double margin; // distance to the hull, 0 when inside
};

HullQuery hull_contains(const HullModel& model, const Eigen::VectorXd& p);

// Distance from p to conv(vertices) by Wolfe's minimum-norm-point algorithm.
// Terminates with a certified duality gap; exact (up to roundoff) for
// interior points.
double hull_distance(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& p);

// Batch scorer that warm-starts consecutive queries from the previous active
// vertex set.
class HullScorer {
public:
    explicit HullScorer(const HullModel& model) : model_(&model) {}
    double distance(const Eigen::VectorXd& p);

private:
    const HullModel* model_;
    std::vector<Eigen::Index> corral_;
    Eigen::VectorXd weights_;
};

namespace detail {
// Core solver shared by the one-shot and warm-started paths. corral/weights
// are in/out; returns the distance.
double min_norm_point(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& p,
                      std::vector<Eigen::Index>& corral, Eigen::VectorXd& weights);
} // namespace detail

} // namespace pvwatch
