#include "pvwatch/hull.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace pvwatch {

namespace detail {

namespace {

// Affine minimizer over the corral: min ||W^T mu||^2 s.t. sum(mu) = 1 via the
// bordered KKT system. A tiny ridge keeps the solve well-posed when the
// corral grazes affine dependence.
Eigen::VectorXd affine_minimizer(const Eigen::MatrixXd& w_corral) {
    const Eigen::Index m = w_corral.rows();
    Eigen::MatrixXd kkt(m + 1, m + 1);
    kkt.topLeftCorner(m, m) = w_corral * w_corral.transpose();
    const double ridge = 1e-14 * (kkt.topLeftCorner(m, m).trace() + 1.0);
    kkt.topLeftCorner(m, m) += ridge * Eigen::MatrixXd::Identity(m, m);
    kkt.topRightCorner(m, 1).setOnes();
    kkt.bottomLeftCorner(1, m).setOnes();
    kkt(m, m) = 0.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs[m] = 1.0;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    return sol.head(m);
}

} // namespace

double min_norm_point(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& p,
                      std::vector<Eigen::Index>& corral, Eigen::VectorXd& weights) {
    const Eigen::Index n = vertices.rows();
    const Eigen::Index d = vertices.cols();
    if (p.size() != d) throw DimensionMismatch("hull query dimension mismatch");

    // Work on the translated set w_i = v_i - p; the min-norm point of its
    // hull is the residual of the projection of p.
    auto w_row = [&](Eigen::Index i) { return vertices.row(i) - p.transpose(); };

    if (corral.empty()) {
        Eigen::Index best = 0;
        double best_norm = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double nn = w_row(i).squaredNorm();
            if (nn < best_norm) {
                best_norm = nn;
                best = i;
            }
        }
        corral = {best};
        weights = Eigen::VectorXd::Ones(1);
    }

    auto corral_matrix = [&]() {
        Eigen::MatrixXd W(static_cast<Eigen::Index>(corral.size()), d);
        for (std::size_t i = 0; i < corral.size(); ++i) W.row(i) = w_row(corral[i]);
        return W;
    };

    // Restore affine-optimal weights for a warm-started corral.
    {
        Eigen::MatrixXd W = corral_matrix();
        Eigen::VectorXd mu = affine_minimizer(W);
        if ((mu.array() > 1e-12).all()) {
            weights = mu;
        } else {
            corral.resize(1);
            weights = Eigen::VectorXd::Ones(1);
        }
    }

    constexpr double kEps = 1e-12;
    const Eigen::Index max_major = 8 * n + 128;

    Eigen::VectorXd x = corral_matrix().transpose() * weights;

    for (Eigen::Index major = 0; major < max_major; ++major) {
        const double xx = x.squaredNorm();
        // Linear minimization over all vertices: argmin <x, w_i>.
        const Eigen::VectorXd dots = vertices * x;
        const double px = p.dot(x);
        Eigen::Index j = 0;
        double min_dot = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dot = dots[i] - px;
            if (dot < min_dot) {
                min_dot = dot;
                j = i;
            }
        }
        // Certified Frank-Wolfe gap: xx - min_dot >= f - f*.
        if (xx - min_dot <= 1e-13 * std::max(xx, 1.0)) break;
        if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;

        corral.push_back(j);
        weights.conservativeResize(weights.size() + 1);
        weights[weights.size() - 1] = 0.0;

        // Minor cycle: move to the affine minimizer, dropping vertices whose
        // weight would leave the simplex.
        while (true) {
            Eigen::MatrixXd W = corral_matrix();
            Eigen::VectorXd mu = affine_minimizer(W);
            if ((mu.array() > kEps).all()) {
                weights = mu;
                x = W.transpose() * mu;
                break;
            }
            double theta = 1.0;
            for (Eigen::Index i = 0; i < mu.size(); ++i) {
                if (mu[i] <= kEps && weights[i] > mu[i]) {
                    theta = std::min(theta, weights[i] / (weights[i] - mu[i]));
                }
            }
            Eigen::VectorXd blended = (1.0 - theta) * weights + theta * mu;
            std::vector<Eigen::Index> next_corral;
            std::vector<double> next_weights;
            for (Eigen::Index i = 0; i < blended.size(); ++i) {
                if (blended[i] > kEps) {
                    next_corral.push_back(corral[i]);
                    next_weights.push_back(blended[i]);
                }
            }
            if (next_corral.empty()) {
                next_corral.push_back(corral[0]);
                next_weights.push_back(1.0);
            }
            corral = std::move(next_corral);
            weights = Eigen::Map<Eigen::VectorXd>(next_weights.data(),
                                                  static_cast<Eigen::Index>(next_weights.size()));
            const double sum = weights.sum();
            if (sum > 0.0) weights /= sum;
            if (weights.size() == 1) {
                x = w_row(corral[0]).transpose();
                break;
            }
        }
    }

    return x.norm();
}

} // namespace detail

HullModel hull_fit(const Eigen::MatrixXd& points, double tolerance) {
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    if (n < d + 1) throw TooFewSamples("hull needs at least dimension + 1 points");

    HullModel model;
    model.dimension = static_cast<int>(d);
    model.tolerance = tolerance;

    const Eigen::RowVectorXd mean = points.colwise().mean();
    const Eigen::MatrixXd centered = points.rowwise() - mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto& sv = svd.singularValues();
    const double sv_tol = 1e-9 * std::max(sv.size() > 0 ? sv[0] : 0.0, 1.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > sv_tol) ++rank;

    if (rank < d) {
        std::cerr << "pvwatch: hull vertices are affinely dependent (rank " << rank << " < " << d
                  << "), falling back to bounding box\n";
        model.degenerate = true;
        model.box_min = points.colwise().minCoeff();
        model.box_max = points.colwise().maxCoeff();
    }
    model.vertices = points;
    return model;
}

HullQuery hull_contains(const HullModel& model, const Eigen::VectorXd& p) {
    if (p.size() != model.vertices.cols())
        throw DimensionMismatch("hull query dimension mismatch");
    double dist;
    if (model.degenerate) {
        double sq = 0.0;
        for (Eigen::Index c = 0; c < p.size(); ++c) {
            const double lo = model.box_min[c], hi = model.box_max[c];
            const double excess = p[c] < lo ? lo - p[c] : (p[c] > hi ? p[c] - hi : 0.0);
            sq += excess * excess;
        }
        dist = std::sqrt(sq);
    } else {
        dist = hull_distance(model.vertices, p);
    }
    if (dist <= model.tolerance) return {true, 0.0};
    return {false, dist};
}

double hull_distance(const Eigen::MatrixXd& vertices, const Eigen::VectorXd& p) {
    std::vector<Eigen::Index> corral;
    Eigen::VectorXd weights;
    return detail::min_norm_point(vertices, p, corral, weights);
}

double HullScorer::distance(const Eigen::VectorXd& p) {
    if (model_->degenerate) return hull_contains(*model_, p).margin;
    const double dist = detail::min_norm_point(model_->vertices, p, corral_, weights_);
    return dist <= model_->tolerance ? 0.0 : dist;
}

} // namespace pvwatch
