#include "pvwatch/ocsvm.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace pvwatch {

namespace {

Eigen::VectorXd kernel_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& sq_norms,
                           Eigen::Index i, double gamma) {
    // k(x_i, x_j) = exp(-gamma * ||x_i - x_j||^2)
    Eigen::VectorXd dist2 =
        sq_norms.array() + sq_norms[i] - 2.0 * (X * X.row(i).transpose()).array();
    return (-gamma * dist2.array().max(0.0)).exp();
}

} // namespace

double OcsvmModel::decision(const Eigen::VectorXd& x) const {
    if (x.size() != support_vectors.cols())
        throw DimensionMismatch("ocsvm decision dimension mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
        const double d2 = (support_vectors.row(i).transpose() - x).squaredNorm();
        sum += dual_coeffs[i] * std::exp(-gamma * d2);
    }
    return sum - rho;
}

Eigen::VectorXd OcsvmModel::decision_rows(const Eigen::MatrixXd& X) const {
    if (X.cols() != support_vectors.cols())
        throw DimensionMismatch("ocsvm decision dimension mismatch");
    Eigen::VectorXd out(X.rows());
    const Eigen::VectorXd sv_sq = support_vectors.rowwise().squaredNorm();
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        Eigen::VectorXd dist2 = sv_sq.array() + X.row(r).squaredNorm() -
                                2.0 * (support_vectors * X.row(r).transpose()).array();
        out[r] = dual_coeffs.dot((-gamma * dist2.array().max(0.0)).exp().matrix()) - rho;
    }
    return out;
}

OcsvmModel ocsvm_fit(const Eigen::MatrixXd& X, double nu, double gamma, double kkt_tolerance,
                     std::size_t max_iterations) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw TooFewSamples("ocsvm needs at least 2 samples");
    if (nu <= 0.0 || nu > 1.0) throw ConfigError("nu must lie in (0, 1]");
    if (gamma <= 0.0) throw ConfigError("gamma must be positive");

    const double upper = 1.0 / (nu * static_cast<double>(n));

    // libsvm-style feasible start: fill alphas to the upper bound until the
    // unit budget is spent.
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    {
        double remaining = 1.0;
        for (Eigen::Index i = 0; i < n && remaining > 0.0; ++i) {
            const double a = std::min(upper, remaining);
            alpha[i] = a;
            remaining -= a;
        }
    }

    const Eigen::VectorXd sq_norms = X.rowwise().squaredNorm();

    // gradient g = Q alpha, maintained incrementally.
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha[i] > 0.0) grad += alpha[i] * kernel_row(X, sq_norms, i, gamma);
    }

    const double bound_eps = 1e-12;
    bool converged = false;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        // Maximal violating pair: mass should flow from the highest gradient
        // among raisable-down coords to the lowest among raisable-up coords.
        Eigen::Index i_up = -1, j_low = -1;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (alpha[k] > bound_eps && grad[k] > g_max) {
                g_max = grad[k];
                i_up = k;
            }
            if (alpha[k] < upper - bound_eps && grad[k] < g_min) {
                g_min = grad[k];
                j_low = k;
            }
        }
        if (i_up < 0 || j_low < 0 || g_max - g_min <= kkt_tolerance) {
            converged = true;
            break;
        }

        const Eigen::VectorXd k_i = kernel_row(X, sq_norms, i_up, gamma);
        const Eigen::VectorXd k_j = kernel_row(X, sq_norms, j_low, gamma);
        const double eta = k_i[i_up] + k_j[j_low] - 2.0 * k_i[j_low];

        double delta = eta > 1e-15 ? (g_max - g_min) / eta
                                   : std::numeric_limits<double>::infinity();
        delta = std::min({delta, alpha[i_up], upper - alpha[j_low]});
        if (delta <= 0.0) {
            converged = true; // numerically stuck at a bound
            break;
        }
        alpha[i_up] -= delta;
        alpha[j_low] += delta;
        grad += delta * (k_j - k_i);
    }
    if (!converged)
        throw NonConvergence("ocsvm SMO did not reach KKT tolerance within " +
                             std::to_string(max_iterations) + " iterations");

    // rho from the free support vectors (g_i = rho there), otherwise the
    // midpoint of the violating interval.
    double rho_sum = 0.0;
    int rho_count = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) {
        if (alpha[k] > bound_eps && alpha[k] < upper - bound_eps) {
            rho_sum += grad[k];
            ++rho_count;
        } else if (alpha[k] <= bound_eps) {
            hi = std::min(hi, grad[k]); // rho <= g for zero coords
        } else {
            lo = std::max(lo, grad[k]); // rho >= g at upper bound
        }
    }
    double rho;
    if (rho_count > 0) {
        rho = rho_sum / rho_count;
    } else {
        if (!std::isfinite(lo)) lo = hi;
        if (!std::isfinite(hi)) hi = lo;
        rho = 0.5 * (lo + hi);
    }

    OcsvmModel model;
    model.gamma = gamma;
    model.nu = nu;
    model.rho = rho;
    std::vector<Eigen::Index> sv;
    for (Eigen::Index k = 0; k < n; ++k)
        if (alpha[k] > 1e-12) sv.push_back(k);
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.dual_coeffs.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support_vectors.row(static_cast<Eigen::Index>(k)) = X.row(sv[k]);
        model.dual_coeffs[static_cast<Eigen::Index>(k)] = alpha[sv[k]];
    }
    return model;
}

} // namespace pvwatch
