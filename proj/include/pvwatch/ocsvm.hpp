#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "pvwatch/errors.hpp"

namespace pvwatch {

// One-class SVM in the Schoelkopf nu-formulation with an RBF kernel,
// decision(x) = sum_i alpha_i k(x_i, x) - rho. Normal points score >= 0,
// anomalies < 0.
struct OcsvmModel {
    Eigen::MatrixXd support_vectors; // rows
    Eigen::VectorXd dual_coeffs;     // matching alphas (> 0)
    double rho = 0.0;
    double gamma = 0.0;
    double nu = 0.0;

    double decision(const Eigen::VectorXd& x) const;
    Eigen::VectorXd decision_rows(const Eigen::MatrixXd& X) const;
};

// Solves the dual min 1/2 a^T Q a, 0 <= a_i <= 1/(nu n), sum a = 1 by
// maximal-violating-pair SMO to the given KKT tolerance.
OcsvmModel ocsvm_fit(const Eigen::MatrixXd& X, double nu, double gamma,
                     double kkt_tolerance = 1e-6, std::size_t max_iterations = 100000);

} // namespace pvwatch
