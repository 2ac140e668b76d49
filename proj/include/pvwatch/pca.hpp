#pragma once

#include <Eigen/Dense>

#include "pvwatch/errors.hpp"

namespace pvwatch {

// Principal components of standardized data: orthonormal rows sorted by
// decreasing explained variance.
struct PcaModel {
    Eigen::MatrixXd components;        // n_components x d
    Eigen::VectorXd explained_variance;
    int n_components = 0;

    Eigen::VectorXd project(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd project_rows(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd reconstruct(const Eigen::VectorXd& z) const;
};

// Eigendecomposition of the sample covariance. If the covariance has fewer
// nonzero eigenvalues than requested, the component count is reduced with a
// warning on stderr.
PcaModel pca_fit(const Eigen::MatrixXd& X, int n_components = 5);

// Mean squared reconstruction error through the retained components.
double ipca_score(const PcaModel& model, const Eigen::VectorXd& x);

} // namespace pvwatch
