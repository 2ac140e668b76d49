#pragma once

#include <Eigen/Dense>

#include "pvwatch/errors.hpp"

namespace pvwatch {

// Multivariate Gaussian fitted to estimation/reconstruction errors in the
// normal scenario, with the anomaly threshold rho taken as a low quantile of
// the pdf over held-out normal residuals.
struct GaussianResidualModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;        // regularized, symmetric positive-definite
    Eigen::MatrixXd chol_lower;        // Cholesky factor of the covariance
    double log_norm_const = 0.0;       // -k/2 log(2 pi) - sum(log L_ii)
    double rho = 0.0;
    double percentile = 0.001;

    double pdf(const Eigen::VectorXd& x) const;
    double log_pdf(const Eigen::VectorXd& x) const;
    bool is_anomalous(const Eigen::VectorXd& x) const { return pdf(x) < rho; }
};

// mu/Sigma from `errors` (sample statistics plus ridge*I); rho is the
// `percentile` quantile of pdf values over `holdout`.
GaussianResidualModel residual_fit(const Eigen::MatrixXd& errors,
                                   const Eigen::MatrixXd& holdout, double percentile = 0.001,
                                   double ridge = 1e-6);
// Self-calibrating variant: the quantile is taken on the fitting errors.
GaussianResidualModel residual_fit(const Eigen::MatrixXd& errors, double percentile = 0.001,
                                   double ridge = 1e-6);

enum class ResidualVerdict { Normal, Anomaly };
ResidualVerdict residual_classify(const GaussianResidualModel& model, const Eigen::VectorXd& x);

} // namespace pvwatch
