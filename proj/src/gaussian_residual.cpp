#include "pvwatch/gaussian_residual.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pvwatch {

double GaussianResidualModel::log_pdf(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size()) throw DimensionMismatch("residual dimension mismatch");
    const Eigen::VectorXd centered = x - mean;
    const Eigen::VectorXd z =
        chol_lower.triangularView<Eigen::Lower>().solve(centered);
    return log_norm_const - 0.5 * z.squaredNorm();
}

double GaussianResidualModel::pdf(const Eigen::VectorXd& x) const {
    return std::exp(log_pdf(x));
}

GaussianResidualModel residual_fit(const Eigen::MatrixXd& errors, const Eigen::MatrixXd& holdout,
                                   double percentile, double ridge) {
    const Eigen::Index n = errors.rows();
    const Eigen::Index k = errors.cols();
    if (n < k + 1) throw TooFewSamples("need at least k + 1 error vectors");
    if (holdout.cols() != k) throw DimensionMismatch("holdout dimension mismatch");
    if (percentile <= 0.0 || percentile >= 1.0)
        throw ConfigError("percentile must lie in (0, 1)");

    GaussianResidualModel model;
    model.percentile = percentile;
    model.mean = errors.colwise().mean();
    const Eigen::MatrixXd centered = errors.rowwise() - model.mean.transpose();
    model.covariance = centered.transpose() * centered / static_cast<double>(n - 1) +
                       ridge * Eigen::MatrixXd::Identity(k, k);

    Eigen::LLT<Eigen::MatrixXd> llt(model.covariance);
    if (llt.info() != Eigen::Success)
        throw Error("covariance not positive-definite after regularization");
    model.chol_lower = llt.matrixL();

    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) log_det_half += std::log(model.chol_lower(i, i));
    model.log_norm_const =
        -0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi) - log_det_half;

    std::vector<double> pdfs(static_cast<std::size_t>(holdout.rows()));
    for (Eigen::Index i = 0; i < holdout.rows(); ++i)
        pdfs[static_cast<std::size_t>(i)] = model.pdf(holdout.row(i).transpose());
    if (pdfs.empty()) throw TooFewSamples("empty holdout for threshold calibration");
    std::sort(pdfs.begin(), pdfs.end());
    // k-th smallest with k = max(1, floor(q n)): at most (k-1)/n < q of the
    // holdout falls strictly below rho.
    const std::size_t rank = std::max<std::size_t>(
        1, static_cast<std::size_t>(percentile * static_cast<double>(pdfs.size())));
    model.rho = pdfs[rank - 1];
    return model;
}

GaussianResidualModel residual_fit(const Eigen::MatrixXd& errors, double percentile,
                                   double ridge) {
    return residual_fit(errors, errors, percentile, ridge);
}

ResidualVerdict residual_classify(const GaussianResidualModel& model, const Eigen::VectorXd& x) {
    return model.pdf(x) < model.rho ? ResidualVerdict::Anomaly : ResidualVerdict::Normal;
}

} // namespace pvwatch
