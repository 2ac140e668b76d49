#include "pvwatch/pca.hpp"

#include <iostream>

namespace pvwatch {

Eigen::VectorXd PcaModel::project(const Eigen::VectorXd& x) const {
    if (x.size() != components.cols())
        throw DimensionMismatch("pca projection dimension mismatch");
    return components * x;
}

Eigen::MatrixXd PcaModel::project_rows(const Eigen::MatrixXd& X) const {
    if (X.cols() != components.cols())
        throw DimensionMismatch("pca projection dimension mismatch");
    return X * components.transpose();
}

Eigen::VectorXd PcaModel::reconstruct(const Eigen::VectorXd& z) const {
    if (z.size() != components.rows())
        throw DimensionMismatch("pca reconstruction dimension mismatch");
    return components.transpose() * z;
}

PcaModel pca_fit(const Eigen::MatrixXd& X, int n_components) {
    if (n_components < 1) throw ConfigError("n_components must be >= 1");
    const Eigen::Index n = X.rows(), d = X.cols();
    if (n < 2) throw TooFewSamples("pca needs at least 2 rows");

    int k = std::min<int>(n_components, static_cast<int>(d));

    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - mean;
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("pca eigendecomposition failed");

    // Eigen returns ascending eigenvalues; take from the back.
    const Eigen::VectorXd evals = solver.eigenvalues();
    const double max_eval = std::max(evals.maxCoeff(), 0.0);
    const double rank_tol = 1e-12 * std::max(max_eval, 1.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        if (evals[i] > rank_tol) ++rank;
    if (rank == 0) throw Error("pca on rank-zero data");
    if (rank < k) {
        std::cerr << "pvwatch: pca rank deficient, reducing components " << k << " -> " << rank
                  << "\n";
        k = rank;
    }

    PcaModel model;
    model.n_components = k;
    model.components.resize(k, d);
    model.explained_variance.resize(k);
    for (int i = 0; i < k; ++i) {
        const Eigen::Index src = d - 1 - i;
        model.components.row(i) = solver.eigenvectors().col(src).transpose();
        model.explained_variance[i] = evals[src];
    }
    return model;
}

double ipca_score(const PcaModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.components.cols())
        throw DimensionMismatch("ipca score dimension mismatch");
    const Eigen::VectorXd residual = x - model.reconstruct(model.project(x));
    return residual.squaredNorm() / static_cast<double>(x.size());
}

} // namespace pvwatch
