#include <doctest.h>

#include <random>

#include "pvwatch/hull.hpp"
#include "pvwatch/pca.hpp"
#include "qp_hull_oracle.hpp"

using namespace pvwatch;

namespace {

Eigen::MatrixXd gaussian_cloud(int n, int d, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < d; ++c) X(r, c) = g(rng);
    return X;
}

} // namespace

TEST_CASE("pca: exactly collinear data yields the diagonal component") {
    Eigen::MatrixXd X(6, 2);
    for (int i = 0; i < 6; ++i) {
        X(i, 0) = i - 2.5;
        X(i, 1) = i - 2.5; // y = x
    }
    const auto model = pca_fit(X, 1);
    REQUIRE(model.n_components == 1);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(model.components(0, 0)) == doctest::Approx(inv_sqrt2));
    CHECK(std::abs(model.components(0, 1)) == doctest::Approx(inv_sqrt2));
    CHECK(model.components(0, 0) * model.components(0, 1) > 0.0); // same sign
    // 100% of the variance lives on the first component
    const double total = (X.rowwise() - X.colwise().mean()).squaredNorm() / (X.rows() - 1);
    CHECK(model.explained_variance[0] == doctest::Approx(total));
}

TEST_CASE("pca: isotropic data spreads variance roughly evenly") {
    const auto X = gaussian_cloud(10000, 4, 11);
    const auto model = pca_fit(X, 4);
    const double top = model.explained_variance[0];
    const double bottom = model.explained_variance[3];
    CHECK(top / bottom < 1.2); // within 20% at n = 1e4
}

TEST_CASE("pca: orthonormal components, full reconstruction, variance budget") {
    const auto X = gaussian_cloud(300, 5, 3);
    const auto model = pca_fit(X, 5);
    REQUIRE(model.n_components == 5);
    const Eigen::MatrixXd gram = model.components * model.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-9);

    // projecting then un-projecting with all components is the identity
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 3.0);
    Eigen::VectorXd x(5);
    for (auto& v : x.reshaped()) v = g(rng);
    const Eigen::VectorXd back = model.reconstruct(model.project(x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);

    // explained variances sum to the total variance
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const double total = (X.rowwise() - mean).squaredNorm() / (X.rows() - 1);
    CHECK(model.explained_variance.sum() == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("pca: rank-deficient data reduces the component count") {
    Eigen::MatrixXd X(50, 3);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    for (int i = 0; i < 50; ++i) {
        const double a = g(rng), b = g(rng);
        X(i, 0) = a;
        X(i, 1) = b;
        X(i, 2) = a + b; // rank 2
    }
    const auto model = pca_fit(X, 3);
    CHECK(model.n_components == 2);
}

TEST_CASE("ipca: zero error inside the span, exact error outside") {
    const auto X = gaussian_cloud(100, 4, 5);
    const auto full = pca_fit(X, 4);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    Eigen::VectorXd x(4);
    for (auto& v : x.reshaped()) v = g(rng);
    CHECK(ipca_score(full, x) < 1e-12); // full rank reconstructs anything

    // error on a retained component direction is zero
    const auto partial = pca_fit(X, 2);
    const Eigen::VectorXd comp = partial.components.row(0).transpose() * 3.0;
    CHECK(ipca_score(partial, comp) < 1e-12);

    // x orthogonal to all retained components with ||x||^2 = c*d -> e = c
    Eigen::VectorXd ortho = x;
    for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXd row = partial.components.row(k).transpose();
        ortho -= row * row.dot(ortho);
    }
    REQUIRE(ortho.norm() > 1e-6);
    const double c = 1.7;
    ortho *= std::sqrt(c * 4.0) / ortho.norm(); // ||ortho||^2 = c * d
    CHECK(ipca_score(partial, ortho) == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("ipca: error nonnegative and weakly decreasing in component count") {
    const auto X = gaussian_cloud(200, 5, 8);
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(5);
        for (auto& v : x.reshaped()) v = g(rng);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 5; ++k) {
            const double e = ipca_score(pca_fit(X, k), x);
            CHECK(e >= 0.0);
            CHECK(e <= prev + 1e-12);
            prev = e;
        }
    }
}

TEST_CASE("hull: unit square membership and margins") {
    Eigen::MatrixXd corners(4, 2);
    corners << 1, 1, 1, -1, -1, 1, -1, -1;
    const auto model = hull_fit(corners);
    {
        const auto q = hull_contains(model, Eigen::Vector2d(0.0, 0.0));
        CHECK(q.inside);
        CHECK(q.margin == 0.0);
    }
    {
        const auto q = hull_contains(model, Eigen::Vector2d(2.0, 0.0));
        CHECK(!q.inside);
        CHECK(q.margin == doctest::Approx(1.0).epsilon(1e-9));
    }
    {
        // nearest point is the corner (1,1)
        const auto q = hull_contains(model, Eigen::Vector2d(2.0, 2.0));
        CHECK(!q.inside);
        CHECK(q.margin == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    }
}

TEST_CASE("hull: every training point is inside, order does not matter") {
    const auto X = gaussian_cloud(60, 3, 21);
    const auto model = hull_fit(X);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        CHECK(hull_contains(model, X.row(i).transpose()).inside);

    std::mt19937_64 rng(22);
    std::vector<Eigen::Index> perm(X.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd shuffled(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) shuffled.row(i) = X.row(perm[i]);
    const auto model2 = hull_fit(shuffled);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int probe = 0; probe < 40; ++probe) {
        Eigen::VectorXd p(3);
        for (auto& v : p.reshaped()) v = g(rng);
        const auto a = hull_contains(model, p);
        const auto b = hull_contains(model2, p);
        CHECK(a.inside == b.inside);
        CHECK(a.margin == doctest::Approx(b.margin).epsilon(1e-8));
    }
}

TEST_CASE("hull: verdicts and margins agree with the QP oracle in 5-D") {
    const auto X = gaussian_cloud(120, 5, 33);
    const auto model = hull_fit(X);
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> g;

    int inside_seen = 0, outside_seen = 0;
    for (int probe = 0; probe < 60; ++probe) {
        Eigen::VectorXd p(5);
        if (probe % 2 == 0) {
            // convex combination of five random vertices: inside by construction
            p.setZero();
            double total = 0.0;
            for (int k = 0; k < 5; ++k) {
                const double w = 0.05 + unit(rng);
                p += w * X.row(static_cast<Eigen::Index>(unit(rng) * X.rows())).transpose();
                total += w;
            }
            p /= total;
        } else {
            // support point pushed outward: outside by construction
            Eigen::VectorXd dir(5);
            for (auto& v : dir.reshaped()) v = g(rng);
            dir.normalize();
            Eigen::Index best = 0;
            double best_dot = -1e300;
            for (Eigen::Index i = 0; i < X.rows(); ++i) {
                const double dot = X.row(i) * dir;
                if (dot > best_dot) {
                    best_dot = dot;
                    best = i;
                }
            }
            p = X.row(best).transpose() + (0.1 + 2.0 * unit(rng)) * dir;
        }
        const auto q = hull_contains(model, p);
        const double oracle = pvwatch_test::qp_hull_distance(model.vertices, p);
        const bool oracle_inside = oracle <= 1e-7;
        CHECK(q.inside == oracle_inside);
        CHECK(std::abs(q.margin - (oracle_inside ? 0.0 : oracle)) < 1e-6);
        (q.inside ? inside_seen : outside_seen)++;
    }
    CHECK(inside_seen >= 20);
    CHECK(outside_seen >= 20);
}

TEST_CASE("hull: affinely dependent points degrade to a bounding box") {
    Eigen::MatrixXd flat(10, 3);
    std::mt19937_64 rng(44);
    std::normal_distribution<double> g;
    for (int i = 0; i < 10; ++i) {
        flat(i, 0) = g(rng);
        flat(i, 1) = g(rng);
        flat(i, 2) = 2.0 * flat(i, 0) - flat(i, 1); // a plane in 3-D
    }
    const auto model = hull_fit(flat);
    CHECK(model.degenerate);
    for (Eigen::Index i = 0; i < flat.rows(); ++i)
        CHECK(hull_contains(model, flat.row(i).transpose()).inside);
    Eigen::VectorXd out = flat.colwise().maxCoeff();
    out.array() += 1.0;
    const auto q = hull_contains(model, out);
    CHECK(!q.inside);
    CHECK(q.margin == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("hull: too few points rejected") {
    Eigen::MatrixXd three(3, 3);
    three.setRandom();
    CHECK_THROWS_AS(hull_fit(three), TooFewSamples);
}

TEST_CASE("hull scorer warm start matches cold queries") {
    const auto X = gaussian_cloud(150, 4, 55);
    const auto model = hull_fit(X);
    HullScorer scorer(model);
    std::mt19937_64 rng(56);
    std::normal_distribution<double> g(0.0, 1.5);
    Eigen::VectorXd p(4);
    for (auto& v : p.reshaped()) v = g(rng);
    for (int step = 0; step < 50; ++step) {
        // drifting query sequence mimics consecutive timesteps
        for (auto& v : p.reshaped()) v += 0.1 * g(rng);
        const double warm = scorer.distance(p);
        const double cold = hull_distance(model.vertices, p);
        CHECK(warm == doctest::Approx(cold <= model.tolerance ? 0.0 : cold).epsilon(1e-9));
        const double oracle = pvwatch_test::qp_hull_distance(model.vertices, p);
        CHECK(std::abs(warm - (oracle <= 1e-7 ? 0.0 : oracle)) < 1e-6);
    }
}
