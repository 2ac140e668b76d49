#include "pvwatch/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pvwatch/rng.hpp"

namespace pvwatch {

namespace {

inline void apply_activation(Eigen::MatrixXd& z, Activation act) {
    if (act == Activation::Relu) z = z.cwiseMax(0.0);
}

} // namespace

Eigen::VectorXd DenseNet::forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_size()) throw DimensionMismatch("net input dimension mismatch");
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        a = (weights[l] * a + biases[l]).eval();
        if (activations[l] == Activation::Relu) a = a.cwiseMax(0.0);
    }
    return a;
}

Eigen::MatrixXd DenseNet::forward_batch(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_size()) throw DimensionMismatch("net input dimension mismatch");
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        a = ((a * weights[l].transpose()).rowwise() + biases[l].transpose()).eval();
        apply_activation(a, activations[l]);
    }
    return a;
}

DenseNet make_net(int input, const std::vector<int>& hidden, int output, std::uint64_t seed) {
    return make_net(input, hidden, std::vector<Activation>(hidden.size(), Activation::Relu),
                    output, seed);
}

DenseNet make_net(int input, const std::vector<int>& hidden,
                  const std::vector<Activation>& hidden_activations, int output,
                  std::uint64_t seed) {
    if (hidden.size() != hidden_activations.size())
        throw ConfigError("hidden sizes/activations mismatch");
    DenseNet net;
    std::vector<int> sizes;
    sizes.push_back(input);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output);

    auto rng = make_rng(seed, RngStream::NetInit);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l], out = sizes[l + 1];
        // He-uniform fan-in scaling.
        const double limit = std::sqrt(6.0 / static_cast<double>(in));
        std::uniform_real_distribution<double> init(-limit, limit);
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = init(rng);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(out));
        net.activations.push_back(l + 2 < sizes.size() ? hidden_activations[l]
                                                       : Activation::Linear);
    }
    return net;
}

double net_loss(const DenseNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    const Eigen::MatrixXd pred = net.forward_batch(X);
    return (pred - Y).squaredNorm() / static_cast<double>(X.rows() * Y.cols());
}

void net_gradients(const DenseNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                   std::vector<Eigen::MatrixXd>& grad_w, std::vector<Eigen::VectorXd>& grad_b) {
    const std::size_t layers = net.weights.size();
    std::vector<Eigen::MatrixXd> activations; // post-activation, rows samples
    activations.reserve(layers + 1);
    activations.push_back(X);
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z =
            (activations.back() * net.weights[l].transpose()).rowwise() +
            net.biases[l].transpose();
        apply_activation(z, net.activations[l]);
        activations.push_back(std::move(z));
    }

    const double scale = 2.0 / static_cast<double>(X.rows() * Y.cols());
    Eigen::MatrixXd delta = scale * (activations.back() - Y); // output layer is linear

    grad_w.assign(layers, {});
    grad_b.assign(layers, {});
    for (std::size_t l = layers; l-- > 0;) {
        grad_w[l] = delta.transpose() * activations[l];
        grad_b[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = (delta * net.weights[l]).eval();
            if (net.activations[l - 1] == Activation::Relu)
                delta = delta.cwiseProduct(
                    (activations[l].array() > 0.0).cast<double>().matrix());
        }
    }
}

FitReport net_fit(DenseNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                  const TrainConfig& config) {
    if (X.rows() != Y.rows()) throw LengthMismatch("training inputs/targets length mismatch");
    if (X.rows() == 0) throw TooFewSamples("no training samples");

    const DenseNet initial = net;
    double lr = config.learning_rate;
    FitReport report;

    for (int attempt = 0; attempt <= config.max_restarts; ++attempt) {
        net = initial;
        std::vector<Eigen::MatrixXd> m_w, v_w;
        std::vector<Eigen::VectorXd> m_b, v_b;
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
            v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
            m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
            v_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
        }
        constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

        auto rng = make_rng(config.seed, RngStream::NetShuffle);
        std::vector<Eigen::Index> order(X.rows());
        std::iota(order.begin(), order.end(), 0);

        bool diverged = false;
        long step = 0;
        for (int epoch = 0; epoch < config.epochs && !diverged; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            for (Eigen::Index start = 0; start < X.rows(); start += config.batch_size) {
                const Eigen::Index count =
                    std::min<Eigen::Index>(config.batch_size, X.rows() - start);
                Eigen::MatrixXd xb(count, X.cols()), yb(count, Y.cols());
                for (Eigen::Index i = 0; i < count; ++i) {
                    xb.row(i) = X.row(order[start + i]);
                    yb.row(i) = Y.row(order[start + i]);
                }
                std::vector<Eigen::MatrixXd> gw;
                std::vector<Eigen::VectorXd> gb;
                net_gradients(net, xb, yb, gw, gb);

                ++step;
                const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
                bool finite = true;
                for (std::size_t l = 0; l < net.weights.size(); ++l) {
                    if (!gw[l].allFinite() || !gb[l].allFinite()) {
                        finite = false;
                        break;
                    }
                    m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * gw[l];
                    v_w[l] = beta2 * v_w[l] + (1.0 - beta2) * gw[l].cwiseProduct(gw[l]);
                    m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * gb[l];
                    v_b[l] = beta2 * v_b[l] + (1.0 - beta2) * gb[l].cwiseProduct(gb[l]);
                    net.weights[l] -=
                        (lr / bc1) *
                        (m_w[l].array() / ((v_w[l].array() / bc2).sqrt() + adam_eps)).matrix();
                    net.biases[l] -=
                        (lr / bc1) *
                        (m_b[l].array() / ((v_b[l].array() / bc2).sqrt() + adam_eps)).matrix();
                }
                if (!finite) {
                    diverged = true;
                    break;
                }
            }
        }
        if (!diverged) {
            const double mse = net_loss(net, X, Y);
            if (std::isfinite(mse)) {
                report.final_mse = mse;
                return report;
            }
        }
        lr *= 0.5;
        ++report.restarts;
    }
    throw NonFiniteLoss("training diverged after " + std::to_string(config.max_restarts) +
                        " restarts");
}

Eigen::VectorXd MlpEstimator::predict(const Eigen::VectorXd& flat_window) const {
    return net.forward(flat_window);
}

MlpEstimator mlp_fit(const Eigen::MatrixXd& windows, const Eigen::MatrixXd& targets,
                     int window_len, const std::vector<int>& hidden, const TrainConfig& config) {
    MlpEstimator est;
    est.window_len = window_len;
    est.n_channels = static_cast<int>(targets.cols());
    est.net = make_net(static_cast<int>(windows.cols()), hidden,
                       static_cast<int>(targets.cols()), config.seed);
    net_fit(est.net, windows, targets, config);
    return est;
}

double DaeModel::score(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd recon = net.forward(x);
    return (recon - x).squaredNorm() / static_cast<double>(x.size());
}

DaeModel dae_fit(const Eigen::MatrixXd& X, const std::vector<int>& encoder_hidden, int code_size,
                 const TrainConfig& config, double noise_std) {
    const int input = static_cast<int>(X.cols());
    if (code_size >= input) throw ConfigError("code layer must be narrower than the input");
    if (code_size < 1) throw ConfigError("code layer must have at least one unit");
    if (noise_std < 0.0) throw ConfigError("noise std must be >= 0");

    // encoder (ReLU) -> linear code -> mirrored decoder (ReLU) -> linear out
    std::vector<int> hidden;
    std::vector<Activation> acts;
    for (int h : encoder_hidden) {
        hidden.push_back(h);
        acts.push_back(Activation::Relu);
    }
    hidden.push_back(code_size);
    acts.push_back(Activation::Linear);
    for (auto it = encoder_hidden.rbegin(); it != encoder_hidden.rend(); ++it) {
        hidden.push_back(*it);
        acts.push_back(Activation::Relu);
    }

    DaeModel model;
    model.noise_std = noise_std;
    model.net = make_net(input, hidden, acts, input, config.seed);

    Eigen::MatrixXd noisy = X;
    if (noise_std > 0.0) {
        auto rng = make_rng(config.seed, RngStream::DaeNoise);
        std::normal_distribution<double> noise(0.0, noise_std);
        for (Eigen::Index r = 0; r < noisy.rows(); ++r)
            for (Eigen::Index c = 0; c < noisy.cols(); ++c) noisy(r, c) += noise(rng);
    }
    net_fit(model.net, noisy, X, config);
    return model;
}

} // namespace pvwatch
