#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pvwatch/errors.hpp"

namespace pvwatch {

enum class Activation { Relu, Linear };

// Fully connected network trained on mean-squared error with
// adaptive-moment gradient descent. Hidden layers are rectified by default;
// the output layer is always linear.
struct DenseNet {
    std::vector<Eigen::MatrixXd> weights; // layer l: out x in
    std::vector<Eigen::VectorXd> biases;
    std::vector<Activation> activations;  // per layer

    int input_size() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
    int output_size() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const; // rows are samples
};

// ReLU hidden layers, linear output.
DenseNet make_net(int input, const std::vector<int>& hidden, int output, std::uint64_t seed);
DenseNet make_net(int input, const std::vector<int>& hidden,
                  const std::vector<Activation>& hidden_activations, int output,
                  std::uint64_t seed);

// Full-batch MSE loss and its gradients (exposed for the finite-difference
// checks).
double net_loss(const DenseNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);
void net_gradients(const DenseNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                   std::vector<Eigen::MatrixXd>& grad_w, std::vector<Eigen::VectorXd>& grad_b);

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 50;
    int batch_size = 64;
    std::uint64_t seed = 0;
    int max_restarts = 3; // halve the step and restart on non-finite loss
};

struct FitReport {
    double final_mse = 0.0;
    int restarts = 0;
};

FitReport net_fit(DenseNet& net, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                  const TrainConfig& config);

// One-step-ahead state estimator over flattened sliding windows.
struct MlpEstimator {
    DenseNet net;
    int window_len = 15;
    int n_channels = 0;

    Eigen::VectorXd predict(const Eigen::VectorXd& flat_window) const;
};

MlpEstimator mlp_fit(const Eigen::MatrixXd& windows, const Eigen::MatrixXd& targets,
                     int window_len, const std::vector<int>& hidden, const TrainConfig& config);

// Denoising autoencoder: Gaussian input noise, clean reconstruction target,
// linear code layer strictly narrower than the input.
struct DaeModel {
    DenseNet net;
    double noise_std = 0.1;

    double score(const Eigen::VectorXd& x) const; // mean squared reconstruction error
};

DaeModel dae_fit(const Eigen::MatrixXd& X, const std::vector<int>& encoder_hidden, int code_size,
                 const TrainConfig& config, double noise_std = 0.1);

} // namespace pvwatch
