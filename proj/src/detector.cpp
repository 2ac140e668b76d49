#include "pvwatch/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <nlohmann/json.hpp>

namespace pvwatch {

std::string detector_kind_name(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::Nn: return "nn";
    case DetectorKind::Dae: return "dae";
    case DetectorKind::Ocsvm: return "ocsvm";
    case DetectorKind::IsoForest: return "iforest";
    case DetectorKind::CorruptRf: return "corrupt-rf";
    case DetectorKind::PcaHull: return "pca-ch";
    case DetectorKind::InversePca: return "ipca";
    }
    return "?";
}

std::optional<DetectorKind> detector_kind_from_name(const std::string& name) {
    for (DetectorKind kind : all_detector_kinds())
        if (detector_kind_name(kind) == name) return kind;
    return std::nullopt;
}

std::vector<DetectorKind> all_detector_kinds() {
    return {DetectorKind::Nn,        DetectorKind::Dae,     DetectorKind::Ocsvm,
            DetectorKind::IsoForest, DetectorKind::CorruptRf, DetectorKind::PcaHull,
            DetectorKind::InversePca};
}

Orientation detector_orientation(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::Nn:
    case DetectorKind::Dae:
    case DetectorKind::Ocsvm:
    case DetectorKind::IsoForest:
        return Orientation::LowIsAnomalous;
    case DetectorKind::CorruptRf:
    case DetectorKind::PcaHull:
    case DetectorKind::InversePca:
        return Orientation::HighIsAnomalous;
    }
    return Orientation::LowIsAnomalous;
}

bool detector_normalizes(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::Nn:
    case DetectorKind::Dae:
    case DetectorKind::Ocsvm:
    case DetectorKind::IsoForest:
        return true;
    default:
        return false;
    }
}

ThresholdRuleKind detector_threshold_rule(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::Ocsvm:
    case DetectorKind::IsoForest:
        return ThresholdRuleKind::MedianMinus3Sigma;
    case DetectorKind::Nn:
    case DetectorKind::Dae:
        return ThresholdRuleKind::PdfQuantile;
    case DetectorKind::CorruptRf:
    case DetectorKind::PcaHull:
        return ThresholdRuleKind::FixedValue;
    case DetectorKind::InversePca:
        return ThresholdRuleKind::MeanPlus3Sigma;
    }
    return ThresholdRuleKind::FixedValue;
}

namespace {

Eigen::MatrixXd even_stride(const Eigen::MatrixXd& X, int max_rows) {
    if (max_rows <= 0 || X.rows() <= max_rows) return X;
    const std::size_t n = static_cast<std::size_t>(X.rows());
    const std::size_t keep = static_cast<std::size_t>(max_rows);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(keep), X.cols());
    for (std::size_t i = 0; i < keep; ++i)
        out.row(static_cast<Eigen::Index>(i)) =
            X.row(static_cast<Eigen::Index>(i * n / keep));
    return out;
}

// DAE samples: flattened windows [t - wl + 1, t] for each scored step t.
Eigen::MatrixXd dae_samples(const Eigen::MatrixXd& X, int window_len) {
    const Eigen::Index wl = window_len;
    const Eigen::Index d = X.cols();
    if (X.rows() < wl) throw FrameTooShort("frame shorter than window");
    const Eigen::Index n = X.rows() - wl + 1;
    Eigen::MatrixXd out(n, wl * d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index t = 0; t < wl; ++t)
            out.block(i, t * d, 1, d) = X.row(i + t);
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_rows(const Eigen::MatrixXd& X,
                                                       double holdout_fraction) {
    const Eigen::Index n = X.rows();
    Eigen::Index n_hold = static_cast<Eigen::Index>(
        std::floor(holdout_fraction * static_cast<double>(n)));
    n_hold = std::max<Eigen::Index>(1, std::min(n_hold, n - 1));
    return {X.topRows(n - n_hold), X.bottomRows(n_hold)};
}

} // namespace

ScoredSeries GroupModel::score(const Eigen::MatrixXd& raw) const {
    const Eigen::MatrixXd X = scaler.transform(raw);
    ScoredSeries series;
    switch (kind) {
    case DetectorKind::Ocsvm: {
        const Eigen::VectorXd d = ocsvm->decision_rows(X);
        series.values.assign(d.data(), d.data() + d.size());
        break;
    }
    case DetectorKind::IsoForest: {
        series.values.resize(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            series.values[i] = iforest->score(X.row(i).transpose());
        break;
    }
    case DetectorKind::CorruptRf: {
        series.values.resize(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            series.values[i] = rf->score(X.row(i).transpose());
        break;
    }
    case DetectorKind::PcaHull: {
        const Eigen::MatrixXd proj = pca->project_rows(X);
        HullScorer scorer(*hull);
        series.values.resize(proj.rows());
        for (Eigen::Index i = 0; i < proj.rows(); ++i)
            series.values[i] = scorer.distance(proj.row(i).transpose());
        break;
    }
    case DetectorKind::InversePca: {
        series.values.resize(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            series.values[i] = ipca_score(*pca, X.row(i).transpose());
        break;
    }
    case DetectorKind::Nn: {
        const WindowSpec spec{static_cast<std::size_t>(window_len), 1};
        const WindowBatch batch = window_batch(X, spec);
        series.start = static_cast<std::size_t>(window_len);
        series.values.resize(batch.inputs.rows());
        for (Eigen::Index i = 0; i < batch.inputs.rows(); ++i) {
            const Eigen::VectorXd err =
                batch.targets.row(i).transpose() - mlp->predict(batch.inputs.row(i).transpose());
            series.values[i] = residual->pdf(err);
        }
        break;
    }
    case DetectorKind::Dae: {
        const Eigen::MatrixXd samples = dae_samples(X, window_len);
        series.start = static_cast<std::size_t>(window_len - 1);
        series.values.resize(samples.rows());
        Eigen::VectorXd err(1);
        for (Eigen::Index i = 0; i < samples.rows(); ++i) {
            err[0] = dae->score(samples.row(i).transpose());
            series.values[i] = residual->pdf(err);
        }
        break;
    }
    }
    return series;
}

GroupModel fit_group_model(DetectorKind kind, const ChannelGroup& group,
                           const Eigen::MatrixXd& raw_train, const DetectorConfig& config,
                           bool compute_train_scores) {
    GroupModel model;
    model.kind = kind;
    model.group = group.kind;
    model.channels = group.channel_names;
    model.seed = config.seed;
    model.window_len = config.window_len;
    model.scaler = fit_standardizer(raw_train);

    const Eigen::MatrixXd X = model.scaler.transform(raw_train);
    const int d = static_cast<int>(X.cols());

    switch (kind) {
    case DetectorKind::Ocsvm: {
        const double gamma = 1.0 / static_cast<double>(d); // paper default 1/n_f
        const Eigen::MatrixXd sub = even_stride(X, config.ocsvm_max_train);
        model.ocsvm = ocsvm_fit(sub, config.ocsvm_nu, gamma, config.ocsvm_kkt_tol);
        break;
    }
    case DetectorKind::IsoForest:
        model.iforest = iforest_fit(X, config.iforest_trees, config.iforest_subsample,
                                    config.contamination, config.seed);
        break;
    case DetectorKind::CorruptRf: {
        // Multiplicative corruption in anchor-referenced raw coordinates:
        // channels with a natural zero floor keep the plain U*X formula,
        // offset channels anchor two observed ranges below their minimum so
        // the corrupted mass vacates the normal band instead of piling onto
        // it. Both classes go through the shared standardizer.
        const Eigen::MatrixXd raw_sub = even_stride(raw_train, config.rf_max_train);
        const Eigen::RowVectorXd mins = raw_sub.colwise().minCoeff();
        const Eigen::RowVectorXd maxs = raw_sub.colwise().maxCoeff();
        Eigen::RowVectorXd anchor(raw_sub.cols());
        for (Eigen::Index c = 0; c < raw_sub.cols(); ++c)
            anchor[c] = mins[c] == 0.0 ? 0.0 : mins[c] - 2.0 * (maxs[c] - mins[c]);
        const Eigen::MatrixXd corrupted_raw =
            corrupt(Eigen::MatrixXd(raw_sub.rowwise() - anchor), config.seed).rowwise() +
            anchor;
        model.rf = corrupt_rf_fit(model.scaler.transform(raw_sub),
                                  model.scaler.transform(corrupted_raw), config.rf_trees,
                                  config.seed, config.rf_min_leaf);
        break;
    }
    case DetectorKind::PcaHull: {
        model.pca = pca_fit(X, std::min(config.pca_dims, d));
        const Eigen::MatrixXd proj = model.pca->project_rows(X);
        model.hull = hull_fit(even_stride(proj, config.hull_max_vertices),
                              config.hull_tolerance);
        break;
    }
    case DetectorKind::InversePca:
        model.pca = pca_fit(X, std::min(config.pca_dims, d));
        break;
    case DetectorKind::Nn: {
        const WindowSpec spec{static_cast<std::size_t>(config.window_len), 1};
        const WindowBatch batch = window_batch(X, spec);
        if (batch.inputs.rows() < 8) throw TooFewSamples("not enough windows to train");
        const auto [fit_in, hold_in] = split_rows(batch.inputs, config.holdout_fraction);
        const auto [fit_tg, hold_tg] = split_rows(batch.targets, config.holdout_fraction);
        TrainConfig tc;
        tc.learning_rate = config.learning_rate;
        tc.epochs = config.epochs;
        tc.batch_size = config.batch_size;
        tc.seed = config.seed;
        model.mlp = mlp_fit(fit_in, fit_tg, config.window_len, config.mlp_hidden, tc);
        const Eigen::MatrixXd fit_errors = fit_tg - model.mlp->net.forward_batch(fit_in);
        const Eigen::MatrixXd hold_errors = hold_tg - model.mlp->net.forward_batch(hold_in);
        model.residual =
            residual_fit(fit_errors, hold_errors, config.residual_percentile);
        break;
    }
    case DetectorKind::Dae: {
        const Eigen::MatrixXd samples = dae_samples(X, config.window_len);
        if (samples.rows() < 8) throw TooFewSamples("not enough windows to train");
        const auto [fit_s, hold_s] = split_rows(samples, config.holdout_fraction);
        TrainConfig tc;
        tc.learning_rate = config.learning_rate;
        tc.epochs = config.epochs;
        tc.batch_size = config.batch_size;
        tc.seed = config.seed;
        const int code = std::max(1, static_cast<int>(samples.cols()) / 4);
        model.dae = dae_fit(fit_s, config.dae_hidden, code, tc, config.dae_noise_std);
        auto recon_errors = [&](const Eigen::MatrixXd& rows) {
            Eigen::MatrixXd errs(rows.rows(), 1);
            for (Eigen::Index i = 0; i < rows.rows(); ++i)
                errs(i, 0) = model.dae->score(rows.row(i).transpose());
            return errs;
        };
        model.residual = residual_fit(recon_errors(fit_s), recon_errors(hold_s),
                                      config.residual_percentile);
        break;
    }
    }

    // Training-span anomaly measures feed normalization and thresholds. The
    // hull's fixed zero threshold never consumes them, and the full-series
    // distance scan is the one expensive case, so it is skipped.
    if (compute_train_scores && kind != DetectorKind::PcaHull)
        model.train_scores = model.score(raw_train);
    return model;
}

namespace {

std::vector<double> scale_by(std::span<const double> values, double divisor) {
    std::vector<double> out(values.begin(), values.end());
    if (divisor != 1.0)
        for (double& v : out) v /= divisor;
    return out;
}

double fit_divisor(const GroupModel& model) {
    const auto& scores = model.train_scores.values;
    if (scores.empty()) throw TooFewSamples("no training scores to normalize");
    const double max_train = *std::max_element(scores.begin(), scores.end());
    if (max_train == 0.0) return 1.0; // ZeroMax fallback
    return max_train;
}

std::vector<double> fuse(const FusionSettings& fusion, Orientation orientation,
                         std::span<const double> a, std::span<const double> b,
                         std::span<const double> c) {
    if (fusion.scheme == FusionSettings::Scheme::Linear)
        return fuse_linear(a, b, c, fusion.w1, fusion.w2, fusion.w3);
    return fuse_most_anomalous(a, b, c, orientation);
}

ThresholdRule fit_rule_for(DetectorKind kind, const DetectorConfig& config,
                           std::span<const double> train_series) {
    const Orientation orientation = detector_orientation(kind);
    const ThresholdRuleKind rule_kind = detector_threshold_rule(kind);
    switch (rule_kind) {
    case ThresholdRuleKind::MedianMinus3Sigma: {
        ThresholdRule rule = fit_threshold(rule_kind, train_series, orientation, 0.0);
        if (kind == DetectorKind::IsoForest)
            rule.value -= config.contamination; // contamination acts as slack
        return rule;
    }
    case ThresholdRuleKind::MeanPlus3Sigma:
        return fit_threshold(rule_kind, train_series, orientation, 0.0);
    case ThresholdRuleKind::FixedValue: {
        const double fixed =
            kind == DetectorKind::CorruptRf ? 0.5 : config.hull_tolerance;
        return fit_threshold(rule_kind, train_series, orientation, fixed);
    }
    case ThresholdRuleKind::PdfQuantile: {
        // Quantile over the held-out tail of the training span.
        const std::size_t n = train_series.size();
        std::size_t hold = static_cast<std::size_t>(
            std::floor(config.holdout_fraction * static_cast<double>(n)));
        hold = std::max<std::size_t>(1, std::min(hold, n > 1 ? n - 1 : 1));
        return fit_threshold(rule_kind, train_series.subspan(n - hold),
                             detector_orientation(kind), config.residual_percentile);
    }
    }
    throw Error("unreachable");
}

} // namespace

FusedThreshold fit_fused_threshold(DetectorKind kind, const DetectorConfig& config,
                                   const FusionSettings& fusion, const GroupModel& m1,
                                   const GroupModel& m2, const GroupModel& m3) {
    FusedThreshold out;
    if (kind == DetectorKind::PcaHull) {
        // Fixed zero threshold on hull distances; nothing to fit.
        out.fused_rule = fit_rule_for(kind, config, {});
        out.rule_m1 = out.rule_m2 = out.rule_m3 = out.fused_rule;
        return out;
    }
    if (detector_normalizes(kind)) {
        out.divisor_m1 = fit_divisor(m1);
        out.divisor_m2 = fit_divisor(m2);
        out.divisor_m3 = fit_divisor(m3);
    }
    const auto t1 = scale_by(m1.train_scores.values, out.divisor_m1);
    const auto t2 = scale_by(m2.train_scores.values, out.divisor_m2);
    const auto t3 = scale_by(m3.train_scores.values, out.divisor_m3);
    if (t1.size() != t2.size() || t1.size() != t3.size())
        throw LengthMismatch("training score series lengths differ across models");
    const auto fused = fuse(fusion, detector_orientation(kind), t1, t2, t3);
    out.fused_rule = fit_rule_for(kind, config, fused);
    out.rule_m1 = fit_rule_for(kind, config, t1);
    out.rule_m2 = fit_rule_for(kind, config, t2);
    out.rule_m3 = fit_rule_for(kind, config, t3);
    return out;
}

HouseScores score_house(const GroupModel& m1_model, const GroupModel& m2_model,
                        const ScoredSeries& m3_scores, const FusedThreshold& threshold,
                        const FusionSettings& fusion, const Eigen::MatrixXd& pv_raw,
                        const Eigen::MatrixXd& load_raw) {
    const ScoredSeries s1 = m1_model.score(pv_raw);
    const ScoredSeries s2 = m2_model.score(load_raw);
    if (s1.start != s2.start || s1.start != m3_scores.start ||
        s1.values.size() != s2.values.size() || s1.values.size() != m3_scores.values.size())
        throw LengthMismatch("model score series are misaligned");

    HouseScores out;
    out.start = s1.start;
    out.m1 = scale_by(s1.values, threshold.divisor_m1);
    out.m2 = scale_by(s2.values, threshold.divisor_m2);
    out.m3 = scale_by(m3_scores.values, threshold.divisor_m3);
    out.fused = fuse(fusion, detector_orientation(m1_model.kind), out.m1, out.m2, out.m3);
    out.decisions.resize(out.fused.size());
    for (std::size_t i = 0; i < out.fused.size(); ++i) {
        bool flag;
        if (fusion.per_model_or) {
            flag = threshold.rule_m1.flags(out.m1[i]) || threshold.rule_m2.flags(out.m2[i]) ||
                   threshold.rule_m3.flags(out.m3[i]);
        } else {
            flag = threshold.fused_rule.flags(out.fused[i]);
        }
        out.decisions[i] = flag ? 1 : 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> flat(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            flat[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    j["data"] = flat;
    return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows"), cols = j.at("cols");
    const auto flat = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw SchemaMismatch("matrix payload size mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const json& j) {
    const auto vals = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                             static_cast<Eigen::Index>(vals.size()));
}

json net_to_json(const DenseNet& net) {
    json layers = json::array();
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        json layer;
        layer["weights"] = matrix_to_json(net.weights[l]);
        layer["biases"] = vector_to_json(net.biases[l]);
        layer["activation"] = net.activations[l] == Activation::Relu ? "relu" : "linear";
        layers.push_back(std::move(layer));
    }
    return layers;
}

DenseNet net_from_json(const json& j) {
    DenseNet net;
    for (const auto& layer : j) {
        net.weights.push_back(matrix_from_json(layer.at("weights")));
        net.biases.push_back(vector_from_json(layer.at("biases")));
        net.activations.push_back(layer.at("activation") == "relu" ? Activation::Relu
                                                                   : Activation::Linear);
    }
    return net;
}

json residual_to_json(const GaussianResidualModel& m) {
    json j;
    j["mean"] = vector_to_json(m.mean);
    j["covariance"] = matrix_to_json(m.covariance);
    j["rho"] = m.rho;
    j["percentile"] = m.percentile;
    return j;
}

GaussianResidualModel residual_from_json(const json& j) {
    GaussianResidualModel m;
    m.mean = vector_from_json(j.at("mean"));
    m.covariance = matrix_from_json(j.at("covariance"));
    m.rho = j.at("rho");
    m.percentile = j.at("percentile");
    Eigen::LLT<Eigen::MatrixXd> llt(m.covariance);
    if (llt.info() != Eigen::Success) throw SchemaMismatch("stored covariance not PD");
    m.chol_lower = llt.matrixL();
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < m.covariance.rows(); ++i)
        log_det_half += std::log(m.chol_lower(i, i));
    m.log_norm_const = -0.5 * static_cast<double>(m.covariance.rows()) *
                           std::log(2.0 * std::numbers::pi) -
                       log_det_half;
    return m;
}

} // namespace

nlohmann::json group_model_to_json(const GroupModel& model) {
    json j;
    j["schema_version"] = 1;
    j["kind"] = detector_kind_name(model.kind);
    j["group"] = group_name(model.group);
    j["channels"] = model.channels;
    j["seed"] = model.seed;
    j["window_len"] = model.window_len;
    j["scaler"] = {{"means", model.scaler.means}, {"std_devs", model.scaler.std_devs}};

    json payload;
    switch (model.kind) {
    case DetectorKind::Ocsvm:
        payload["support_vectors"] = matrix_to_json(model.ocsvm->support_vectors);
        payload["dual_coeffs"] = vector_to_json(model.ocsvm->dual_coeffs);
        payload["rho"] = model.ocsvm->rho;
        payload["gamma"] = model.ocsvm->gamma;
        payload["nu"] = model.ocsvm->nu;
        break;
    case DetectorKind::IsoForest: {
        payload["subsample_size"] = model.iforest->subsample_size;
        payload["max_depth"] = model.iforest->max_depth;
        payload["contamination"] = model.iforest->contamination;
        payload["seed"] = model.iforest->seed;
        json trees = json::array();
        for (const auto& tree : model.iforest->trees) {
            json nodes = json::array();
            for (const auto& nd : tree.nodes)
                nodes.push_back({nd.feature, nd.split, nd.left, nd.right, nd.size});
            trees.push_back(std::move(nodes));
        }
        payload["trees"] = std::move(trees);
        break;
    }
    case DetectorKind::CorruptRf: {
        payload["seed"] = model.rf->seed;
        json trees = json::array();
        for (const auto& tree : model.rf->trees) {
            json nodes = json::array();
            for (const auto& nd : tree.nodes)
                nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.prob1});
            trees.push_back(std::move(nodes));
        }
        payload["trees"] = std::move(trees);
        break;
    }
    case DetectorKind::PcaHull:
        payload["components"] = matrix_to_json(model.pca->components);
        payload["explained_variance"] = vector_to_json(model.pca->explained_variance);
        payload["n_components"] = model.pca->n_components;
        payload["vertices"] = matrix_to_json(model.hull->vertices);
        payload["tolerance"] = model.hull->tolerance;
        payload["degenerate"] = model.hull->degenerate;
        if (model.hull->degenerate) {
            payload["box_min"] = vector_to_json(model.hull->box_min);
            payload["box_max"] = vector_to_json(model.hull->box_max);
        }
        break;
    case DetectorKind::InversePca:
        payload["components"] = matrix_to_json(model.pca->components);
        payload["explained_variance"] = vector_to_json(model.pca->explained_variance);
        payload["n_components"] = model.pca->n_components;
        break;
    case DetectorKind::Nn:
        payload["net"] = net_to_json(model.mlp->net);
        payload["residual"] = residual_to_json(*model.residual);
        break;
    case DetectorKind::Dae:
        payload["net"] = net_to_json(model.dae->net);
        payload["noise_std"] = model.dae->noise_std;
        payload["residual"] = residual_to_json(*model.residual);
        break;
    }
    j["model"] = std::move(payload);
    return j;
}

GroupModel group_model_from_json(const nlohmann::json& j) {
    if (!j.contains("schema_version") || j.at("schema_version") != 1)
        throw SchemaMismatch("unsupported model schema version");
    GroupModel model;
    const auto kind = detector_kind_from_name(j.at("kind"));
    if (!kind) throw SchemaMismatch("unknown detector kind in model file");
    model.kind = *kind;
    const std::string group = j.at("group");
    model.group = group == "m1" ? GroupKind::Pv : group == "m2" ? GroupKind::Load : GroupKind::Node;
    model.channels = j.at("channels").get<std::vector<std::string>>();
    model.seed = j.at("seed");
    model.window_len = j.at("window_len");
    model.scaler.means = j.at("scaler").at("means").get<std::vector<double>>();
    model.scaler.std_devs = j.at("scaler").at("std_devs").get<std::vector<double>>();

    const json& payload = j.at("model");
    switch (model.kind) {
    case DetectorKind::Ocsvm: {
        OcsvmModel m;
        m.support_vectors = matrix_from_json(payload.at("support_vectors"));
        m.dual_coeffs = vector_from_json(payload.at("dual_coeffs"));
        m.rho = payload.at("rho");
        m.gamma = payload.at("gamma");
        m.nu = payload.at("nu");
        model.ocsvm = std::move(m);
        break;
    }
    case DetectorKind::IsoForest: {
        IsolationForestModel m;
        m.subsample_size = payload.at("subsample_size");
        m.max_depth = payload.at("max_depth");
        m.contamination = payload.at("contamination");
        m.seed = payload.at("seed");
        for (const auto& tree_json : payload.at("trees")) {
            IsoTree tree;
            for (const auto& nd : tree_json)
                tree.nodes.push_back({nd.at(0), nd.at(1), nd.at(2), nd.at(3), nd.at(4)});
            m.trees.push_back(std::move(tree));
        }
        model.iforest = std::move(m);
        break;
    }
    case DetectorKind::CorruptRf: {
        CorruptRfModel m;
        m.seed = payload.at("seed");
        for (const auto& tree_json : payload.at("trees")) {
            DecisionTree tree;
            for (const auto& nd : tree_json)
                tree.nodes.push_back({nd.at(0), nd.at(1), nd.at(2), nd.at(3), nd.at(4)});
            m.trees.push_back(std::move(tree));
        }
        model.rf = std::move(m);
        break;
    }
    case DetectorKind::PcaHull: {
        PcaModel pca;
        pca.components = matrix_from_json(payload.at("components"));
        pca.explained_variance = vector_from_json(payload.at("explained_variance"));
        pca.n_components = payload.at("n_components");
        model.pca = std::move(pca);
        HullModel hull;
        hull.vertices = matrix_from_json(payload.at("vertices"));
        hull.dimension = static_cast<int>(hull.vertices.cols());
        hull.tolerance = payload.at("tolerance");
        hull.degenerate = payload.at("degenerate");
        if (hull.degenerate) {
            hull.box_min = vector_from_json(payload.at("box_min"));
            hull.box_max = vector_from_json(payload.at("box_max"));
        }
        model.hull = std::move(hull);
        break;
    }
    case DetectorKind::InversePca: {
        PcaModel pca;
        pca.components = matrix_from_json(payload.at("components"));
        pca.explained_variance = vector_from_json(payload.at("explained_variance"));
        pca.n_components = payload.at("n_components");
        model.pca = std::move(pca);
        break;
    }
    case DetectorKind::Nn: {
        MlpEstimator est;
        est.net = net_from_json(payload.at("net"));
        est.window_len = model.window_len;
        est.n_channels = est.net.output_size();
        model.mlp = std::move(est);
        model.residual = residual_from_json(payload.at("residual"));
        break;
    }
    case DetectorKind::Dae: {
        DaeModel dae;
        dae.net = net_from_json(payload.at("net"));
        dae.noise_std = payload.at("noise_std");
        model.dae = std::move(dae);
        model.residual = residual_from_json(payload.at("residual"));
        break;
    }
    }
    return model;
}

TimingRow time_detector(DetectorKind kind, const Eigen::MatrixXd& train_raw,
                        const Eigen::MatrixXd& test_raw, const DetectorConfig& config,
                        int repetitions) {
    using clock = std::chrono::steady_clock;
    const ChannelGroup group{GroupKind::Pv, std::vector<std::string>(
                                                static_cast<std::size_t>(train_raw.cols()), "")};
    std::vector<double> train_us, test_us;
    for (int rep = 0; rep < std::max(3, repetitions); ++rep) {
        const auto t0 = clock::now();
        GroupModel model = fit_group_model(kind, group, train_raw, config,
                                           /*compute_train_scores=*/false);
        const auto t1 = clock::now();
        const auto t2 = clock::now();
        ScoredSeries series = model.score(test_raw);
        const auto t3 = clock::now();
        double sink = 0.0;
        for (double v : series.values) sink += v;
        if (!std::isfinite(sink) && series.values.empty()) throw Error("unreachable");
        const double fit_us =
            std::chrono::duration<double, std::micro>(t1 - t0).count();
        const double score_us =
            std::chrono::duration<double, std::micro>(t3 - t2).count();
        train_us.push_back(fit_us / static_cast<double>(train_raw.rows()));
        test_us.push_back(score_us / static_cast<double>(series.values.size()));
    }
    TimingRow row;
    row.detector = detector_kind_name(kind);
    row.train_us_per_sample = median(train_us);
    row.test_us_per_sample = median(test_us);
    return row;
}

} // namespace pvwatch
