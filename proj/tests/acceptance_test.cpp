// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Returns the number of
// failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaussian_pdf_oracle.hpp"
#include "gradient_check_oracle.hpp"
#include "iforest_oracle.hpp"
#include "pvwatch/attack.hpp"
#include "pvwatch/detector.hpp"
#include "pvwatch/pipeline.hpp"
#include "qp_hull_oracle.hpp"

namespace fs = std::filesystem;
using namespace pvwatch;

namespace {

struct CriterionResult {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED: " + what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

Scenario default_scenario() {
    Scenario sc; // spec defaults: 20 houses, 50% PV, 8 days, 1-min step
    sc.seed = 42;
    sc.seed_set = true;
    return sc;
}

struct ReportRow {
    double precision = 0, recall = 0, f1 = 0, accuracy = 0;
};

std::map<std::string, ReportRow> parse_report(const fs::path& path) {
    std::ifstream in(path);
    std::map<std::string, ReportRow> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string name, field;
        std::getline(ss, name, ',');
        ReportRow row;
        std::getline(ss, field, ',');
        row.precision = std::stod(field);
        std::getline(ss, field, ',');
        row.recall = std::stod(field);
        std::getline(ss, field, ',');
        row.f1 = std::stod(field);
        std::getline(ss, field, ',');
        row.accuracy = std::stod(field);
        rows[name] = row;
    }
    return rows;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

CriterionResult criterion_1_metric_identity() {
    CriterionResult r;
    ConfusionCounts c;
    c.tp = 3912720;  // tp/(tp+fp) = 0.9590, tp/(tp+fn) = 0.5712 exactly
    c.fp = 167280;
    c.fn = 2937280;
    c.tn = 1000000;
    const MetricsRow row = precision_recall_f1(c);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "Pr=%.4f Re=%.4f F1=%.4f%%", row.precision, row.recall,
                  row.f1 * 100.0);
    r.note(buf);
    r.require(std::abs(row.precision - 0.9590) < 1e-12, "precision mismatch");
    r.require(std::abs(row.recall - 0.5712) < 1e-12, "recall mismatch");
    r.require(std::abs(row.f1 * 100.0 - 71.60) < 0.05, "F1 not within 0.05 pp of 71.60");
    return r;
}

CriterionResult criterion_2_gaussian_oracle() {
    CriterionResult r;
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> dim(1, 3);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = dim(rng);
        Eigen::VectorXd mu(k);
        for (auto& v : mu.reshaped()) v = g(rng);
        Eigen::MatrixXd a(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j) a(i, j) = g(rng);
        const Eigen::MatrixXd sigma = a * a.transpose() + 0.3 * Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd x(k);
        for (Eigen::Index i = 0; i < k; ++i) x[i] = mu[i] + g(rng);

        GaussianResidualModel m;
        m.mean = mu;
        m.covariance = sigma;
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success) continue;
        m.chol_lower = llt.matrixL();
        double log_det_half = 0.0;
        for (int i = 0; i < k; ++i) log_det_half += std::log(m.chol_lower(i, i));
        m.log_norm_const =
            -0.5 * k * std::log(2.0 * std::numbers::pi) - log_det_half;

        const double expected = pvwatch_test::closed_form_pdf(mu, sigma, x);
        const double got = m.pdf(x);
        worst = std::max(worst, std::abs(got - expected) / std::abs(expected));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "worst relative error %.3e", worst);
    r.note(buf);
    r.require(worst < 1e-10, "pdf disagrees with the closed form beyond 1e-10");
    return r;
}

CriterionResult criterion_3_nu_property() {
    CriterionResult r;
    const double nu = 0.1;
    const int n = 50;
    const double kkt_tol = 1e-8;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        Eigen::MatrixXd X(n, 2);
        for (int i = 0; i < n; ++i) X.row(i) << g(rng), g(rng);
        const OcsvmModel model = ocsvm_fit(X, nu, 0.5, kkt_tol);
        int outliers = 0;
        for (int i = 0; i < n; ++i)
            if (model.decision(X.row(i).transpose()) < -100.0 * kkt_tol) ++outliers;
        const double outlier_fraction = static_cast<double>(outliers) / n;
        const double sv_fraction =
            static_cast<double>(model.support_vectors.rows()) / static_cast<double>(n);
        r.require(outlier_fraction <= nu + 1.0 / n,
                  "outlier fraction " + std::to_string(outlier_fraction) + " exceeds nu + 1/n (seed " +
                      std::to_string(seed) + ")");
        r.require(sv_fraction >= nu - 1.0 / n,
                  "SV fraction " + std::to_string(sv_fraction) + " below nu - 1/n (seed " +
                      std::to_string(seed) + ")");
    }
    r.note("10 seeded trials, n=50, nu=0.1");
    return r;
}

CriterionResult criterion_4_hull_oracle() {
    CriterionResult r;
    std::mt19937_64 rng(777);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd X(200, 5);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index c = 0; c < 5; ++c) X(i, c) = g(rng);
    const HullModel model = hull_fit(X);

    double worst_margin_gap = 0.0;
    int mismatches = 0, inside_seen = 0, outside_seen = 0;
    for (int probe = 0; probe < 100; ++probe) {
        Eigen::VectorXd p(5);
        if (probe % 2 == 0) {
            p.setZero();
            double total = 0.0;
            for (int k = 0; k < 6; ++k) {
                const double w = 0.05 + unit(rng);
                p += w * X.row(static_cast<Eigen::Index>(unit(rng) * X.rows())).transpose();
                total += w;
            }
            p /= total;
        } else {
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
        const HullQuery q = hull_contains(model, p);
        const double oracle = pvwatch_test::qp_hull_distance(model.vertices, p);
        const bool oracle_inside = oracle <= 1e-7;
        if (q.inside != oracle_inside) ++mismatches;
        worst_margin_gap =
            std::max(worst_margin_gap, std::abs(q.margin - (oracle_inside ? 0.0 : oracle)));
        (q.inside ? inside_seen : outside_seen)++;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d inside / %d outside, worst margin gap %.3e",
                  inside_seen, outside_seen, worst_margin_gap);
    r.note(buf);
    r.require(mismatches == 0, std::to_string(mismatches) + " verdict mismatches");
    r.require(worst_margin_gap < 1e-6, "margins disagree beyond 1e-6");
    return r;
}

CriterionResult criterion_5_gradient_checks() {
    CriterionResult r;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    {
        DenseNet net = make_net(3, {3}, 2, 17);
        Eigen::MatrixXd X(8, 3), Y(8, 2);
        for (Eigen::Index i = 0; i < 8; ++i) {
            for (Eigen::Index c = 0; c < 3; ++c) X(i, c) = g(rng);
            for (Eigen::Index c = 0; c < 2; ++c) Y(i, c) = g(rng);
        }
        const double err = pvwatch_test::max_relative_gradient_error(net, X, Y);
        r.note("mlp worst rel err " + std::to_string(err));
        r.require(err < 1e-5, "mlp gradients disagree with finite differences");
    }
    {
        DenseNet net = make_net(5, {4, 2, 4},
                                {Activation::Relu, Activation::Linear, Activation::Relu}, 5, 23);
        Eigen::MatrixXd X(8, 5);
        for (Eigen::Index i = 0; i < 8; ++i)
            for (Eigen::Index c = 0; c < 5; ++c) X(i, c) = g(rng);
        const double err = pvwatch_test::max_relative_gradient_error(net, X, X);
        r.note("dae worst rel err " + std::to_string(err));
        r.require(err < 1e-5, "dae gradients disagree with finite differences");
    }
    return r;
}

CriterionResult criterion_6_iforest_oracle() {
    CriterionResult r;
    Eigen::MatrixXd X(10, 1);
    X << 0.1, 0.2, 0.15, 0.3, 0.25, 0.18, 0.22, 0.28, 0.12, 50.0;
    const std::uint64_t seed = 77;
    const IsolationForestModel model = iforest_fit(X, 200, 256, 1e-8, seed);
    const auto oracle = pvwatch_test::brute_forest_scores(X, 200, 256, seed);
    int exact = 0;
    double outlier_score = 0.0, min_inlier = 1e300;
    for (int i = 0; i < 10; ++i) {
        const double mine = model.score(X.row(i).transpose());
        if (mine == oracle[static_cast<std::size_t>(i)]) ++exact;
        if (i == 9) outlier_score = mine;
        else min_inlier = std::min(min_inlier, mine);
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "outlier %.4f vs min inlier %.4f", outlier_score,
                  min_inlier);
    r.note(buf);
    r.require(exact == 10, "per-point path lengths differ from the brute-force oracle");
    r.require(outlier_score < min_inlier, "outlier is not strictly minimal");
    return r;
}

CriterionResult criterion_7_directionality(const SimOutput& normal) {
    CriterionResult r;
    const auto intervals = default_attack_intervals(normal.scenario, normal.scenario.days - 1);

    auto attacked_steps = [&]() {
        std::vector<std::size_t> steps;
        for (const auto& [s, e] : intervals)
            for (std::size_t t = s; t < e; ++t) steps.push_back(t);
        return steps;
    }();

    auto run_kind = [&](AttackKind kind) {
        AttackSpec spec;
        spec.kind = kind;
        spec.penetration = 1.0;
        spec.intervals = intervals;
        return apply_attacks(normal, {spec}, 42);
    };

    {
        const auto disc = run_kind(AttackKind::Disconnect);
        bool all_lower = true;
        for (std::size_t t : attacked_steps)
            if (!(disc.data.node.channels[0][t] < normal.node.channels[0][t])) all_lower = false;
        r.require(all_lower, "disconnect does not lower node magnitude at every attacked step");
    }
    {
        const auto curt = run_kind(AttackKind::Curtailment);
        bool all_lower = true;
        for (std::size_t t : attacked_steps)
            if (!(curt.data.node.channels[0][t] < normal.node.channels[0][t])) all_lower = false;
        r.require(all_lower, "curtailment does not lower node magnitude at every attacked step");
    }
    {
        const auto rev = run_kind(AttackKind::ReversePowerFlow);
        bool mag_up = true, ang_up = true;
        for (std::size_t t : attacked_steps) {
            if (!(rev.data.node.channels[0][t] > normal.node.channels[0][t])) mag_up = false;
            if (!(rev.data.node.channels[1][t] > normal.node.channels[1][t])) ang_up = false;
        }
        r.require(mag_up, "reverse power flow does not raise magnitude at every attacked step");
        r.require(ang_up, "reverse power flow does not raise angle at every attacked step");
    }
    r.note("default 20-house scenario, day-8 schedule, 240 attacked steps per run");
    return r;
}

CriterionResult criterion_8_penetration_trend(const SimOutput& normal) {
    CriterionResult r;
    const auto intervals = default_attack_intervals(normal.scenario, normal.scenario.days - 1);
    std::vector<double> mean_deltas;
    for (double penetration : {0.25, 0.5, 0.75, 1.0}) {
        AttackSpec spec;
        spec.kind = AttackKind::Disconnect;
        spec.penetration = penetration;
        spec.intervals = intervals;
        const auto result = apply_attacks(normal, {spec}, 42);
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& [s, e] : intervals) {
            for (std::size_t t = s; t < e; ++t) {
                sum += std::abs(result.data.node.channels[0][t] - normal.node.channels[0][t]);
                ++count;
            }
        }
        mean_deltas.push_back(sum / static_cast<double>(count));
    }
    std::ostringstream os;
    os << "mean |d mag| pu:";
    for (double d : mean_deltas) os << " " << d;
    r.note(os.str());
    for (std::size_t i = 1; i < mean_deltas.size(); ++i)
        r.require(mean_deltas[i] >= mean_deltas[i - 1],
                  "|delta magnitude| decreased from penetration level " + std::to_string(i));
    return r;
}

CriterionResult criterion_9_end_to_end(const fs::path& work) {
    CriterionResult r;
    const fs::path normal_dir = work / "normal";
    const fs::path attacked_dir = work / "attacked";
    const Scenario scenario = default_scenario();
    run_simulate(scenario, normal_dir);

    AttackRunConfig attack;
    attack.seed = 7;
    attack.seed_set = true;
    const std::size_t day = 7 * scenario.steps_per_day();
    auto add = [&](AttackKind kind, std::size_t start_min, std::size_t end_min) {
        AttackSpec spec;
        spec.kind = kind;
        spec.penetration = 1.0;
        spec.intervals = {{day + start_min, day + end_min}};
        attack.specs.push_back(spec);
    };
    add(AttackKind::Disconnect, 540, 600);       // 09:00 - 10:00
    add(AttackKind::Curtailment, 645, 705);      // 10:45 - 11:45
    add(AttackKind::VoltVar, 750, 810);          // 12:30 - 13:30
    add(AttackKind::ReversePowerFlow, 855, 915); // 14:15 - 15:15
    run_attack(normal_dir, attack, attacked_dir);

    std::map<std::string, std::map<std::string, ReportRow>> reports;
    for (DetectorKind kind : {DetectorKind::PcaHull, DetectorKind::CorruptRf,
                              DetectorKind::Ocsvm, DetectorKind::IsoForest}) {
        const std::string name = detector_kind_name(kind);
        TrainOptions options;
        options.kind = kind;
        options.config.seed = scenario.seed;
        options.train_steps = day;
        run_train(normal_dir, options, work / ("model_" + name));
        run_detect(work / ("model_" + name), attacked_dir, work / ("scores_" + name));
        run_evaluate(work / ("scores_" + name), attacked_dir, {}, work / ("report_" + name));
        reports[name] = parse_report(work / ("report_" + name) / "report.csv");
    }

    const double pca_disc_f1 = reports["pca-ch"]["disconnect"].f1;
    const double rf_disc_f1 = reports["corrupt-rf"]["disconnect"].f1;
    const double ocsvm_var_recall = reports["ocsvm"]["volt_var"].recall;
    const double pca_overall_f1 = reports["pca-ch"]["overall"].f1;
    const double iso_overall_f1 = reports["iforest"]["overall"].f1;

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "pca-ch disc F1 %.3f, corrupt-rf disc F1 %.3f, ocsvm VAR recall %.3f, "
                  "overall F1 pca-ch %.3f vs iforest %.3f",
                  pca_disc_f1, rf_disc_f1, ocsvm_var_recall, pca_overall_f1, iso_overall_f1);
    r.note(buf);
    r.require(pca_disc_f1 >= 0.70, "PCA-CH disconnect F1 below 0.70");
    r.require(rf_disc_f1 >= 0.70, "CorruptRF disconnect F1 below 0.70");
    r.require(std::abs(ocsvm_var_recall - 1.0) <= 0.05, "OCSVM VAR recall outside 1.00 +- 0.05");
    r.require(pca_overall_f1 > iso_overall_f1,
              "PCA-CH overall F1 does not exceed IsoForest overall F1");
    return r;
}

CriterionResult criterion_10_fusion_contracts() {
    CriterionResult r;
    std::mt19937_64 rng(55);
    std::normal_distribution<double> g(0.0, 3.0);
    bool min_ok = true, max_ok = true, linear_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a = {g(rng)}, b = {g(rng)}, c = {g(rng)};
        if (fuse_most_anomalous(a, b, c, Orientation::LowIsAnomalous)[0] !=
            std::min({a[0], b[0], c[0]}))
            min_ok = false;
        if (fuse_most_anomalous(a, b, c, Orientation::HighIsAnomalous)[0] !=
            std::max({a[0], b[0], c[0]}))
            max_ok = false;
        if (fuse_linear(a, b, c, 1.0, 0.0, 0.0)[0] != a[0]) linear_ok = false;
    }
    r.require(min_ok, "min fusion not exact");
    r.require(max_ok, "max fusion not exact");
    r.require(linear_ok, "linear (1,0,0) fusion not exactly m1");
    r.note("1000 random triples");
    return r;
}

CriterionResult criterion_11_determinism(const fs::path& work) {
    CriterionResult r;
    Scenario sc;
    sc.n_houses = 4;
    sc.pv_fraction = 1.0;
    sc.days = 3;
    sc.seed = 17;
    sc.seed_set = true;

    auto run_once = [&](const fs::path& dir) {
        run_simulate(sc, dir / "normal");
        AttackRunConfig attack;
        attack.seed = 3;
        attack.seed_set = true;
        AttackSpec spec;
        spec.kind = AttackKind::Disconnect;
        spec.penetration = 1.0;
        spec.intervals = default_attack_intervals(sc, 2);
        attack.specs = {spec};
        run_attack(dir / "normal", attack, dir / "attacked");
        TrainOptions options;
        options.kind = DetectorKind::PcaHull;
        options.config.seed = sc.seed;
        run_train(dir / "normal", options, dir / "model");
        run_detect(dir / "model", dir / "attacked", dir / "scores");
        run_evaluate(dir / "scores", dir / "attacked", {}, dir / "report");
        return read_bytes(dir / "report" / "report.csv");
    };

    const std::string first = run_once(work / "run_a");
    const std::string second = run_once(work / "run_b");
    r.require(!first.empty(), "first report is empty");
    r.require(first == second, "report.csv bytes differ between identical runs");
    r.note("pipeline executed twice, " + std::to_string(first.size()) + " report bytes");
    return r;
}

CriterionResult criterion_12_auc_sanity() {
    CriterionResult r;
    {
        std::vector<double> scores = {0.9, 0.8, 0.7, 0.3, 0.2, 0.1};
        std::vector<std::uint8_t> labels = {1, 1, 1, 0, 0, 0};
        r.require(roc_auc(scores, labels) == 1.0, "separated scores do not give exactly 1.0");
    }
    {
        std::mt19937_64 rng(1234);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const std::size_t n = 10000;
        std::vector<double> scores(n);
        std::vector<std::uint8_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = unit(rng);
            labels[i] = unit(rng) < 0.5 ? 1 : 0;
        }
        const double auc = roc_auc(scores, labels);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "random-score AUC %.4f", auc);
        r.note(buf);
        r.require(std::abs(auc - 0.5) < 0.02, "label-independent AUC outside 0.5 +- 0.02");
    }
    return r;
}

} // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "pvwatch_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    // criteria 7 and 8 share one simulation of the default scenario
    SimOutput shared_normal;

    struct Entry {
        std::string name;
        double budget_seconds;
        std::function<CriterionResult()> run;
    };
    const std::vector<Entry> criteria = {
        {"C1 metric identity (Table-style F1)", 1.0, criterion_1_metric_identity},
        {"C2 Gaussian pdf vs closed form", 5.0, criterion_2_gaussian_oracle},
        {"C3 OCSVM nu-property", 30.0, criterion_3_nu_property},
        {"C4 hull vs QP oracle", 60.0, criterion_4_hull_oracle},
        {"C5 gradient checks", 30.0, criterion_5_gradient_checks},
        {"C6 isolation-forest oracle", 10.0, criterion_6_iforest_oracle},
        {"C7 simulator directionality", 120.0,
         [&] {
             shared_normal = simulate(default_scenario());
             return criterion_7_directionality(shared_normal);
         }},
        {"C8 penetration trend", 180.0, [&] { return criterion_8_penetration_trend(shared_normal); }},
        {"C9 end-to-end detection", 600.0, [&] { return criterion_9_end_to_end(work / "e2e"); }},
        {"C10 fusion contracts", 1.0, criterion_10_fusion_contracts},
        {"C11 pipeline determinism", 600.0,
         [&] { return criterion_11_determinism(work / "determinism"); }},
        {"C12 AUC sanity", 5.0, criterion_12_auc_sanity},
    };

    int failures = 0;
    for (const auto& entry : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult result;
        try {
            result = entry.run();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (elapsed > entry.budget_seconds) {
            result.pass = false;
            result.detail += "; exceeded runtime budget of " +
                             std::to_string(entry.budget_seconds) + " s";
        }
        std::printf("[%s] %s (%.2f s)%s%s\n", result.pass ? "PASS" : "FAIL",
                    entry.name.c_str(), elapsed, result.detail.empty() ? "" : " -- ",
                    result.detail.c_str());
        std::fflush(stdout);
        if (!result.pass) ++failures;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
