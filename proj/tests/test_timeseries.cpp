#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "pvwatch/timeseries.hpp"

using namespace pvwatch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "pvwatch_ts_test";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Brute-force window enumeration used as the oracle for the count formula:
// a window [start, start+wl) is valid iff its target start+wl is a real index.
std::size_t brute_force_window_count(std::size_t len, const WindowSpec& spec) {
    std::size_t count = 0;
    for (std::size_t start = 0; start + spec.window_len + 1 <= len; start += spec.stride)
        ++count;
    return count;
}

} // namespace

TEST_CASE("ingest: 3-row csv with uniform spacing") {
    const auto dir = temp_dir();
    const auto path = dir / "basic.csv";
    write_file(path, "timestamp,pv_active_power\n0,1.5\n60,2.5\n120,3.5\n");
    ChannelGroup group{GroupKind::Pv, {"pv_active_power"}};
    const auto frame = ingest_csv(path, {group});
    CHECK(frame.length() == 3);
    CHECK(frame.step == 60);
    CHECK(frame.channel("pv_active_power")[2] == 3.5);
}

TEST_CASE("ingest: 120 s gap raises NonUniformSampling") {
    const auto dir = temp_dir();
    const auto path = dir / "gap.csv";
    write_file(path, "timestamp,pv_active_power\n0,1\n60,2\n180,3\n");
    ChannelGroup group{GroupKind::Pv, {"pv_active_power"}};
    CHECK_THROWS_AS(ingest_csv(path, {group}), NonUniformSampling);
}

TEST_CASE("ingest: NaN cell raises NonFiniteValue, impute recovers") {
    const auto dir = temp_dir();
    const auto path = dir / "nan.csv";
    write_file(path,
               "timestamp,pv_voltage\n0,240\n60,241\n120,242\n180,243\n240,NaN\n300,245\n");
    ChannelGroup group{GroupKind::Pv, {"pv_voltage"}};
    CHECK_THROWS_AS(ingest_csv(path, {group}), NonFiniteValue);
    IngestOptions impute;
    impute.impute_missing = true;
    const auto frame = ingest_csv(path, {group}, impute);
    CHECK(frame.channel("pv_voltage")[4] == 243.0); // previous value
}

TEST_CASE("ingest: missing schema channel") {
    const auto dir = temp_dir();
    const auto path = dir / "missing.csv";
    write_file(path, "timestamp,other\n0,1\n");
    ChannelGroup group{GroupKind::Pv, {"pv_active_power"}};
    CHECK_THROWS_AS(ingest_csv(path, {group}), MissingChannel);
}

TEST_CASE("ingest: ISO-8601 timestamps") {
    const auto dir = temp_dir();
    const auto path = dir / "iso.csv";
    write_file(path, "timestamp,x\n2024-01-01T00:00:00,1\n2024-01-01T00:01:00,2\n");
    ChannelGroup group{GroupKind::Pv, {"x"}};
    const auto frame = ingest_csv(path, {group});
    CHECK(frame.step == 60);
    CHECK(frame.length() == 2);
}

TEST_CASE("round trip: emit then ingest reproduces values bit-exactly") {
    const auto dir = temp_dir();
    TimeSeriesFrame frame;
    frame.start_time = 0;
    frame.step = 60;
    frame.channel_names = {"a", "b"};
    frame.channels = {{0.1, 1.0 / 3.0, -2.5e-7, 42.0}, {1e300, -0.0, 3.14159, 7.0}};
    const auto path = dir / "round.csv";
    emit_csv(frame, path);
    const auto back = ingest_csv(path, {{GroupKind::Pv, {"a", "b"}}});
    REQUIRE(back.length() == 4);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t t = 0; t < 4; ++t) CHECK(back.channels[c][t] == frame.channels[c][t]);

    // And a second emit is byte-identical.
    const auto path2 = dir / "round2.csv";
    emit_csv(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("standardizer: hand-computed two-point channel") {
    Eigen::MatrixXd data(2, 1);
    data << 1.0, 3.0;
    const auto s = fit_standardizer(data);
    CHECK(s.means[0] == doctest::Approx(2.0));
    CHECK(s.std_devs[0] == doctest::Approx(std::sqrt(2.0))); // n-1 denominator
    const auto z = s.transform(data);
    CHECK(z(0, 0) == doctest::Approx(-0.7071067811865475));
    CHECK(z(1, 0) == doctest::Approx(+0.7071067811865475));
}

TEST_CASE("standardizer: constant channel floors at 1e-8 and maps to zero") {
    Eigen::MatrixXd data(3, 1);
    data << 5.0, 5.0, 5.0;
    const auto s = fit_standardizer(data);
    CHECK(s.std_devs[0] == Standardizer::kStdFloor);
    const auto z = s.transform(data);
    for (int i = 0; i < 3; ++i) CHECK(z(i, 0) == 0.0);
}

TEST_CASE("standardizer: own fit data gives mean 0 / std 1, inverse is identity") {
    Eigen::MatrixXd data(50, 3);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(3.0, 2.5);
    for (Eigen::Index r = 0; r < data.rows(); ++r)
        for (Eigen::Index c = 0; c < data.cols(); ++c) data(r, c) = n(rng);
    const auto s = fit_standardizer(data);
    const auto z = s.transform(data);
    for (Eigen::Index c = 0; c < 3; ++c) {
        CHECK(std::abs(z.col(c).mean()) < 1e-9);
        const double sd = std::sqrt(
            (z.col(c).array() - z.col(c).mean()).square().sum() / (data.rows() - 1.0));
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
    }
    const auto back = s.inverse(z);
    CHECK((back - data).cwiseAbs().maxCoeff() < 1e-9);

    // Idempotence: standardizing already standardized data is a no-op fit.
    const auto s2 = fit_standardizer(z);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(s2.means[c]) < 1e-9);
        CHECK(s2.std_devs[c] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("standardizer rejects single row") {
    Eigen::MatrixXd data(1, 2);
    data << 1.0, 2.0;
    CHECK_THROWS_AS(fit_standardizer(data), EmptyFrame);
}

TEST_CASE("windows: spec examples") {
    WindowSpec spec;
    spec.window_len = 15;
    spec.stride = 1;
    Eigen::MatrixXd data20 = Eigen::MatrixXd::Random(20, 2);
    auto w = make_windows(data20, spec);
    REQUIRE(w.size() == 5);
    CHECK(w.front().target_index == 15);
    CHECK(w.back().target_index == 19);

    Eigen::MatrixXd data15 = Eigen::MatrixXd::Random(15, 2);
    CHECK(make_windows(data15, spec).empty());

    spec.stride = 2;
    Eigen::MatrixXd data17 = Eigen::MatrixXd::Random(17, 2);
    auto w2 = make_windows(data17, spec);
    REQUIRE(w2.size() == 1);
    CHECK(w2[0].target_index == 15);
}

TEST_CASE("windows: count formula matches brute-force enumeration") {
    for (std::size_t len = 1; len <= 50; ++len) {
        for (std::size_t wl = 1; wl <= 20; ++wl) {
            for (std::size_t stride = 1; stride <= 5; ++stride) {
                WindowSpec spec{wl, stride};
                CHECK(window_count(len, spec) == brute_force_window_count(len, spec));
            }
        }
    }
}

TEST_CASE("windows: window contents and too-short frame") {
    Eigen::MatrixXd data(6, 1);
    data << 0, 1, 2, 3, 4, 5;
    WindowSpec spec{3, 1};
    const auto w = make_windows(data, spec);
    REQUIRE(w.size() == 3);
    CHECK(w[1].values(0, 0) == 1.0);
    CHECK(w[1].values(2, 0) == 3.0);
    CHECK(w[1].target_index == 4);

    Eigen::MatrixXd tiny(2, 1);
    tiny << 1, 2;
    CHECK_THROWS_AS(make_windows(tiny, WindowSpec{3, 1}), FrameTooShort);
}

TEST_CASE("window batch flattens time-major with matching targets") {
    Eigen::MatrixXd data(5, 2);
    data << 0, 10, 1, 11, 2, 12, 3, 13, 4, 14;
    const auto batch = window_batch(data, WindowSpec{2, 1});
    REQUIRE(batch.inputs.rows() == 3); // targets 2, 3, 4
    CHECK(batch.inputs(0, 0) == 0.0);
    CHECK(batch.inputs(0, 1) == 10.0);
    CHECK(batch.inputs(0, 2) == 1.0);
    CHECK(batch.inputs(0, 3) == 11.0);
    CHECK(batch.targets(0, 0) == 2.0);
    CHECK(batch.targets(0, 1) == 12.0);
    CHECK(batch.target_indices[1] == 3);
}

TEST_CASE("frame validation catches duplicates and non-finite values") {
    TimeSeriesFrame frame;
    frame.step = 60;
    frame.channel_names = {"a", "a"};
    frame.channels = {{1.0}, {2.0}};
    CHECK_THROWS_AS(frame.validate(), DataError);

    frame.channel_names = {"a", "b"};
    frame.channels = {{1.0}, {std::numeric_limits<double>::quiet_NaN()}};
    CHECK_THROWS_AS(frame.validate(), NonFiniteValue);
}
