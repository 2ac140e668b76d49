#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvwatch/errors.hpp"

namespace pvwatch {

// Uniformly sampled multichannel measurements. Channels are stored
// column-wise (one vector per channel); all channels share the same length.
// Timestamps are integer seconds since scenario start so that emitted files
// are bit-reproducible.
struct TimeSeriesFrame {
    std::int64_t start_time = 0; // seconds
    std::int64_t step = 60;      // seconds, > 0
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channels;

    std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
    std::int64_t time_at(std::size_t i) const {
        return start_time + step * static_cast<std::int64_t>(i);
    }

    bool has_channel(const std::string& name) const;
    const std::vector<double>& channel(const std::string& name) const; // throws MissingChannel
    std::vector<double>& channel(const std::string& name);

    // Checks: step > 0, unique names, equal lengths, all values finite.
    void validate() const;
};

enum class GroupKind { Pv, Load, Node };

struct ChannelGroup {
    GroupKind kind;
    std::vector<std::string> channel_names;
};

// Canonical channel groupings: the PV group drives the m1 model, the load
// group m2 and the node group m3.
ChannelGroup pv_group();
ChannelGroup load_group();
ChannelGroup node_group();

std::string group_name(GroupKind kind);

// Extracts the group's channels from a frame as a (timesteps x channels)
// matrix, in group order.
Eigen::MatrixXd group_matrix(const TimeSeriesFrame& frame, const ChannelGroup& group);

// Per-channel zero-mean/unit-variance scaling fitted on normal data only.
// Sample (n-1) standard deviation; a std below the floor is replaced by the
// floor so constant channels standardize to zero instead of blowing up.
struct Standardizer {
    static constexpr double kStdFloor = 1e-8;

    std::vector<double> means;
    std::vector<double> std_devs;

    Eigen::MatrixXd transform(const Eigen::MatrixXd& raw) const;
    Eigen::MatrixXd inverse(const Eigen::MatrixXd& standardized) const;
    Eigen::VectorXd transform_row(const Eigen::VectorXd& raw) const;
};

Standardizer fit_standardizer(const Eigen::MatrixXd& data); // throws EmptyFrame if rows < 2
Standardizer fit_standardizer(const TimeSeriesFrame& frame);

struct WindowSpec {
    std::size_t window_len = 15;
    std::size_t stride = 1;
};

// One sliding window plus the index of the timestep it estimates (the step
// immediately after the window).
struct Window {
    Eigen::MatrixXd values; // window_len x channels
    std::size_t target_index;
};

// Window i covers rows [i*stride, i*stride + window_len); windows whose
// target falls outside the data are dropped.
std::vector<Window> make_windows(const Eigen::MatrixXd& data, const WindowSpec& spec);
std::vector<Window> make_windows(const TimeSeriesFrame& frame, const WindowSpec& spec);

std::size_t window_count(std::size_t length, const WindowSpec& spec);

// Flattens windows row-major (time-major) into a sample matrix together with
// the matching target rows, ready for estimator training.
struct WindowBatch {
    Eigen::MatrixXd inputs;  // n_windows x (window_len * channels)
    Eigen::MatrixXd targets; // n_windows x channels
    std::vector<std::size_t> target_indices;
};
WindowBatch window_batch(const Eigen::MatrixXd& data, const WindowSpec& spec);

struct IngestOptions {
    bool impute_missing = false; // previous-value imputation for ""/NaN cells
};

// CSV with a leading `timestamp` column (integer seconds or ISO-8601) and one
// column per schema channel. Rows are sorted by time; the step is inferred
// and must be uniform.
TimeSeriesFrame ingest_csv(const std::filesystem::path& path,
                           const std::vector<ChannelGroup>& schema,
                           const IngestOptions& options = {});

void emit_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path);

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

} // namespace pvwatch
