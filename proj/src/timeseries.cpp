#include "pvwatch/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace pvwatch {

bool TimeSeriesFrame::has_channel(const std::string& name) const {
    return std::find(channel_names.begin(), channel_names.end(), name) != channel_names.end();
}

const std::vector<double>& TimeSeriesFrame::channel(const std::string& name) const {
    for (std::size_t i = 0; i < channel_names.size(); ++i) {
        if (channel_names[i] == name) return channels[i];
    }
    throw MissingChannel("missing channel: " + name);
}

std::vector<double>& TimeSeriesFrame::channel(const std::string& name) {
    for (std::size_t i = 0; i < channel_names.size(); ++i) {
        if (channel_names[i] == name) return channels[i];
    }
    throw MissingChannel("missing channel: " + name);
}

void TimeSeriesFrame::validate() const {
    if (step <= 0) throw DataError("frame step must be positive");
    if (channel_names.size() != channels.size())
        throw DataError("channel name/value count mismatch");
    std::set<std::string> seen;
    for (const auto& n : channel_names) {
        if (!seen.insert(n).second) throw DataError("duplicate channel name: " + n);
    }
    const std::size_t len = length();
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (channels[c].size() != len)
            throw DataError("channel " + channel_names[c] + " has inconsistent length");
        for (std::size_t t = 0; t < channels[c].size(); ++t) {
            if (!std::isfinite(channels[c][t]))
                throw NonFiniteValue("non-finite value in channel " + channel_names[c] +
                                     " at row " + std::to_string(t));
        }
    }
}

ChannelGroup pv_group() {
    return {GroupKind::Pv,
            {"irradiance", "pv_active_power", "pv_reactive_power", "pv_voltage", "pv_current"}};
}

ChannelGroup load_group() {
    return {GroupKind::Load, {"net_active_power", "net_reactive_power"}};
}

ChannelGroup node_group() {
    return {GroupKind::Node, {"voltage_magnitude", "phase_angle"}};
}

std::string group_name(GroupKind kind) {
    switch (kind) {
    case GroupKind::Pv: return "m1";
    case GroupKind::Load: return "m2";
    case GroupKind::Node: return "m3";
    }
    return "?";
}

Eigen::MatrixXd group_matrix(const TimeSeriesFrame& frame, const ChannelGroup& group) {
    Eigen::MatrixXd out(frame.length(), group.channel_names.size());
    for (std::size_t c = 0; c < group.channel_names.size(); ++c) {
        const auto& values = frame.channel(group.channel_names[c]);
        for (std::size_t t = 0; t < values.size(); ++t)
            out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = values[t];
    }
    return out;
}

Standardizer fit_standardizer(const Eigen::MatrixXd& data) {
    if (data.rows() < 2) throw EmptyFrame("standardizer needs at least 2 rows");
    Standardizer s;
    const auto n = static_cast<double>(data.rows());
    s.means.resize(data.cols());
    s.std_devs.resize(data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const double mean = data.col(c).mean();
        const double var = (data.col(c).array() - mean).square().sum() / (n - 1.0);
        s.means[c] = mean;
        s.std_devs[c] = std::max(std::sqrt(var), Standardizer::kStdFloor);
    }
    return s;
}

Standardizer fit_standardizer(const TimeSeriesFrame& frame) {
    Eigen::MatrixXd data(frame.length(), frame.channels.size());
    for (std::size_t c = 0; c < frame.channels.size(); ++c)
        for (std::size_t t = 0; t < frame.channels[c].size(); ++t)
            data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = frame.channels[c][t];
    return fit_standardizer(data);
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& raw) const {
    if (static_cast<std::size_t>(raw.cols()) != means.size())
        throw DimensionMismatch("standardizer expects " + std::to_string(means.size()) +
                                " channels, got " + std::to_string(raw.cols()));
    Eigen::MatrixXd out = raw;
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        out.col(c) = (out.col(c).array() - means[c]) / std_devs[c];
    return out;
}

Eigen::MatrixXd Standardizer::inverse(const Eigen::MatrixXd& standardized) const {
    if (static_cast<std::size_t>(standardized.cols()) != means.size())
        throw DimensionMismatch("standardizer expects " + std::to_string(means.size()) +
                                " channels, got " + std::to_string(standardized.cols()));
    Eigen::MatrixXd out = standardized;
    for (Eigen::Index c = 0; c < out.cols(); ++c)
        out.col(c) = out.col(c).array() * std_devs[c] + means[c];
    return out;
}

Eigen::VectorXd Standardizer::transform_row(const Eigen::VectorXd& raw) const {
    if (static_cast<std::size_t>(raw.size()) != means.size())
        throw DimensionMismatch("standardizer row dimension mismatch");
    Eigen::VectorXd out(raw.size());
    for (Eigen::Index c = 0; c < raw.size(); ++c)
        out[c] = (raw[c] - means[c]) / std_devs[c];
    return out;
}

std::size_t window_count(std::size_t length, const WindowSpec& spec) {
    // max(0, floor((len - window_len - 1)/stride) + 1): the target of the
    // last window must still lie inside the data.
    if (length < spec.window_len + 1) return 0;
    return (length - spec.window_len - 1) / spec.stride + 1;
}

std::vector<Window> make_windows(const Eigen::MatrixXd& data, const WindowSpec& spec) {
    if (spec.window_len < 1 || spec.stride < 1)
        throw DataError("window_len and stride must be >= 1");
    if (static_cast<std::size_t>(data.rows()) < spec.window_len)
        throw FrameTooShort("frame shorter than window");
    std::vector<Window> out;
    const std::size_t n = window_count(static_cast<std::size_t>(data.rows()), spec);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t start = i * spec.stride;
        Window w;
        w.values = data.middleRows(static_cast<Eigen::Index>(start),
                                   static_cast<Eigen::Index>(spec.window_len));
        w.target_index = start + spec.window_len;
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<Window> make_windows(const TimeSeriesFrame& frame, const WindowSpec& spec) {
    Eigen::MatrixXd data(frame.length(), frame.channels.size());
    for (std::size_t c = 0; c < frame.channels.size(); ++c)
        for (std::size_t t = 0; t < frame.channels[c].size(); ++t)
            data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = frame.channels[c][t];
    return make_windows(data, spec);
}

WindowBatch window_batch(const Eigen::MatrixXd& data, const WindowSpec& spec) {
    const auto windows = make_windows(data, spec);
    WindowBatch batch;
    const Eigen::Index d = data.cols();
    const Eigen::Index wl = static_cast<Eigen::Index>(spec.window_len);
    batch.inputs.resize(static_cast<Eigen::Index>(windows.size()), wl * d);
    batch.targets.resize(static_cast<Eigen::Index>(windows.size()), d);
    batch.target_indices.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        for (Eigen::Index t = 0; t < wl; ++t)
            batch.inputs.block(static_cast<Eigen::Index>(i), t * d, 1, d) = w.values.row(t);
        batch.targets.row(static_cast<Eigen::Index>(i)) =
            data.row(static_cast<Eigen::Index>(w.target_index));
        batch.target_indices.push_back(w.target_index);
    }
    return batch;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_int64(const std::string& s, std::int64_t& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

// Minimal ISO-8601 reader ("YYYY-MM-DDThh:mm:ss", optional trailing Z),
// converted to seconds since the Unix epoch with civil-date arithmetic.
bool parse_iso8601(const std::string& s, std::int64_t& out) {
    int y, mo, d, h, mi, se;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
        return false;
    // days from civil (Howard Hinnant's algorithm)
    y -= mo <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const std::int64_t days = era * 146097 + static_cast<std::int64_t>(doe) - 719468;
    out = days * 86400 + h * 3600 + mi * 60 + se;
    return true;
}

bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NaN" || s == "nan" || s == "NAN";
}

} // namespace

TimeSeriesFrame ingest_csv(const std::filesystem::path& path,
                           const std::vector<ChannelGroup>& schema,
                           const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    std::string header_line;
    if (!std::getline(in, header_line)) throw DataError("empty file: " + path.string());
    const auto header = split_csv_line(header_line);

    auto column_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw MissingChannel("missing channel: " + name + " in " + path.string());
    };

    const std::size_t ts_col = column_of("timestamp");

    std::vector<std::string> wanted;
    for (const auto& g : schema)
        for (const auto& name : g.channel_names) wanted.push_back(name);

    std::vector<std::size_t> cols;
    cols.reserve(wanted.size());
    for (const auto& name : wanted) cols.push_back(column_of(name));

    struct Row {
        std::int64_t t;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < header.size())
            throw DataError("row " + std::to_string(lineno) + " has too few columns");
        Row row;
        if (!parse_int64(fields[ts_col], row.t) && !parse_iso8601(fields[ts_col], row.t))
            throw DataError("unparseable timestamp at row " + std::to_string(lineno));
        row.values.resize(cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::string& cell = fields[cols[c]];
            if (is_missing_token(cell)) {
                if (!options.impute_missing || rows.empty())
                    throw NonFiniteValue("missing value at row " + std::to_string(lineno) +
                                         ", channel " + wanted[c]);
                row.values[c] = rows.back().values[c];
                continue;
            }
            char* endp = nullptr;
            const double v = std::strtod(cell.c_str(), &endp);
            if (endp == cell.c_str() || *endp != '\0')
                throw DataError("unparseable value '" + cell + "' at row " +
                                std::to_string(lineno));
            if (!std::isfinite(v)) {
                if (!options.impute_missing || rows.empty())
                    throw NonFiniteValue("non-finite value at row " + std::to_string(lineno) +
                                         ", channel " + wanted[c]);
                row.values[c] = rows.back().values[c];
                continue;
            }
            row.values[c] = v;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyFrame("no data rows in " + path.string());

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });

    TimeSeriesFrame frame;
    frame.start_time = rows.front().t;
    frame.step = rows.size() >= 2 ? rows[1].t - rows[0].t : 60;
    if (frame.step <= 0) throw NonUniformSampling("non-increasing timestamps");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const std::int64_t gap = rows[i].t - rows[i - 1].t;
        if (gap != frame.step)
            throw NonUniformSampling("non-uniform sampling: gap of " + std::to_string(gap) +
                                     " s at row " + std::to_string(i + 1) + " (expected " +
                                     std::to_string(frame.step) + " s)");
    }

    frame.channel_names = wanted;
    frame.channels.assign(wanted.size(), std::vector<double>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < wanted.size(); ++c) frame.channels[c][r] = rows[r].values[c];

    frame.validate();
    return frame;
}

void emit_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "timestamp";
    for (const auto& name : frame.channel_names) out << ',' << name;
    out << '\n';
    const std::size_t len = frame.length();
    for (std::size_t t = 0; t < len; ++t) {
        out << frame.time_at(t);
        for (const auto& ch : frame.channels) out << ',' << format_double(ch[t]);
        out << '\n';
    }
}

} // namespace pvwatch
