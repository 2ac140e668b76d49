#include "pvwatch/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pvwatch {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kMarginLeft = 70.0, kMarginRight = 20.0;
constexpr double kMarginTop = 40.0, kMarginBottom = 60.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

} // namespace

std::string svg_line_chart(const std::vector<std::pair<double, double>>& points,
                           const std::string& title, const std::string& x_label,
                           const std::string& y_label) {
    std::ostringstream os;
    header(os, title);
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;

    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    for (const auto& [x, y] : points) {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    auto px = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) {
        return kHeight - kMarginBottom - (y - y_min) / (y_max - y_min) * plot_h;
    };

    os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
       << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : points) os << fmt(px(x)) << "," << fmt(py(y)) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       << "transform=\"rotate(-90 18 " << kHeight / 2 << ")\">" << y_label << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string svg_bar_chart(const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& series,
                          const std::vector<std::string>& series_names,
                          const std::string& title, const std::string& y_label) {
    std::ostringstream os;
    header(os, title);
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;

    double y_max = 0.0;
    for (const auto& s : series)
        for (double v : s) y_max = std::max(y_max, v);
    if (y_max <= 0.0) y_max = 1.0;

    const std::vector<std::string> colors = {"#1f77b4", "#ff7f0e", "#2ca02c"};
    const std::size_t groups = labels.size();
    const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(1, groups));
    const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(1, series.size()));

    os << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << plot_w
       << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t s = 0; s < series.size(); ++s) {
            const double v = g < series[s].size() ? series[s][g] : 0.0;
            const double h = v / y_max * plot_h;
            const double x = kMarginLeft + static_cast<double>(g) * group_w + group_w * 0.1 +
                             static_cast<double>(s) * bar_w;
            const double y = kHeight - kMarginBottom - h;
            os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(bar_w)
               << "\" height=\"" << fmt(h) << "\" fill=\"" << colors[s % colors.size()]
               << "\"/>\n";
        }
        os << "<text x=\"" << fmt(kMarginLeft + (static_cast<double>(g) + 0.5) * group_w)
           << "\" y=\"" << kHeight - kMarginBottom + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << labels[g] << "</text>\n";
    }
    for (std::size_t s = 0; s < series_names.size(); ++s) {
        const double lx = kMarginLeft + 10.0;
        const double ly = kMarginTop + 16.0 + 18.0 * static_cast<double>(s);
        os << "<rect x=\"" << lx << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\""
           << colors[s % colors.size()] << "\"/>\n";
        os << "<text x=\"" << lx + 18 << "\" y=\"" << ly
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << series_names[s]
           << "</text>\n";
    }
    os << "<text x=\"18\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       << "transform=\"rotate(-90 18 " << kHeight / 2 << ")\">" << y_label << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace pvwatch
