#include "neg/cli/svg_chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "neg/errors.hpp"

namespace neg::cli {

namespace {

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c",
                                              "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Roughly five ticks at 1/2/5 multiples of a power of ten.
std::vector<double> nice_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

}  // namespace

std::string render_svg(const LineChart& chart) {
    const double left = 80, right = 170, top = 40, bottom = 60;
    const double plot_w = chart.width - left - right;
    const double plot_h = chart.height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax - xmin <= 0) xmax = xmin + 1;
    if (ymax - ymin <= 0) {
        const double pad = std::max(std::abs(ymin) * 0.05, 1e-6);
        ymin -= pad;
        ymax += pad;
    } else {
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }

    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * plot_h; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\""
      << chart.height << "\" viewBox=\"0 0 " << chart.width << ' ' << chart.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << escape(chart.title) << "</text>\n";

    for (double t : nice_ticks(xmin, xmax)) {
        const double x = sx(t);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x)
          << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"#e6e6e6\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(top + plot_h + 18)
          << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(ymin, ymax)) {
        const double y = sy(t);
        o << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\""
          << num(left + plot_w) << "\" y2=\"" << num(y) << "\" stroke=\"#e6e6e6\"/>\n";
        o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(chart.height - 15)
      << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
    o << "<text transform=\"translate(20," << num(top + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = kPalette[k % kPalette.size()];
        std::string path;
        bool pen_down = false;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                pen_down = false;
                continue;
            }
            path += (pen_down ? " L" : " M") + num(sx(s.x[i])) + ' ' + num(sy(s.y[i]));
            pen_down = true;
        }
        o << "<path d=\"" << path.substr(path.empty() ? 0 : 1) << "\" fill=\"none\" stroke=\""
          << color << "\" stroke-width=\"2\"/>\n";
        const double ly = top + 10 + 20.0 * static_cast<double>(k);
        o << "<line x1=\"" << num(left + plot_w + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
          << num(left + plot_w + 36) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(left + plot_w + 42) << "\" y=\"" << num(ly + 4) << "\">"
          << escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_svg(const LineChart& chart, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << render_svg(chart);
}

}  // namespace neg::cli
