#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace neg::cli {

struct ChartSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;  // non-finite values break the line
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartSeries> series;
    int width = 720;
    int height = 440;
};

// Self-contained static SVG document.
std::string render_svg(const LineChart& chart);
void write_svg(const LineChart& chart, const std::filesystem::path& path);

}  // namespace neg::cli
