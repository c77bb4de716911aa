#pragma once

#include <string>
#include <vector>

namespace limtest {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    bool highlight = false;
};

// One polyline per series, one point per sample.
std::string svg_line_chart(const std::string& title,
                           const std::vector<PlotSeries>& series);

std::string svg_scatter(const std::string& title,
                        const std::vector<ScatterPoint>& points,
                        const std::string& x_label, const std::string& y_label);

}  // namespace limtest
