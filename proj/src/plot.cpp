#include "limtest/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "limtest/format.hpp"

namespace limtest {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 460.0;
constexpr double kPad = 60.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double map(double v, double out_lo, double out_hi) const {
        return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
    }
};

void emit_frame(std::ostringstream& svg, const std::string& title,
                const Range& xr, const Range& yr) {
    svg << "<rect x='" << kPad << "' y='" << kPad << "' width='"
        << kWidth - 2 * kPad << "' height='" << kHeight - 2 * kPad
        << "' fill='none' stroke='#333'/>\n";
    svg << "<text x='" << kWidth / 2 << "' y='" << kPad / 2
        << "' text-anchor='middle' font-size='15'>" << title << "</text>\n";
    svg << "<text x='" << kPad << "' y='" << kHeight - kPad / 4
        << "' font-size='11'>" << fmt_double(xr.lo) << "</text>\n";
    svg << "<text x='" << kWidth - kPad << "' y='" << kHeight - kPad / 4
        << "' text-anchor='end' font-size='11'>" << fmt_double(xr.hi)
        << "</text>\n";
    svg << "<text x='" << kPad / 4 << "' y='" << kHeight - kPad
        << "' font-size='11'>" << fmt_double(yr.lo) << "</text>\n";
    svg << "<text x='" << kPad / 4 << "' y='" << kPad + 10 << "' font-size='11'>"
        << fmt_double(yr.hi) << "</text>\n";
}

}  // namespace

std::string svg_line_chart(const std::string& title,
                           const std::vector<PlotSeries>& series) {
    Range xr, yr;
    for (const auto& s : series) {
        for (double v : s.x) xr.include(v);
        for (double v : s.y) yr.include(v);
    }
    xr.pad();
    yr.pad();

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
        << "' height='" << kHeight << "'>\n";
    emit_frame(svg, title, xr, yr);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.2'"
            << " points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << fmt_double(xr.map(s.x[i], kPad, kWidth - kPad)) << ","
                << fmt_double(yr.map(s.y[i], kHeight - kPad, kPad)) << " ";
        }
        svg << "'/>\n";
        svg << "<text x='" << kWidth - kPad + 4 << "' y='"
            << kPad + 16.0 * static_cast<double>(si) << "' font-size='11' fill='"
            << color << "'>" << s.name << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string svg_scatter(const std::string& title,
                        const std::vector<ScatterPoint>& points,
                        const std::string& x_label, const std::string& y_label) {
    Range xr, yr;
    for (const auto& p : points) {
        xr.include(p.x);
        yr.include(p.y);
    }
    xr.pad();
    yr.pad();

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
        << "' height='" << kHeight << "'>\n";
    emit_frame(svg, title, xr, yr);
    svg << "<text x='" << kWidth / 2 << "' y='" << kHeight - 6
        << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    svg << "<text x='14' y='" << kHeight / 2
        << "' font-size='12' transform='rotate(-90 14 " << kHeight / 2 << ")'>"
        << y_label << "</text>\n";
    for (const auto& p : points) {
        svg << "<circle cx='" << fmt_double(xr.map(p.x, kPad, kWidth - kPad))
            << "' cy='" << fmt_double(yr.map(p.y, kHeight - kPad, kPad))
            << "' r='2.5' fill='" << (p.highlight ? "#d62728" : "#1f77b4")
            << "' fill-opacity='0.7'/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace limtest
