#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "clreserve/csv.hpp"

namespace clreserve::svg {

// Minimal grouped bar chart emitted as a standalone SVG file: one cluster
// per group, one bar per series, zero baseline, legend on top. Enough for
// the reserve summary figures; not a general plotting layer.
struct BarChart {
    std::string title;
    std::vector<std::string> group_labels;
    std::vector<std::string> series_labels;
    // values[group][series]
    std::vector<std::vector<double>> values;
};

inline std::string render(const BarChart& chart) {
    static const char* palette[] = {"#4878a8", "#e8b004", "#e07030", "#58a058", "#9058a0"};
    const double width = 900.0, height = 420.0;
    const double left = 70.0, right = 20.0, top = 60.0, bottom = 50.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double vmin = 0.0, vmax = 0.0;
    for (const auto& group : chart.values)
        for (double v : group) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    if (vmax == vmin)
        vmax = vmin + 1.0;
    double span = vmax - vmin;
    vmax += 0.05 * span;
    vmin -= 0.05 * span;

    auto ypos = [&](double v) { return top + (vmax - v) / (vmax - vmin) * plot_h; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + csv::format_double(width) +
           "\" height=\"" + csv::format_double(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + csv::format_double(width / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           chart.title + "</text>\n";

    // Legend.
    double lx = left;
    for (size_t s = 0; s < chart.series_labels.size(); ++s) {
        out += "<rect x=\"" + csv::format_double(lx) + "\" y=\"34\" width=\"12\" height=\"12\" fill=\"" +
               palette[s % 5] + "\"/>\n";
        out += "<text x=\"" + csv::format_double(lx + 16) +
               "\" y=\"45\" font-family=\"sans-serif\" font-size=\"12\">" +
               chart.series_labels[s] + "</text>\n";
        lx += 18.0 + 8.0 * static_cast<double>(chart.series_labels[s].size());
    }

    // Axis ticks: min, zero, max.
    for (double v : {vmin, 0.0, vmax}) {
        double y = ypos(v);
        out += "<line x1=\"" + csv::format_double(left - 4) + "\" y1=\"" + csv::format_double(y) +
               "\" x2=\"" + csv::format_double(width - right) + "\" y2=\"" + csv::format_double(y) +
               "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + csv::format_double(left - 8) + "\" y=\"" + csv::format_double(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               csv::format_double(std::round(v * 100.0) / 100.0) + "</text>\n";
    }

    size_t n_groups = chart.group_labels.size();
    size_t n_series = chart.series_labels.size();
    double group_w = plot_w / static_cast<double>(std::max<size_t>(1, n_groups));
    double bar_w = group_w * 0.8 / static_cast<double>(std::max<size_t>(1, n_series));
    double zero_y = ypos(0.0);

    for (size_t g = 0; g < n_groups; ++g) {
        double gx = left + group_w * static_cast<double>(g) + group_w * 0.1;
        for (size_t s = 0; s < n_series && s < chart.values[g].size(); ++s) {
            double v = chart.values[g][s];
            double y = ypos(std::max(v, 0.0));
            double h = std::abs(ypos(v) - zero_y);
            out += "<rect x=\"" + csv::format_double(gx + bar_w * static_cast<double>(s)) +
                   "\" y=\"" + csv::format_double(y) + "\" width=\"" +
                   csv::format_double(bar_w * 0.92) + "\" height=\"" + csv::format_double(h) +
                   "\" fill=\"" + palette[s % 5] + "\"/>\n";
        }
        out += "<text x=\"" + csv::format_double(gx + group_w * 0.4) + "\" y=\"" +
               csv::format_double(height - bottom + 16) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               chart.group_labels[g] + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace clreserve::svg
