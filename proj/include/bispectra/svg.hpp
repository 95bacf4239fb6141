#pragma once

#include <bispectra/sweep.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace bispectra {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    double width = 720;
    double height = 480;
    std::vector<SvgSeries> series;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string svg_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string svg_escape(const std::string& s) {
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

}  // namespace detail

/// SVG 1.1 line chart: frame, a handful of ticks, one polyline and legend entry per series.
inline std::string render_svg(const SvgChart& chart) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    const double left = 80, right = 170, top = 40, bottom = 50;
    const double pw = chart.width - left - right, ph = chart.height - top - bottom;

    auto tx = [&](double x) { return chart.log_x ? std::log10(x) : x; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (chart.log_x && !(s.x[i] > 0)) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= std::max(1e-12, std::abs(y0) * 1e-6), y1 += std::max(1e-12, std::abs(y1) * 1e-6);
    const double ypad = (y1 - y0) * 0.05;
    y0 -= ypad;
    y1 += ypad;
    auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + detail::svg_num(chart.width) + "\" height=\"" +
           detail::svg_num(chart.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::svg_num(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + detail::svg_escape(chart.title) + "</text>\n";
    svg += "<rect x=\"" + detail::svg_num(left) + "\" y=\"" + detail::svg_num(top) + "\" width=\"" + detail::svg_num(pw) + "\" height=\"" +
           detail::svg_num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        const double xv = x0 + f * (x1 - x0);
        const double xs = left + f * pw;
        svg += "<line x1=\"" + detail::svg_num(xs) + "\" y1=\"" + detail::svg_num(top + ph) + "\" x2=\"" + detail::svg_num(xs) + "\" y2=\"" +
               detail::svg_num(top + ph + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(xs) + "\" y=\"" + detail::svg_num(top + ph + 18) + "\" text-anchor=\"middle\">" +
               detail::svg_tick(chart.log_x ? std::pow(10.0, xv) : xv) + "</text>\n";
        const double yv = y0 + f * (y1 - y0);
        const double ys = top + ph - f * ph;
        svg += "<line x1=\"" + detail::svg_num(left - 5) + "\" y1=\"" + detail::svg_num(ys) + "\" x2=\"" + detail::svg_num(left) + "\" y2=\"" +
               detail::svg_num(ys) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(left - 8) + "\" y=\"" + detail::svg_num(ys + 4) + "\" text-anchor=\"end\">" + detail::svg_tick(yv) + "</text>\n";
    }
    svg += "<text x=\"" + detail::svg_num(left + pw / 2) + "\" y=\"" + detail::svg_num(chart.height - 10) + "\" text-anchor=\"middle\">" +
           detail::svg_escape(chart.x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::svg_num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           detail::svg_num(top + ph / 2) + ")\">" + detail::svg_escape(chart.y_label) + "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = palette[k % (sizeof palette / sizeof palette[0])];
        std::string points;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (chart.log_x && !(s.x[i] > 0)) continue;
            if (!points.empty()) points += ' ';
            points += detail::svg_num(px(s.x[i])) + "," + detail::svg_num(py(s.y[i]));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = top + 14 + 16 * static_cast<double>(k);
        svg += "<line x1=\"" + detail::svg_num(left + pw + 12) + "\" y1=\"" + detail::svg_num(ly - 4) + "\" x2=\"" + detail::svg_num(left + pw + 32) +
               "\" y2=\"" + detail::svg_num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + detail::svg_num(left + pw + 36) + "\" y=\"" + detail::svg_num(ly) + "\">" + detail::svg_escape(s.label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

/// E~ against a_tilde, one series per level label.
template <typename Real = double>
SvgChart sweep_chart(const std::vector<SweepRecord<Real>>& records, const std::string& title) {
    std::map<std::tuple<int, int, int>, SvgSeries> by_label;
    for (const auto& r : records) {
        auto& s = by_label[{r.label.angular, r.label.orbital.value_or(-1), r.label.n}];
        if (s.label.empty()) s.label = "n=" + std::to_string(r.label.n) + " " + r.label.angular_text();
        s.x.push_back(static_cast<double>(r.a_tilde));
        s.y.push_back(static_cast<double>(r.e_tilde));
    }
    SvgChart chart;
    chart.title = title;
    chart.x_label = "a~";
    chart.y_label = "E~";
    for (auto& [key, s] : by_label) chart.series.push_back(std::move(s));
    return chart;
}

}  // namespace bispectra
