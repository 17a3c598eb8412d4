#pragma once
// Deterministic SVG line plots: no timestamps, no external dependencies,
// fixed palette and layout, linear or log10 axes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nll/csv.hpp"

namespace nll {

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct PlotAxes {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
};

namespace detail {

inline std::string fmt_coord(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

inline std::string fmt_tick(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 4);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline std::string render_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes) {
    if (series.empty()) throw std::invalid_argument("render_plot: no series");
    for (const auto& s : series)
        if (s.points.empty()) throw std::invalid_argument("render_plot: empty series rejected");

    auto tx = [&](double x) { return axes.logx ? std::log10(x) : x; };
    auto ty = [&](double y) { return axes.logy ? std::log10(y) : y; };
    auto usable = [&](const std::pair<double, double>& pt) {
        if (axes.logx && !(pt.first > 0.0)) return false;
        if (axes.logy && !(pt.second > 0.0)) return false;
        return true;
    };

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& s : series)
        for (const auto& pt : s.points) {
            if (!usable(pt)) continue;
            const double X = tx(pt.first), Y = ty(pt.second);
            if (first) {
                xmin = xmax = X;
                ymin = ymax = Y;
                first = false;
            } else {
                xmin = std::min(xmin, X);
                xmax = std::max(xmax, X);
                ymin = std::min(ymin, Y);
                ymax = std::max(ymax, Y);
            }
        }
    if (first) throw std::invalid_argument("render_plot: no plottable points (log axis?)");
    if (xmax - xmin < 1e-12) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 1.0;
        ymax += 1.0;
    }

    const double W = 640, H = 420, L = 70, R = 20, T = 36, B = 50;
    auto px = [&](double X) { return L + (X - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double Y) { return H - B - (Y - ymin) / (ymax - ymin) * (H - T - B); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    if (!axes.title.empty())
        svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"monospace\" "
               "font-size=\"14\">" + axes.title + "</text>\n";

    // axes box + ticks
    svg += "<rect x=\"" + detail::fmt_coord(L) + "\" y=\"" + detail::fmt_coord(T) + "\" width=\"" +
           detail::fmt_coord(W - L - R) + "\" height=\"" + detail::fmt_coord(H - T - B) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double X = xmin + (xmax - xmin) * i / 4.0;
        const double Y = ymin + (ymax - ymin) * i / 4.0;
        const double xe = axes.logx ? std::pow(10.0, X) : X;
        const double ye = axes.logy ? std::pow(10.0, Y) : Y;
        svg += "<line x1=\"" + detail::fmt_coord(px(X)) + "\" y1=\"" + detail::fmt_coord(H - B) +
               "\" x2=\"" + detail::fmt_coord(px(X)) + "\" y2=\"" + detail::fmt_coord(H - B + 5) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fmt_coord(px(X)) + "\" y=\"" + detail::fmt_coord(H - B + 18) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" +
               detail::fmt_tick(xe) + "</text>\n";
        svg += "<line x1=\"" + detail::fmt_coord(L - 5) + "\" y1=\"" + detail::fmt_coord(py(Y)) +
               "\" x2=\"" + detail::fmt_coord(L) + "\" y2=\"" + detail::fmt_coord(py(Y)) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fmt_coord(L - 8) + "\" y=\"" + detail::fmt_coord(py(Y) + 3) +
               "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" +
               detail::fmt_tick(ye) + "</text>\n";
    }
    if (!axes.xlabel.empty())
        svg += "<text x=\"320\" y=\"" + detail::fmt_coord(H - 12) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" +
               axes.xlabel + "</text>\n";
    if (!axes.ylabel.empty())
        svg += "<text x=\"16\" y=\"210\" text-anchor=\"middle\" font-family=\"monospace\" "
               "font-size=\"12\" transform=\"rotate(-90 16 210)\">" + axes.ylabel + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = palette[si % 5];
        std::string poly;
        for (const auto& pt : series[si].points) {
            if (!usable(pt)) continue;
            poly += detail::fmt_coord(px(tx(pt.first))) + "," + detail::fmt_coord(py(ty(pt.second))) + " ";
        }
        if (!poly.empty()) poly.pop_back();
        svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        for (const auto& pt : series[si].points) {
            if (!usable(pt)) continue;
            svg += "<circle cx=\"" + detail::fmt_coord(px(tx(pt.first))) + "\" cy=\"" +
                   detail::fmt_coord(py(ty(pt.second))) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        }
    }

    if (series.size() > 1) {
        for (std::size_t si = 0; si < series.size(); ++si) {
            const double yl = T + 14 + 16.0 * static_cast<double>(si);
            svg += "<line x1=\"" + detail::fmt_coord(W - R - 150) + "\" y1=\"" +
                   detail::fmt_coord(yl - 3) + "\" x2=\"" + detail::fmt_coord(W - R - 130) +
                   "\" y2=\"" + detail::fmt_coord(yl - 3) + "\" stroke=\"" + palette[si % 5] +
                   "\" stroke-width=\"2\"/>\n";
            svg += "<text x=\"" + detail::fmt_coord(W - R - 125) + "\" y=\"" + detail::fmt_coord(yl) +
                   "\" font-family=\"monospace\" font-size=\"11\">" + series[si].name + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

inline void emit_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes,
                      const std::string& path) {
    write_text_file(path, render_plot(series, axes));
}

} // namespace nll
