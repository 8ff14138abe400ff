#pragma once

// Minimal SVG line charts for work loops, phase portraits and apex series.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "../analysis/metrics.hpp"
#include "csv.hpp"

namespace slackhop {

struct Series {
    std::string label;
    std::vector<double> x, y;
    bool markers = false;
    bool closed = false;  ///< joins the last point back to the first
};

struct Chart {
    std::string title, x_label, y_label;
    std::vector<Series> series;
    int width = 640, height = 420;
};

namespace svg {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v, double step) {
    char buf[32];
    const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
    std::snprintf(buf, sizeof buf, "%.*f", std::min(digits, 6), std::abs(v) < 0.5 * step * 1e-6 ? 0.0 : v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

/// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
inline double nice_step(double range, int target = 5) {
    if (!(range > 0.0)) return 1.0;
    const double raw = range / target;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    const double m = raw / p;
    return (m < 1.5 ? 1.0 : m < 3.5 ? 2.0 : m < 7.5 ? 5.0 : 10.0) * p;
}

struct Range {
    double lo = 0.0, hi = 1.0;
};

inline Range padded(double lo, double hi) {
    if (!(lo <= hi)) return {0.0, 1.0};
    if (hi - lo < 1e-12) {
        const double d = std::max(std::abs(lo) * 0.1, 1e-3);
        return {lo - d, hi + d};
    }
    const double d = 0.05 * (hi - lo);
    return {lo - d, hi + d};
}

inline const char* colour(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[i % 6];
}

}  // namespace svg

/// Renders the chart. Non-finite points are skipped and split the polyline.
inline std::string render_svg(const Chart& c) {
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : c.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    const svg::Range xr = svg::padded(xlo, xhi), yr = svg::padded(ylo, yhi);
    const double left = 70, right = 20, top = 40, bottom = 55;
    const double pw = c.width - left - right, ph = c.height - top - bottom;
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(c.width) + "\" height=\"" +
         std::to_string(c.height) + "\" viewBox=\"0 0 " + std::to_string(c.width) + " " + std::to_string(c.height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + svg::num(c.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         svg::escape(c.title) + "</text>\n";
    o += "<rect x=\"" + svg::num(left) + "\" y=\"" + svg::num(top) + "\" width=\"" + svg::num(pw) + "\" height=\"" +
         svg::num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    const double xs = svg::nice_step(xr.hi - xr.lo), ys = svg::nice_step(yr.hi - yr.lo);
    for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi + 1e-9 * xs; v += xs) {
        const std::string X = svg::num(px(v));
        o += "<line x1=\"" + X + "\" y1=\"" + svg::num(top + ph) + "\" x2=\"" + X + "\" y2=\"" + svg::num(top + ph + 5) +
             "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + X + "\" y=\"" + svg::num(top + ph + 18) + "\" text-anchor=\"middle\">" +
             svg::tick_label(v, xs) + "</text>\n";
    }
    for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi + 1e-9 * ys; v += ys) {
        const std::string Y = svg::num(py(v));
        o += "<line x1=\"" + svg::num(left - 5) + "\" y1=\"" + Y + "\" x2=\"" + svg::num(left) + "\" y2=\"" + Y +
             "\" stroke=\"black\"/>\n";
        o += "<text x=\"" + svg::num(left - 8) + "\" y=\"" + svg::num(py(v) + 4) + "\" text-anchor=\"end\">" +
             svg::tick_label(v, ys) + "</text>\n";
    }
    o += "<text x=\"" + svg::num(left + pw / 2) + "\" y=\"" + svg::num(c.height - 12.0) + "\" text-anchor=\"middle\">" +
         svg::escape(c.x_label) + "</text>\n";
    o += "<text x=\"16\" y=\"" + svg::num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         svg::num(top + ph / 2) + ")\">" + svg::escape(c.y_label) + "</text>\n";

    for (std::size_t k = 0; k < c.series.size(); ++k) {
        const Series& s = c.series[k];
        const char* col = svg::colour(k);
        std::vector<std::string> runs(1);
        std::string first;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                if (!runs.back().empty()) runs.emplace_back();
                continue;
            }
            const std::string pt = svg::num(px(s.x[i])) + "," + svg::num(py(s.y[i])) + " ";
            if (first.empty()) first = pt;
            runs.back() += pt;
            if (s.markers)
                o += "<circle cx=\"" + svg::num(px(s.x[i])) + "\" cy=\"" + svg::num(py(s.y[i])) + "\" r=\"2.5\" fill=\"" +
                     col + "\"/>\n";
        }
        if (s.closed && runs.size() == 1 && !first.empty()) runs.back() += first;
        for (const auto& r : runs)
            o += "<polyline class=\"series\" fill=\"none\" stroke=\"" + std::string(col) +
                 "\" stroke-width=\"1.5\" points=\"" + (r.empty() ? r : r.substr(0, r.size() - 1)) + "\"/>\n";
        if (!s.label.empty())
            o += "<text x=\"" + svg::num(left + pw - 8) + "\" y=\"" + svg::num(top + 16.0 + 15.0 * k) +
                 "\" text-anchor=\"end\" fill=\"" + col + "\">" + svg::escape(s.label) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

// Charts built from CSV outputs.

/// Contiguous runs of stance rows in a trace table, as [begin, end) row ranges.
inline std::vector<std::pair<std::size_t, std::size_t>> stance_runs(const std::vector<double>& grf) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    while (i < grf.size()) {
        if (!(grf[i] > 0.0)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < grf.size() && grf[j] > 0.0) ++j;
        runs.emplace_back(i, j);
        i = j;
    }
    return runs;
}

/// Damper force against piston position for one stance of a trace table.
/// A negative index counts from the last complete stance. A trace without
/// stances gives an empty loop.
inline Chart workloop_chart(const CsvTable& trace, int stance = -1) {
    const auto grf = trace.numbers("grf");
    const auto pos = trace.numbers("piston_pos");
    const auto force = trace.numbers("f_damper");
    auto runs = stance_runs(grf);
    if (!runs.empty() && runs.back().second == grf.size()) runs.pop_back();  // cut off by the trial end
    Series s;
    s.closed = true;
    std::string which = "no stance";
    if (!runs.empty()) {
        const long n = static_cast<long>(runs.size());
        const long k = stance < 0 ? n + stance : stance;
        if (k < 0 || k >= n) throw DomainError("plot: stance index out of range");
        for (std::size_t i = runs[static_cast<std::size_t>(k)].first; i < runs[static_cast<std::size_t>(k)].second; ++i) {
            s.x.push_back(pos[i] * 1e3);
            s.y.push_back(force[i]);
        }
        which = "stance " + std::to_string(k + 1) + " of " + std::to_string(n);
        std::vector<double> xm(s.x.size());
        for (std::size_t i = 0; i < xm.size(); ++i) xm[i] = s.x[i] * 1e-3;
        s.label = "E_d = " + svg::num(loop_energy(xm, s.y) * 1e3) + " mJ";
    }
    return {"Damper work loop, " + which, "piston position [mm]", "damper force [N]", {s}};
}

/// Vertical speed against hip height.
inline Chart phase_chart(const CsvTable& trace) {
    Series s;
    for (double y : trace.numbers("y")) s.x.push_back(y * 1e3);
    s.y = trace.numbers("vy");
    return {"Hip phase plot", "hip height [mm]", "vertical speed [m/s]", {s}};
}

/// Apex height per step from a steps table.
inline Chart apex_chart(const CsvTable& steps) {
    Series s;
    s.markers = true;
    s.x = steps.numbers("step");
    for (double a : steps.numbers("apex")) s.y.push_back(a * 1e3);
    return {"Apex height per step", "step", "apex height [mm]", {s}};
}

}  // namespace slackhop
