#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "deval/analysis.hpp"
#include "deval/csv.hpp"

namespace deval {

// Minimal deterministic SVG output. CSV stays the canonical report format;
// these charts exist for eyeballing a run without external tooling.

namespace svg {

inline std::string num(double v) {
    const double r = std::round(v * 100.0) / 100.0;
    return format_double(r == 0.0 ? 0.0 : r); // avoid "-0"
}

inline std::string header(int w, int h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
           " " + std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
}

inline std::string rect(double x, double y, double w, double h, const std::string& fill) {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
           "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
}

inline std::string line(double x1, double y1, double x2, double y2,
                        const std::string& stroke) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
           "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\"/>\n";
}

inline std::string circle(double cx, double cy, double r, const std::string& fill) {
    return "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
           "\" fill=\"" + fill + "\" fill-opacity=\"0.6\"/>\n";
}

inline std::string text(double x, double y, const std::string& s,
                        const std::string& extra = "") {
    std::string esc;
    for (char c : s) {
        if (c == '&') esc += "&amp;";
        else if (c == '<') esc += "&lt;";
        else if (c == '>') esc += "&gt;";
        else esc += c;
    }
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" +
           (extra.empty() ? "" : " " + extra) + ">" + esc + "</text>\n";
}

} // namespace svg

// Metric-vs-human scatter, one panel per series.
inline std::string chart_scatter(const std::vector<ScatterSeries>& series) {
    const int panel_w = 260, panel_h = 240, pad = 40;
    const int cols = 3;
    const int rows = static_cast<int>((series.size() + cols - 1) / cols);
    const int w = panel_w * std::min<int>(cols, std::max<int>(1, static_cast<int>(series.size())));
    const int h = std::max(1, rows) * panel_h;
    std::string out = svg::header(w, h);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const ScatterSeries& s = series[i];
        const double ox = static_cast<double>(panel_w * (i % cols));
        const double oy = static_cast<double>(panel_h * (i / cols));
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, y); ymax = std::max(ymax, y);
        }
        if (s.points.empty()) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
        if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
        if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
        const double plot_w = panel_w - 2.0 * pad, plot_h = panel_h - 2.0 * pad;
        out += svg::rect(ox + pad, oy + pad, plot_w, plot_h, "#f6f6f6");
        for (const auto& [x, y] : s.points) {
            const double px = ox + pad + (x - xmin) / (xmax - xmin) * plot_w;
            const double py = oy + pad + plot_h - (y - ymin) / (ymax - ymin) * plot_h;
            out += svg::circle(px, py, 2.5, "#3366cc");
        }
        out += svg::text(ox + pad, oy + pad - 8,
                         to_string(s.principle) + " / " + to_string(s.method));
        out += svg::text(ox + pad, oy + panel_h - 8, "human");
    }
    out += "</svg>\n";
    return out;
}

// Correlation per level, grouped by (principle, method).
inline std::string chart_correlation_bars(const std::vector<CorrelationSlice>& slices) {
    const int bar_w = 26, gap = 8, group_gap = 26, pad = 48, h = 260;
    std::vector<const CorrelationSlice*> defined;
    for (const CorrelationSlice& s : slices) defined.push_back(&s);
    const int w = pad * 2 +
                  static_cast<int>(defined.size()) * (bar_w + gap) +
                  group_gap * 6;
    std::string out = svg::header(std::max(w, 320), h);
    const double base = h - 60.0, scale = (h - 110.0);
    out += svg::line(pad, base, w - pad, base, "#333");
    double x = pad;
    std::string last_group;
    for (const CorrelationSlice* s : defined) {
        const std::string group = to_string(s->principle) + "/" + to_string(s->method);
        if (group != last_group) {
            x += group_gap;
            out += svg::text(x, h - 14, group);
            last_group = group;
        }
        const double r = s->r.value_or(0.0);
        const double bh = std::abs(r) * scale;
        const double y = r >= 0 ? base - bh : base;
        out += svg::rect(x, y, bar_w, bh, s->r ? "#3366cc" : "#cccccc");
        out += svg::text(x, base + 12, s->level.substr(0, 4));
        out += svg::text(x, y - 3, s->r ? svg::num(r) : "n/a");
        x += bar_w + gap;
    }
    out += "</svg>\n";
    return out;
}

// Box plot of per-design score spreads.
inline std::string chart_spread_box(const std::vector<SpreadSlice>& slices) {
    const int box_w = 40, gap = 40, pad = 50, h = 280;
    const int w = pad * 2 + static_cast<int>(slices.size()) * (box_w + gap);
    double vmax = 1e-9;
    for (const SpreadSlice& s : slices) vmax = std::max(vmax, s.summary.max);
    std::string out = svg::header(std::max(w, 320), h);
    const double base = h - 50.0, scale = (h - 100.0) / vmax;
    auto ypos = [&](double v) { return base - v * scale; };
    double x = pad;
    for (const SpreadSlice& s : slices) {
        const double cx = x + box_w / 2.0;
        out += svg::line(cx, ypos(s.summary.min), cx, ypos(s.summary.max), "#333");
        out += svg::rect(x, ypos(s.summary.q3), box_w,
                         std::max(1.0, ypos(s.summary.q1) - ypos(s.summary.q3)), "#9ec5e8");
        out += svg::line(x, ypos(s.summary.median), x + box_w, ypos(s.summary.median), "#333");
        out += svg::text(x - 4, base + 14, to_string(s.principle).substr(0, 5));
        out += svg::text(x - 4, base + 28, s.source);
        x += box_w + gap;
    }
    out += "</svg>\n";
    return out;
}

// Pairwise accuracy per level, grouped by principle.
inline std::string chart_accuracy_bars(const std::vector<AccuracySlice>& slices) {
    const int bar_w = 26, gap = 8, group_gap = 26, pad = 48, h = 240;
    const int w = pad * 2 + static_cast<int>(slices.size()) * (bar_w + gap) + group_gap * 4;
    std::string out = svg::header(std::max(w, 320), h);
    const double base = h - 50.0, scale = h - 100.0;
    out += svg::line(pad, base, w - pad, base, "#333");
    double x = pad;
    Principle last = Principle::alignment;
    bool first = true;
    for (const AccuracySlice& s : slices) {
        if (first || s.principle != last) {
            x += group_gap;
            out += svg::text(x, h - 10, to_string(s.principle));
            last = s.principle;
            first = false;
        }
        const double a = s.accuracy.value_or(0.0);
        out += svg::rect(x, base - a * scale, bar_w, a * scale,
                         s.accuracy ? "#44aa66" : "#cccccc");
        out += svg::text(x, base + 12, s.level.substr(0, 4));
        out += svg::text(x, base - a * scale - 3, s.accuracy ? svg::num(a) : "n/a");
        x += bar_w + gap;
    }
    out += "</svg>\n";
    return out;
}

} // namespace deval
