#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "deval/errors.hpp"

namespace deval {

// Axis-aligned rectangle, top-left origin, y grows downward, real pixels.
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double left() const { return x; }
    double right() const { return x + w; }
    double top() const { return y; }
    double bottom() const { return y + h; }
    double area() const { return w * h; }
    double center_x() const { return x + w / 2.0; }
    double center_y() const { return y + h / 2.0; }

    bool operator==(const Rect&) const = default;
};

inline Rect intersect(const Rect& a, const Rect& b) {
    const double x0 = std::max(a.left(), b.left());
    const double y0 = std::max(a.top(), b.top());
    const double x1 = std::min(a.right(), b.right());
    const double y1 = std::min(a.bottom(), b.bottom());
    if (x1 <= x0 || y1 <= y0) return Rect{0, 0, 0, 0};
    return Rect{x0, y0, x1 - x0, y1 - y0};
}

inline double intersection_area(const Rect& a, const Rect& b) {
    return intersect(a, b).area();
}

// Area of (union of rects) clipped to `clip`, exact for real coordinates.
// Coordinate-compression sweep over x strips with y-interval merging.
inline double union_area(const std::vector<Rect>& rects, const Rect& clip) {
    std::vector<Rect> clipped;
    clipped.reserve(rects.size());
    for (const Rect& r : rects) {
        Rect c = intersect(r, clip);
        if (c.area() > 0.0) clipped.push_back(c);
    }
    if (clipped.empty()) return 0.0;

    std::vector<double> xs;
    xs.reserve(clipped.size() * 2);
    for (const Rect& r : clipped) {
        xs.push_back(r.left());
        xs.push_back(r.right());
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    double total = 0.0;
    std::vector<std::pair<double, double>> spans;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double x0 = xs[i];
        const double x1 = xs[i + 1];
        const double mid = (x0 + x1) / 2.0;
        spans.clear();
        for (const Rect& r : clipped) {
            if (r.left() <= mid && mid < r.right()) {
                spans.emplace_back(r.top(), r.bottom());
            }
        }
        if (spans.empty()) continue;
        std::sort(spans.begin(), spans.end());
        double covered = 0.0;
        double cur_lo = spans[0].first;
        double cur_hi = spans[0].second;
        for (std::size_t k = 1; k < spans.size(); ++k) {
            if (spans[k].first > cur_hi) {
                covered += cur_hi - cur_lo;
                cur_lo = spans[k].first;
                cur_hi = spans[k].second;
            } else {
                cur_hi = std::max(cur_hi, spans[k].second);
            }
        }
        covered += cur_hi - cur_lo;
        total += covered * (x1 - x0);
    }
    return total;
}

// Fraction of r's area lying outside the canvas rect, in [0, 1].
inline double out_of_bounds_fraction(const Rect& r, const Rect& canvas) {
    const double a = r.area();
    if (a <= 0.0) throw StatsError("out_of_bounds_fraction: zero-area rect");
    double f = 1.0 - intersection_area(r, canvas) / a;
    return std::clamp(f, 0.0, 1.0);
}

// Euclidean distance between the closest points of two rects.
// Zero when they intersect or touch.
inline double min_edge_distance(const Rect& a, const Rect& b) {
    const double dx = std::max({0.0, a.left() - b.right(), b.left() - a.right()});
    const double dy = std::max({0.0, a.top() - b.bottom(), b.top() - a.bottom()});
    return std::hypot(dx, dy);
}

// Maximal-area all-empty rectangle of a boolean occupancy grid, found with
// the row-histogram stack method. MaskT needs width, height and
// test(x, y) -> true when the cell is occupied.
//
// Ties on area resolve to the smallest (top, then left) corner, so the
// result is deterministic. Returns a zero-area rect for a fully occupied
// grid. Coordinates are whole grid cells.
template <typename MaskT>
Rect largest_empty_rect(const MaskT& mask) {
    const int w = mask.width;
    const int h = mask.height;
    long long best_area = 0;
    int best_top = 0, best_left = 0, best_w = 0, best_h = 0;

    std::vector<int> heights(static_cast<std::size_t>(w), 0);
    std::vector<int> stack;
    stack.reserve(static_cast<std::size_t>(w) + 1);

    for (int row = 0; row < h; ++row) {
        for (int x = 0; x < w; ++x) {
            heights[static_cast<std::size_t>(x)] =
                mask.test(x, row) ? 0 : heights[static_cast<std::size_t>(x)] + 1;
        }
        stack.clear();
        for (int x = 0; x <= w; ++x) {
            const int cur = (x < w) ? heights[static_cast<std::size_t>(x)] : -1;
            while (!stack.empty() && heights[static_cast<std::size_t>(stack.back())] > cur) {
                const int tp = stack.back();
                stack.pop_back();
                const int hgt = heights[static_cast<std::size_t>(tp)];
                if (hgt == 0) continue;
                const int lft = stack.empty() ? 0 : stack.back() + 1;
                const int wid = x - lft;
                const long long area = static_cast<long long>(hgt) * wid;
                const int top = row - hgt + 1;
                if (area > best_area ||
                    (area == best_area && area > 0 &&
                     (top < best_top || (top == best_top && lft < best_left)))) {
                    best_area = area;
                    best_top = top;
                    best_left = lft;
                    best_w = wid;
                    best_h = hgt;
                }
            }
            stack.push_back(x);
        }
    }
    if (best_area == 0) return Rect{0, 0, 0, 0};
    return Rect{static_cast<double>(best_left), static_cast<double>(best_top),
                static_cast<double>(best_w), static_cast<double>(best_h)};
}

} // namespace deval
