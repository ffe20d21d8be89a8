#pragma once

// Shared builders and independent oracles for the test suites. The oracles
// deliberately use brute-force strategies (cell counting, exhaustive
// search, dense sampling) so they cannot share a bug with the library's
// analytic implementations.

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "deval/document.hpp"
#include "deval/geometry.hpp"
#include "deval/raster.hpp"
#include "deval/rng.hpp"

namespace testutil {

using namespace deval;

inline Element text_el(std::string id, double x, double y, double w, double h,
                       const std::string& color = "#000000", double font = 24.0,
                       int z = 0) {
    Element e;
    e.id = std::move(id);
    e.kind = ElementKind::text;
    e.bbox = Rect{x, y, w, h};
    e.z = z;
    e.color = parse_hex_color(color);
    e.font_size = font;
    e.content = "sample text";
    return e;
}

inline Element graphic_el(std::string id, double x, double y, double w, double h,
                          const std::string& color = "#336699", int z = 0) {
    Element e;
    e.id = std::move(id);
    e.kind = ElementKind::graphic;
    e.bbox = Rect{x, y, w, h};
    e.z = z;
    e.color = parse_hex_color(color);
    return e;
}

inline DesignDocument make_doc(int w, int h, std::vector<Element> elements,
                               const std::string& background = "#FFFFFF") {
    DesignDocument doc;
    doc.canvas.width = w;
    doc.canvas.height = h;
    doc.canvas.background_color = parse_hex_color(background);
    doc.elements = std::move(elements);
    validate_document(doc);
    return doc;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

// Counts grid cells whose centers lie in both rects.
inline double grid_intersection_area(const Rect& a, const Rect& b, int grid_w, int grid_h,
                                     double cell = 1.0) {
    long long count = 0;
    for (int gy = 0; gy < grid_h; ++gy) {
        for (int gx = 0; gx < grid_w; ++gx) {
            const double cx = (gx + 0.5) * cell;
            const double cy = (gy + 0.5) * cell;
            const bool in_a = cx >= a.left() && cx < a.right() && cy >= a.top() &&
                              cy < a.bottom();
            const bool in_b = cx >= b.left() && cx < b.right() && cy >= b.top() &&
                              cy < b.bottom();
            if (in_a && in_b) ++count;
        }
    }
    return static_cast<double>(count) * cell * cell;
}

// All-subrectangles search over the mask using prefix sums; O(W^2 H^2).
inline long long exhaustive_largest_empty_area(const OccupancyMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<long long> prefix(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    auto pre = [&](int x, int y) -> long long& {
        return prefix[static_cast<std::size_t>(y) * (w + 1) + x];
    };
    for (int y = 1; y <= h; ++y) {
        for (int x = 1; x <= w; ++x) {
            pre(x, y) = (mask.test(x - 1, y - 1) ? 1 : 0) + pre(x - 1, y) + pre(x, y - 1) -
                        pre(x - 1, y - 1);
        }
    }
    long long best = 0;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int y1 = y0; y1 < h; ++y1) {
            for (int x0 = 0; x0 < w; ++x0) {
                for (int x1 = x0; x1 < w; ++x1) {
                    const long long occupied = pre(x1 + 1, y1 + 1) - pre(x0, y1 + 1) -
                                               pre(x1 + 1, y0) + pre(x0, y0);
                    if (occupied == 0) {
                        best = std::max(best, static_cast<long long>(x1 - x0 + 1) *
                                                  (y1 - y0 + 1));
                    }
                }
            }
        }
    }
    return best;
}

// Min distance between rect boundaries/interiors via dense point sampling
// on both boundaries (plus containment/intersection handled by sampling
// interior grid points).
inline double sampled_min_distance(const Rect& a, const Rect& b, int n = 200) {
    auto boundary_points = [&](const Rect& r) {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i <= n; ++i) {
            const double t = static_cast<double>(i) / n;
            pts.emplace_back(r.left() + t * r.w, r.top());
            pts.emplace_back(r.left() + t * r.w, r.bottom());
            pts.emplace_back(r.left(), r.top() + t * r.h);
            pts.emplace_back(r.right(), r.top() + t * r.h);
        }
        return pts;
    };
    if (intersect(a, b).area() > 0.0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [ax, ay] : boundary_points(a)) {
        for (const auto& [bx, by] : boundary_points(b)) {
            best = std::min(best, std::hypot(ax - bx, ay - by));
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Random documents
// ---------------------------------------------------------------------------

inline DesignDocument random_document(Sampler& rng, int max_elements = 8) {
    const int w = rng.uniform_int(60, 400);
    const int h = rng.uniform_int(60, 300);
    std::vector<Element> elements;
    const int n = rng.uniform_int(0, max_elements);
    for (int i = 0; i < n; ++i) {
        const double ex = rng.uniform(-0.2 * w, 1.1 * w);
        const double ey = rng.uniform(-0.2 * h, 1.1 * h);
        const double ew = rng.uniform(1.0, 0.6 * w);
        const double eh = rng.uniform(1.0, 0.6 * h);
        const std::string id = "e" + std::to_string(i);
        if (rng.chance(0.5)) {
            elements.push_back(text_el(id, ex, ey, ew, eh, "#102030",
                                       rng.uniform(6.0, 40.0), rng.uniform_int(0, 5)));
        } else {
            elements.push_back(graphic_el(id, ex, ey, ew, eh, "#77AA33",
                                          rng.uniform_int(0, 5)));
        }
    }
    return make_doc(w, h, std::move(elements));
}

// Documents built around cleanly aligned text columns: anchors coincide
// exactly inside a column and stay far apart across unrelated elements, so
// the original has no accidental near-misses. "Sparse" variants sit well
// apart vertically with the column pushed toward the right edge, making
// small font growth harmless and large growth run off-canvas.
inline DesignDocument aligned_column_document(Sampler& rng, bool sparse) {
    const int w = rng.uniform_int(900, 1200);
    const int h = rng.uniform_int(550, static_cast<int>(0.85 * w));
    std::vector<Element> elements;

    if (sparse) {
        const double col_x = 0.58 * w;
        const double col_w = 0.26 * w;
        const double text_h = 0.05 * h;
        const double ys[] = {0.08 * h, 0.45 * h, 0.78 * h};
        for (int i = 0; i < 3; ++i) {
            elements.push_back(text_el("t" + std::to_string(i), col_x, ys[i], col_w,
                                       text_h, "#222222", text_h * 0.8));
        }
        return make_doc(w, h, std::move(elements));
    }

    const int n_text = rng.uniform_int(4, 7);
    const double col_x = rng.uniform(0.08, 0.14) * w;
    const double col_w = rng.uniform(0.30, 0.42) * w;
    const double text_h = rng.uniform(0.045, 0.06) * h;
    // inter-box gap in (0.4, 0.7) * text height: small font growth cannot
    // reach the next line, large growth always does
    const double gap = rng.uniform(0.42, 0.68) * text_h;
    double y = rng.uniform(0.08, 0.12) * h;
    for (int i = 0; i < n_text; ++i) {
        elements.push_back(text_el("t" + std::to_string(i), col_x, y, col_w, text_h,
                                   "#222222", text_h * 0.8));
        y += text_h + gap;
    }
    // two graphics clear of the column and of each other on every anchor
    elements.push_back(graphic_el("g0", 0.62 * w, 0.73 * h, 0.10 * w, 0.07 * h));
    elements.push_back(graphic_el("g1", 0.80 * w, 0.84 * h, 0.12 * w, 0.06 * h));
    return make_doc(w, h, std::move(elements));
}

// ---------------------------------------------------------------------------
// Filesystem helpers
// ---------------------------------------------------------------------------

inline std::filesystem::path golden_dir() {
    return std::filesystem::path(DEVAL_TEST_DIR) / "golden";
}

inline std::filesystem::path fresh_temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("deval_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string cli_path() {
    if (const char* env = std::getenv("DEVAL_CLI")) return env;
    return {};
}

// Runs the CLI with output captured to a file; returns the exit code.
// An optional working directory lets callers use identical relative
// argument strings across runs.
inline int run_cli(const std::string& args, const std::filesystem::path& log,
                   const std::filesystem::path& cwd = {}) {
    std::string cmd;
    if (!cwd.empty()) cmd += "cd " + cwd.string() + " && ";
    cmd += cli_path() + " " + args + " >" + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace testutil
