#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "deval/color.hpp"
#include "deval/document.hpp"
#include "deval/errors.hpp"
#include "deval/geometry.hpp"
#include "deval/raster.hpp"

namespace deval {

enum class Principle { alignment, overlap, whitespace };

inline constexpr Principle kAllPrinciples[] = {Principle::alignment, Principle::overlap,
                                               Principle::whitespace};

inline std::string to_string(Principle p) {
    switch (p) {
        case Principle::alignment: return "alignment";
        case Principle::overlap: return "overlap";
        default: return "whitespace";
    }
}

inline Principle principle_from_string(const std::string& s) {
    if (s == "alignment") return Principle::alignment;
    if (s == "overlap") return Principle::overlap;
    if (s == "whitespace") return Principle::whitespace;
    throw ValidationError("unknown principle \"" + s + "\"");
}

enum class ScoreMethod { heuristic, llm };

inline std::string to_string(ScoreMethod m) {
    return m == ScoreMethod::heuristic ? "heuristic" : "llm";
}

inline ScoreMethod method_from_string(const std::string& s) {
    if (s == "heuristic") return ScoreMethod::heuristic;
    if (s == "llm") return ScoreMethod::llm;
    throw ValidationError("unknown method \"" + s + "\"");
}

struct ScoreComponent {
    std::string name;
    double raw = 0.0;        // the measured quantity before normalization
    double normalized = 0.0; // in [0, 1], contributes weight * normalized
    double weight = 0.0;
};

// One measurement of one principle. Heuristic values live in [0, 1] and
// equal the weighted sum of their components; LLM values live in [1, 10].
struct PrincipleScore {
    Principle principle = Principle::alignment;
    ScoreMethod method = ScoreMethod::heuristic;
    double value = 0.0;
    std::vector<ScoreComponent> components;
};

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// ---------------------------------------------------------------------------
// Configuration. Tolerances scale with the canvas (factors of max(W, H) or
// the diagonal) so scores are resolution-independent; every knob can be
// overridden from the config file.
// ---------------------------------------------------------------------------

struct AlignmentConfig {
    double tau_exact_factor = 0.005; // τ_exact = factor * max(W, H)
    double tau_near_factor = 0.03;   // τ_near  = factor * max(W, H)
    double w_grouped = 0.4;
    double w_near = 0.4;
    double w_extent = 0.2;
};

struct OverlapConfig {
    double w_pair = 0.4;
    double w_contrast = 0.4;
    double w_oob = 0.2;
    double contrast_target = 4.5; // WCAG AA ratio mapping to a full sub-score
};

struct WhitespaceConfig {
    double w_ratio = 0.3;
    double w_trapped = 0.2;
    double w_proximity = 0.15;
    double w_uniformity = 0.2;
    double w_margin = 0.15;
    double theta_empty = 0.5;    // empty-region area ratio where the penalty starts
    double d_ref_factor = 0.05;  // d_ref = factor * canvas diagonal
    double m_ref_factor = 0.02;  // m_ref = factor * min(W, H)
};

struct HeuristicConfig {
    AlignmentConfig alignment;
    OverlapConfig overlap;
    WhitespaceConfig whitespace;
};

namespace detail {
inline void check_weights(std::initializer_list<double> ws, const std::string& which) {
    double sum = 0.0;
    for (double w : ws) {
        if (w < 0.0) throw ValidationError(which + ": weights must be >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError(which + ": weights must sum to 1");
    }
}
} // namespace detail

inline void validate(const HeuristicConfig& cfg) {
    detail::check_weights({cfg.alignment.w_grouped, cfg.alignment.w_near,
                           cfg.alignment.w_extent},
                          "alignment weights");
    detail::check_weights({cfg.overlap.w_pair, cfg.overlap.w_contrast, cfg.overlap.w_oob},
                          "overlap weights");
    detail::check_weights({cfg.whitespace.w_ratio, cfg.whitespace.w_trapped,
                           cfg.whitespace.w_proximity, cfg.whitespace.w_uniformity,
                           cfg.whitespace.w_margin},
                          "whitespace weights");
    if (cfg.alignment.tau_exact_factor <= 0.0) {
        throw ValidationError("alignment.tau_exact_factor: must be > 0");
    }
    if (cfg.alignment.tau_near_factor <= cfg.alignment.tau_exact_factor) {
        throw ValidationError("alignment.tau_near_factor: must exceed tau_exact_factor");
    }
    if (cfg.overlap.contrast_target <= 0.0) {
        throw ValidationError("overlap.contrast_target: must be > 0");
    }
    if (cfg.whitespace.theta_empty < 0.0 || cfg.whitespace.theta_empty >= 1.0) {
        throw ValidationError("whitespace.theta_empty: must be in [0, 1)");
    }
    if (cfg.whitespace.d_ref_factor <= 0.0 || cfg.whitespace.m_ref_factor <= 0.0) {
        throw ValidationError("whitespace reference factors must be > 0");
    }
}

// ---------------------------------------------------------------------------
// Alignment
// ---------------------------------------------------------------------------

enum class Axis { vertical, horizontal }; // vertical = shared x coordinate

enum class AnchorKind { left, center, right, top, middle, bottom };

inline std::string to_string(AnchorKind a) {
    switch (a) {
        case AnchorKind::left: return "left";
        case AnchorKind::center: return "center";
        case AnchorKind::right: return "right";
        case AnchorKind::top: return "top";
        case AnchorKind::middle: return "middle";
        default: return "bottom";
    }
}

struct AlignmentGroup {
    Axis axis = Axis::vertical;
    AnchorKind anchor = AnchorKind::left;
    double coordinate = 0.0;          // midpoint of member anchor coordinates
    std::vector<std::string> members; // element ids, ordered by anchor coordinate
    double extent = 0.0;              // max pairwise center distance, px
};

struct AlignmentGroups {
    std::vector<AlignmentGroup> groups;
};

namespace detail {

inline double anchor_coordinate(const Element& e, AnchorKind a) {
    switch (a) {
        case AnchorKind::left: return e.bbox.left();
        case AnchorKind::center: return e.bbox.center_x();
        case AnchorKind::right: return e.bbox.right();
        case AnchorKind::top: return e.bbox.top();
        case AnchorKind::middle: return e.bbox.center_y();
        default: return e.bbox.bottom();
    }
}

inline Axis anchor_axis(AnchorKind a) {
    return (a == AnchorKind::left || a == AnchorKind::center || a == AnchorKind::right)
               ? Axis::vertical
               : Axis::horizontal;
}

} // namespace detail

// Single-linkage clustering of anchor coordinates per anchor kind:
// sorted coordinates chain into one group while consecutive gaps stay
// within tau_exact. Groups need at least two members.
inline AlignmentGroups detect_alignment_groups(const DesignDocument& doc,
                                               double tau_exact) {
    if (tau_exact <= 0.0) throw ValidationError("tau_exact: must be > 0");
    AlignmentGroups out;
    constexpr AnchorKind kinds[] = {AnchorKind::left,   AnchorKind::center,
                                    AnchorKind::right,  AnchorKind::top,
                                    AnchorKind::middle, AnchorKind::bottom};
    for (AnchorKind kind : kinds) {
        std::vector<std::pair<double, std::size_t>> coords;
        coords.reserve(doc.elements.size());
        for (std::size_t i = 0; i < doc.elements.size(); ++i) {
            coords.emplace_back(detail::anchor_coordinate(doc.elements[i], kind), i);
        }
        std::sort(coords.begin(), coords.end());
        std::size_t start = 0;
        for (std::size_t i = 1; i <= coords.size(); ++i) {
            const bool breaks =
                i == coords.size() || coords[i].first - coords[i - 1].first > tau_exact;
            if (!breaks) continue;
            if (i - start >= 2) {
                AlignmentGroup g;
                g.axis = detail::anchor_axis(kind);
                g.anchor = kind;
                g.coordinate = (coords[start].first + coords[i - 1].first) / 2.0;
                for (std::size_t k = start; k < i; ++k) {
                    g.members.push_back(doc.elements[coords[k].second].id);
                }
                double extent = 0.0;
                for (std::size_t a = start; a < i; ++a) {
                    const Element& ea = doc.elements[coords[a].second];
                    for (std::size_t b = a + 1; b < i; ++b) {
                        const Element& eb = doc.elements[coords[b].second];
                        extent = std::max(extent,
                                          std::hypot(ea.bbox.center_x() - eb.bbox.center_x(),
                                                     ea.bbox.center_y() - eb.bbox.center_y()));
                    }
                }
                g.extent = extent;
                out.groups.push_back(std::move(g));
            }
            start = i;
        }
    }
    return out;
}

// Alignment score: fraction of elements in some alignment group, a penalty
// for near-miss anchor pairs (misalignments slightly past the exact
// tolerance, growing with the residual up to the perceptual band edge),
// and a bonus for spatially extended groups.
inline PrincipleScore score_alignment(const DesignDocument& doc,
                                      const AlignmentConfig& cfg = {}) {
    PrincipleScore score;
    score.principle = Principle::alignment;
    score.method = ScoreMethod::heuristic;

    const double span = std::max(doc.canvas.width, doc.canvas.height);
    const double tau_exact = cfg.tau_exact_factor * span;
    const double tau_near = cfg.tau_near_factor * span;
    const std::size_t n = doc.elements.size();

    double s_grouped = 1.0, p_near = 0.0, s_extent = 1.0;
    if (n >= 2) {
        const AlignmentGroups groups = detect_alignment_groups(doc, tau_exact);

        std::unordered_set<std::string> grouped;
        for (const AlignmentGroup& g : groups.groups) {
            grouped.insert(g.members.begin(), g.members.end());
        }
        s_grouped = static_cast<double>(grouped.size()) / static_cast<double>(n);

        double penalty_sum = 0.0;
        std::size_t near_count = 0;
        constexpr AnchorKind kinds[] = {AnchorKind::left,   AnchorKind::center,
                                        AnchorKind::right,  AnchorKind::top,
                                        AnchorKind::middle, AnchorKind::bottom};
        for (AnchorKind kind : kinds) {
            for (std::size_t i = 0; i < n; ++i) {
                const double ci = detail::anchor_coordinate(doc.elements[i], kind);
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double r =
                        std::abs(ci - detail::anchor_coordinate(doc.elements[j], kind));
                    if (r > tau_exact && r <= tau_near) {
                        penalty_sum += (r - tau_exact) / (tau_near - tau_exact);
                        ++near_count;
                    }
                }
            }
        }
        p_near = near_count > 0 ? penalty_sum / static_cast<double>(near_count) : 0.0;

        if (groups.groups.empty()) {
            s_extent = 0.0;
        } else {
            const double diag = doc.canvas.diagonal();
            double sum = 0.0;
            for (const AlignmentGroup& g : groups.groups) {
                sum += std::min(1.0, g.extent / diag);
            }
            s_extent = sum / static_cast<double>(groups.groups.size());
        }
    }
    // fewer than two elements: vacuously aligned, every component maxes out

    score.components = {
        {"grouped_fraction", s_grouped, clamp01(s_grouped), cfg.w_grouped},
        {"near_miss", p_near, clamp01(1.0 - p_near), cfg.w_near},
        {"group_extent", s_extent, clamp01(s_extent), cfg.w_extent},
    };
    score.value = 0.0;
    for (const ScoreComponent& c : score.components) score.value += c.weight * c.normalized;
    score.value = clamp01(score.value);
    return score;
}

// ---------------------------------------------------------------------------
// Overlap
// ---------------------------------------------------------------------------

// Over-painting relation: the element with higher z is "on"; equal z falls
// to the later list element, matching paint order.
inline PrincipleScore score_overlap(const DesignDocument& doc,
                                    const OverlapConfig& cfg = {},
                                    const AssetLoader* assets = nullptr) {
    PrincipleScore score;
    score.principle = Principle::overlap;
    score.method = ScoreMethod::heuristic;

    const std::size_t n = doc.elements.size();
    double p_pair = 0.0, s_contrast = 1.0, p_oob = 0.0;

    if (n >= 2) {
        // The three stacking categories (anything on text, text on graphic,
        // graphic on graphic, with z deciding who is on top) partition every
        // pair, so each pair contributes exactly once.
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double inter =
                    intersection_area(doc.elements[i].bbox, doc.elements[j].bbox);
                const double denom =
                    std::min(doc.elements[i].bbox.area(), doc.elements[j].bbox.area());
                sum += inter / denom;
                ++pairs;
            }
        }
        p_pair = sum / static_cast<double>(pairs);
    }

    std::vector<const Element*> texts;
    for (const Element& e : doc.elements) {
        if (e.is_text()) texts.push_back(&e);
    }
    if (!texts.empty()) {
        double sum = 0.0;
        for (const Element* t : texts) {
            if (intersection_area(t->bbox, doc.canvas.rect()) <= 0.0) {
                // invisible text: readability is vacuous, the out-of-bounds
                // term already carries the penalty
                sum += 1.0;
                continue;
            }
            DesignDocument without = doc;
            without.elements.clear();
            for (const Element& e : doc.elements) {
                if (&e != t) without.elements.push_back(e);
            }
            const RasterImage img = render(without, assets);
            const RegionStats st = region_stats(img, t->bbox);
            const double ratio = wcag_contrast_ratio(
                wcag_relative_luminance(*t->color),
                wcag_relative_luminance(st.mean_r, st.mean_g, st.mean_b));
            sum += std::min(1.0, ratio / cfg.contrast_target);
        }
        s_contrast = sum / static_cast<double>(texts.size());
    }

    if (n > 0) {
        double sum = 0.0;
        for (const Element& e : doc.elements) {
            sum += out_of_bounds_fraction(e.bbox, doc.canvas.rect());
        }
        p_oob = sum / static_cast<double>(n);
    }

    score.components = {
        {"pair_overlap", p_pair, clamp01(1.0 - p_pair), cfg.w_pair},
        {"text_contrast", s_contrast, clamp01(s_contrast), cfg.w_contrast},
        {"out_of_bounds", p_oob, clamp01(1.0 - p_oob), cfg.w_oob},
    };
    score.value = 0.0;
    for (const ScoreComponent& c : score.components) score.value += c.weight * c.normalized;
    score.value = clamp01(score.value);
    return score;
}

// ---------------------------------------------------------------------------
// White space
// ---------------------------------------------------------------------------

inline PrincipleScore score_whitespace(const DesignDocument& doc,
                                       const WhitespaceConfig& cfg = {}) {
    PrincipleScore score;
    score.principle = Principle::whitespace;
    score.method = ScoreMethod::heuristic;

    const Rect canvas = doc.canvas.rect();
    const double canvas_area = canvas.area();
    const double diag = doc.canvas.diagonal();
    const std::size_t n = doc.elements.size();

    std::vector<Rect> rects;
    rects.reserve(n);
    for (const Element& e : doc.elements) rects.push_back(e.bbox);

    // S1: fraction of the canvas not covered by any element
    const double covered = union_area(rects, canvas) / canvas_area;
    const double s_ratio = 1.0 - covered;

    // S2: penalty once the largest contiguous empty block grows past theta
    const OccupancyMask mask = occupancy_mask(doc);
    const double a_empty = largest_empty_rect(mask).area() / canvas_area;
    const double s_trapped =
        1.0 - std::max(0.0, (a_empty - cfg.theta_empty) / (1.0 - cfg.theta_empty));

    // S3: nearest-neighbor spacing relative to d_ref
    double s_proximity = 1.0;
    if (n >= 2) {
        const double d_ref = cfg.d_ref_factor * diag;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                nearest = std::min(nearest, min_edge_distance(rects[i], rects[j]));
            }
            sum += std::min(1.0, nearest / d_ref);
        }
        s_proximity = sum / static_cast<double>(n);
    }

    // S4: uniformity of vertical rhythm over text tops
    double s_uniform = 1.0;
    std::vector<double> tops;
    for (const Element& e : doc.elements) {
        if (e.is_text()) tops.push_back(e.bbox.top());
    }
    if (tops.size() >= 3) {
        std::sort(tops.begin(), tops.end());
        std::vector<double> gaps;
        for (std::size_t i = 1; i < tops.size(); ++i) gaps.push_back(tops[i] - tops[i - 1]);
        double mean = 0.0;
        for (double g : gaps) mean += g;
        mean /= static_cast<double>(gaps.size());
        if (mean > 0.0) {
            double var = 0.0;
            for (double g : gaps) var += (g - mean) * (g - mean);
            var /= static_cast<double>(gaps.size());
            s_uniform = 1.0 - clamp01(std::sqrt(var) / mean);
        }
        // identical tops mean zero gaps all around, which is perfectly uniform
    }

    // S5: thinnest border margin relative to m_ref
    double s_margin = 1.0;
    if (n >= 1) {
        const double m_ref = cfg.m_ref_factor * std::min(doc.canvas.width, doc.canvas.height);
        double left = std::numeric_limits<double>::infinity();
        double right = left, top = left, bottom = left;
        for (const Rect& r : rects) {
            left = std::min(left, std::max(0.0, r.left()));
            right = std::min(right, std::max(0.0, canvas.right() - r.right()));
            top = std::min(top, std::max(0.0, r.top()));
            bottom = std::min(bottom, std::max(0.0, canvas.bottom() - r.bottom()));
        }
        s_margin = std::min(1.0, std::min({left, right, top, bottom}) / m_ref);
    }

    score.components = {
        {"whitespace_ratio", covered, clamp01(s_ratio), cfg.w_ratio},
        {"trapped_space", a_empty, clamp01(s_trapped), cfg.w_trapped},
        {"proximity", s_proximity, clamp01(s_proximity), cfg.w_proximity},
        {"vertical_uniformity", s_uniform, clamp01(s_uniform), cfg.w_uniformity},
        {"border_margin", s_margin, clamp01(s_margin), cfg.w_margin},
    };
    score.value = 0.0;
    for (const ScoreComponent& c : score.components) score.value += c.weight * c.normalized;
    score.value = clamp01(score.value);
    return score;
}

inline PrincipleScore score_principle(const DesignDocument& doc, Principle p,
                                      const HeuristicConfig& cfg = {},
                                      const AssetLoader* assets = nullptr) {
    switch (p) {
        case Principle::alignment: return score_alignment(doc, cfg.alignment);
        case Principle::overlap: return score_overlap(doc, cfg.overlap, assets);
        default: return score_whitespace(doc, cfg.whitespace);
    }
}

} // namespace deval
