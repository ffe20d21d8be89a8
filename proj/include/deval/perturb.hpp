#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "deval/document.hpp"
#include "deval/errors.hpp"
#include "deval/rng.hpp"

namespace deval {

enum class PerturbType { x_shift, font_scale };

enum class PerturbLevel { small, medium, large };

inline constexpr PerturbType kAllPerturbTypes[] = {PerturbType::x_shift,
                                                   PerturbType::font_scale};
inline constexpr PerturbLevel kAllPerturbLevels[] = {PerturbLevel::small,
                                                     PerturbLevel::medium,
                                                     PerturbLevel::large};

inline std::string to_string(PerturbType t) {
    return t == PerturbType::x_shift ? "x_shift" : "font_scale";
}

inline PerturbType perturb_type_from_string(const std::string& s) {
    if (s == "x_shift") return PerturbType::x_shift;
    if (s == "font_scale") return PerturbType::font_scale;
    throw ValidationError("unknown perturbation type \"" + s + "\"");
}

inline std::string to_string(PerturbLevel l) {
    switch (l) {
        case PerturbLevel::small: return "small";
        case PerturbLevel::medium: return "medium";
        default: return "large";
    }
}

inline PerturbLevel perturb_level_from_string(const std::string& s) {
    if (s == "small") return PerturbLevel::small;
    if (s == "medium") return PerturbLevel::medium;
    if (s == "large") return PerturbLevel::large;
    throw ValidationError("unknown perturbation level \"" + s + "\"");
}

// Severity bands. x-shift magnitudes are fractions of the canvas width;
// font factors multiply font_size (and the bbox with it). The bands are
// this artifact's quantification of small/medium/large and are recorded
// in every corpus manifest.
struct PerturbConfig {
    struct Band {
        double lo = 0.0;
        double hi = 0.0;
    };
    Band x_shift_small{0.01, 0.03};
    Band x_shift_medium{0.03, 0.08};
    Band x_shift_large{0.08, 0.20};
    Band font_scale_small{1.15, 1.35};
    Band font_scale_medium{1.35, 1.80};
    Band font_scale_large{1.80, 2.60};
    // Enlargement is the default: growing text drives both overlap and
    // white-space degradation. When enabled, each factor flips to its
    // reciprocal with probability 1/2.
    bool font_allow_shrink = false;

    const Band& band(PerturbType t, PerturbLevel l) const {
        if (t == PerturbType::x_shift) {
            switch (l) {
                case PerturbLevel::small: return x_shift_small;
                case PerturbLevel::medium: return x_shift_medium;
                default: return x_shift_large;
            }
        }
        switch (l) {
            case PerturbLevel::small: return font_scale_small;
            case PerturbLevel::medium: return font_scale_medium;
            default: return font_scale_large;
        }
    }
};

// Everything needed to reproduce one variant from its original.
struct PerturbationRecord {
    std::string original_id;
    std::string variant_id;
    PerturbType type = PerturbType::x_shift;
    PerturbLevel level = PerturbLevel::small;
    std::uint64_t seed = 0;
    // element id -> applied shift in px (x_shift) or scale factor (font_scale),
    // in element list order
    std::vector<std::pair<std::string, double>> deltas;
    bool noop = false; // document had no text elements
};

inline std::string variant_id_for(const std::string& original_id, PerturbType t,
                                  PerturbLevel l) {
    return original_id + "__" + to_string(t) + "__" + to_string(l);
}

// Variant seed = FNV-1a over (master seed bytes, original id, type, level),
// so corpus composition does not depend on input ordering.
inline std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& original_id,
                                 PerturbType type, PerturbLevel level) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(master_seed >> (8 * i));
    std::uint64_t h = fnv1a64_bytes(bytes, 8);
    h = fnv1a64(original_id, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(to_string(type), h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(to_string(level), h);
    return h;
}

// Shifts each text element's x by sign * u * canvas_width with u drawn from
// the level band. Non-text elements are untouched.
inline std::pair<DesignDocument, PerturbationRecord> perturb_x(
    const DesignDocument& doc, PerturbLevel level, std::uint64_t seed,
    const PerturbConfig& cfg = {}) {
    DesignDocument out = doc;
    PerturbationRecord rec;
    rec.type = PerturbType::x_shift;
    rec.level = level;
    rec.seed = seed;

    Sampler rng(seed);
    const PerturbConfig::Band& band = cfg.band(PerturbType::x_shift, level);
    const double width = doc.canvas.width;
    for (Element& e : out.elements) {
        if (!e.is_text()) continue;
        const double delta = rng.sign() * rng.uniform(band.lo, band.hi) * width;
        e.bbox.x += delta;
        rec.deltas.emplace_back(e.id, delta);
    }
    rec.noop = rec.deltas.empty();
    return {std::move(out), std::move(rec)};
}

// Multiplies each text element's font size by a factor drawn from the level
// band, rescaling its bbox about the top-left corner by the same factor.
inline std::pair<DesignDocument, PerturbationRecord> perturb_font(
    const DesignDocument& doc, PerturbLevel level, std::uint64_t seed,
    const PerturbConfig& cfg = {}) {
    DesignDocument out = doc;
    PerturbationRecord rec;
    rec.type = PerturbType::font_scale;
    rec.level = level;
    rec.seed = seed;

    Sampler rng(seed);
    const PerturbConfig::Band& band = cfg.band(PerturbType::font_scale, level);
    for (Element& e : out.elements) {
        if (!e.is_text()) continue;
        double factor = rng.uniform(band.lo, band.hi);
        if (cfg.font_allow_shrink && rng.chance(0.5)) factor = 1.0 / factor;
        *e.font_size *= factor;
        e.bbox.w *= factor;
        e.bbox.h *= factor;
        rec.deltas.emplace_back(e.id, factor);
    }
    rec.noop = rec.deltas.empty();
    return {std::move(out), std::move(rec)};
}

inline std::pair<DesignDocument, PerturbationRecord> perturb(
    const DesignDocument& doc, PerturbType type, PerturbLevel level, std::uint64_t seed,
    const PerturbConfig& cfg = {}) {
    return type == PerturbType::x_shift ? perturb_x(doc, level, seed, cfg)
                                        : perturb_font(doc, level, seed, cfg);
}

// Replays a record against its original; reproduces the variant exactly
// because the recorded deltas are the exact doubles that were applied.
inline DesignDocument apply_record(const DesignDocument& original,
                                   const PerturbationRecord& rec) {
    DesignDocument out = original;
    std::unordered_map<std::string, double> by_id(rec.deltas.begin(), rec.deltas.end());
    for (Element& e : out.elements) {
        auto it = by_id.find(e.id);
        if (it == by_id.end()) continue;
        if (rec.type == PerturbType::x_shift) {
            e.bbox.x += it->second;
        } else {
            *e.font_size *= it->second;
            e.bbox.w *= it->second;
            e.bbox.h *= it->second;
        }
    }
    return out;
}

// One corpus row: an original or one of its perturbed variants.
struct CorpusEntry {
    std::string design_id;
    std::string original_id;
    DesignDocument doc;
    std::optional<PerturbationRecord> record; // empty for originals
};

// Emits every original plus one variant per (type, level) — seven entries
// per original — ordered by (original id, type, level), originals first
// within their block. Deterministic given the master seed.
inline std::vector<CorpusEntry> build_corpus(
    const std::vector<std::pair<std::string, DesignDocument>>& originals,
    std::uint64_t master_seed, const PerturbConfig& cfg = {}) {
    if (originals.empty()) throw ValidationError("build_corpus: no input documents");

    std::vector<std::pair<std::string, const DesignDocument*>> sorted;
    sorted.reserve(originals.size());
    for (const auto& [id, doc] : originals) sorted.emplace_back(id, &doc);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].first == sorted[i - 1].first) {
            throw ValidationError("build_corpus: duplicate original id \"" +
                                  sorted[i].first + "\"");
        }
    }

    std::vector<CorpusEntry> corpus;
    corpus.reserve(sorted.size() * 7);
    for (const auto& [id, doc] : sorted) {
        corpus.push_back(CorpusEntry{id, id, *doc, std::nullopt});
        for (PerturbType type : kAllPerturbTypes) {
            for (PerturbLevel level : kAllPerturbLevels) {
                const std::uint64_t seed = derive_seed(master_seed, id, type, level);
                auto [variant, rec] = perturb(*doc, type, level, seed, cfg);
                rec.original_id = id;
                rec.variant_id = variant_id_for(id, type, level);
                corpus.push_back(
                    CorpusEntry{rec.variant_id, id, std::move(variant), std::move(rec)});
            }
        }
    }
    return corpus;
}

} // namespace deval
