#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deval/annotations.hpp"
#include "deval/corpus.hpp"
#include "deval/csv.hpp"
#include "deval/errors.hpp"
#include "deval/stats.hpp"

namespace deval {

inline const std::vector<std::string>& report_levels() {
    static const std::vector<std::string> levels = {"overall", "original", "small",
                                                    "medium", "large"};
    return levels;
}

// r is absent when the slice has fewer than two joined pairs or a constant
// series; reports print it as "undefined" rather than faking a number.
struct CorrelationSlice {
    Principle principle = Principle::alignment;
    ScoreMethod method = ScoreMethod::heuristic;
    std::string level; // "overall" or a manifest level
    int n = 0;
    std::optional<double> r;
};

struct ScatterSeries {
    Principle principle = Principle::alignment;
    ScoreMethod method = ScoreMethod::heuristic;
    std::vector<std::pair<double, double>> points; // (human mean, metric value)
};

struct SpreadSlice {
    Principle principle = Principle::alignment;
    std::string source; // "llm" or "human"
    QuartileSummary summary;
};

struct AccuracySlice {
    Principle principle = Principle::alignment;
    std::string source; // which judge produced the verdicts, "llm" or "heuristic"
    std::string level;
    int total = 0;
    int correct = 0;
    int excluded = 0;
    std::optional<double> accuracy;
};

struct AgreementReport {
    std::vector<CorrelationSlice> correlations;
    std::vector<ScatterSeries> scatter;
    std::vector<SpreadSlice> spreads;
    std::vector<AccuracySlice> accuracies;
};

namespace detail {

inline std::optional<double> try_pearson(const std::vector<double>& x,
                                         const std::vector<double>& y) {
    try {
        return pearson(x, y);
    } catch (const StatsError&) {
        return std::nullopt;
    }
}

} // namespace detail

// Joins aggregate metric scores (empty run_index) with human consensus on
// (design_id, principle) and correlates overall plus per perturbation
// level. Slices that cannot be joined into at least two pairs stay
// undefined.
inline std::vector<CorrelationSlice> correlate_by_level(
    const std::vector<ScoreRow>& scores, const std::vector<ConsensusScore>& human,
    const std::vector<ManifestRow>& manifest, std::vector<ScatterSeries>* scatter_out = nullptr) {
    std::map<std::string, std::string> level_of;
    for (const ManifestRow& m : manifest) level_of[m.design_id] = m.level;

    std::map<std::pair<std::string, int>, double> human_mean;
    for (const ConsensusScore& c : human) {
        human_mean[{c.design_id, static_cast<int>(c.principle)}] = c.mean;
    }

    // (principle, method) -> level -> paired series
    struct Series {
        std::vector<double> metric;
        std::vector<double> humans;
    };
    std::map<std::pair<int, int>, std::map<std::string, Series>> joined;
    std::set<std::pair<int, int>> combos;
    for (const ScoreRow& s : scores) {
        if (s.run_index.has_value()) continue; // aggregates only
        combos.insert({static_cast<int>(s.principle), static_cast<int>(s.method)});
        auto hit = human_mean.find({s.design_id, static_cast<int>(s.principle)});
        if (hit == human_mean.end()) continue;
        auto& per_level = joined[{static_cast<int>(s.principle), static_cast<int>(s.method)}];
        per_level["overall"].metric.push_back(s.value);
        per_level["overall"].humans.push_back(hit->second);
        if (auto lv = level_of.find(s.design_id); lv != level_of.end()) {
            per_level[lv->second].metric.push_back(s.value);
            per_level[lv->second].humans.push_back(hit->second);
        }
    }

    std::vector<CorrelationSlice> out;
    for (const auto& combo : combos) {
        const auto it = joined.find(combo);
        for (const std::string& level : report_levels()) {
            CorrelationSlice slice;
            slice.principle = static_cast<Principle>(combo.first);
            slice.method = static_cast<ScoreMethod>(combo.second);
            slice.level = level;
            if (it != joined.end()) {
                auto sit = it->second.find(level);
                if (sit != it->second.end()) {
                    slice.n = static_cast<int>(sit->second.metric.size());
                    slice.r = detail::try_pearson(sit->second.humans, sit->second.metric);
                }
            }
            out.push_back(std::move(slice));
        }
        if (scatter_out && it != joined.end()) {
            auto sit = it->second.find("overall");
            if (sit != it->second.end()) {
                ScatterSeries series;
                series.principle = static_cast<Principle>(combo.first);
                series.method = static_cast<ScoreMethod>(combo.second);
                for (std::size_t i = 0; i < sit->second.metric.size(); ++i) {
                    series.points.emplace_back(sit->second.humans[i], sit->second.metric[i]);
                }
                scatter_out->push_back(std::move(series));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pairwise accuracy
// ---------------------------------------------------------------------------

struct PairVerdictRow {
    std::string design_a;
    std::string design_b;
    Principle principle = Principle::alignment;
    PairChoice final_choice = PairChoice::both;
};

// Compares two scores of the same principle; ties within the margin are
// honest "both" answers.
inline PairChoice heuristic_judge(double score_a, double score_b, double margin = 0.01) {
    if (score_a - score_b > margin) return PairChoice::a;
    if (score_b - score_a > margin) return PairChoice::b;
    return PairChoice::both;
}

// Accuracy per (principle, level) plus an "overall" row per principle.
// "both" counts as correct only when the truth is "both". Verdicts whose
// truth or level cannot be resolved are excluded and tallied.
inline std::vector<AccuracySlice> pairwise_accuracy(
    const std::vector<PairVerdictRow>& verdicts,
    const std::function<std::optional<PairChoice>(const PairVerdictRow&)>& truth_of,
    const std::function<std::optional<std::string>(const std::string& design_id)>& level_of,
    const std::string& source = "llm") {
    struct Cell {
        int total = 0, correct = 0, excluded = 0;
    };
    std::map<std::pair<int, std::string>, Cell> cells;
    auto bump = [&](Principle p, const std::string& level, bool ok, bool excluded) {
        Cell& c = cells[{static_cast<int>(p), level}];
        if (excluded) {
            ++c.excluded;
        } else {
            ++c.total;
            if (ok) ++c.correct;
        }
    };

    for (const PairVerdictRow& v : verdicts) {
        const std::optional<PairChoice> truth = truth_of(v);
        const std::optional<std::string> level = level_of(v.design_b);
        const bool excluded = !truth.has_value() || !level.has_value();
        const bool ok = !excluded && v.final_choice == *truth;
        bump(v.principle, "overall", ok, excluded);
        bump(v.principle, level.value_or("unknown"), ok, excluded);
    }

    std::vector<AccuracySlice> out;
    for (const auto& [key, cell] : cells) {
        AccuracySlice s;
        s.principle = static_cast<Principle>(key.first);
        s.source = source;
        s.level = key.second;
        s.total = cell.total;
        s.correct = cell.correct;
        s.excluded = cell.excluded;
        if (cell.total > 0) {
            s.accuracy = static_cast<double>(cell.correct) / cell.total;
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const AccuracySlice& a, const AccuracySlice& b) {
        if (a.principle != b.principle) return a.principle < b.principle;
        return a.level < b.level;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Report emission (CSV canonical; charts optional, see charts.hpp)
// ---------------------------------------------------------------------------

inline std::string write_correlations_csv(const std::vector<CorrelationSlice>& slices) {
    std::string out = "principle,method,level,n,r\n";
    for (const CorrelationSlice& s : slices) {
        out += csv::join_row({to_string(s.principle), to_string(s.method), s.level,
                              std::to_string(s.n),
                              s.r ? format_double(*s.r) : "undefined"});
    }
    return out;
}

inline std::string write_spread_csv(const std::vector<SpreadSlice>& slices) {
    std::string out = "principle,source,n,min,q1,median,q3,max\n";
    for (const SpreadSlice& s : slices) {
        out += csv::join_row({to_string(s.principle), s.source, std::to_string(s.summary.n),
                              format_double(s.summary.min), format_double(s.summary.q1),
                              format_double(s.summary.median), format_double(s.summary.q3),
                              format_double(s.summary.max)});
    }
    return out;
}

inline std::string write_pairwise_csv(const std::vector<AccuracySlice>& slices) {
    std::string out = "principle,source,level,total,correct,excluded,accuracy\n";
    for (const AccuracySlice& s : slices) {
        out += csv::join_row({to_string(s.principle), s.source, s.level,
                              std::to_string(s.total), std::to_string(s.correct),
                              std::to_string(s.excluded),
                              s.accuracy ? format_double(*s.accuracy) : "undefined"});
    }
    return out;
}

} // namespace deval
