#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "deval/csv.hpp"
#include "deval/errors.hpp"
#include "deval/heuristics.hpp"
#include "deval/stats.hpp"

namespace deval {

struct HumanRating {
    std::string design_id;
    Principle principle = Principle::alignment;
    std::string rater_id;
    int score = 0; // 1..10
};

struct ConsensusScore {
    std::string design_id;
    Principle principle = Principle::alignment;
    double mean = 0.0;
    double stddev = 0.0; // population stddev across raters
    int n = 0;
};

enum class PairChoice { a, b, both };

inline std::string to_string(PairChoice c) {
    switch (c) {
        case PairChoice::a: return "a";
        case PairChoice::b: return "b";
        default: return "both";
    }
}

inline PairChoice pair_choice_from_string(const std::string& s) {
    if (s == "a") return PairChoice::a;
    if (s == "b") return PairChoice::b;
    if (s == "both") return PairChoice::both;
    throw ValidationError("choice must be a, b or both, got \"" + s + "\"");
}

struct PairwiseRating {
    std::string design_a;
    std::string design_b;
    Principle principle = Principle::alignment;
    std::string rater_id;
    PairChoice choice = PairChoice::both;
};

// Ratings CSV: header design_id,principle,rater_id,score. Errors carry the
// 1-based row number of the offending line.
inline std::vector<HumanRating> load_ratings(const std::string& text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw ValidationError("ratings: empty file");
    const std::vector<std::string> header = {"design_id", "principle", "rater_id", "score"};
    if (rows[0] != header) {
        throw ValidationError("ratings row 1: header must be design_id,principle,rater_id,score");
    }
    std::vector<HumanRating> out;
    std::set<std::tuple<std::string, Principle, std::string>> seen;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::string where = "ratings row " + std::to_string(i + 1);
        const auto& r = rows[i];
        if (r.size() != 4) throw ValidationError(where + ": expected 4 fields");
        HumanRating h;
        h.design_id = r[0];
        try {
            h.principle = principle_from_string(r[1]);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        h.rater_id = r[2];
        try {
            std::size_t used = 0;
            h.score = std::stoi(r[3], &used);
            if (used != r[3].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError(where + ": score must be an integer, got \"" + r[3] + "\"");
        }
        if (h.score < 1 || h.score > 10) {
            throw ValidationError(where + ": score must be in [1, 10], got " + r[3]);
        }
        if (!seen.insert({h.design_id, h.principle, h.rater_id}).second) {
            throw ValidationError(where + ": duplicate rating for (" + h.design_id + ", " +
                                  to_string(h.principle) + ", " + h.rater_id + ")");
        }
        out.push_back(std::move(h));
    }
    return out;
}

// Pairwise human file: design_a,design_b,principle,rater_id,choice.
inline std::vector<PairwiseRating> load_pairwise_ratings(const std::string& text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw ValidationError("pairwise ratings: empty file");
    const std::vector<std::string> header = {"design_a", "design_b", "principle",
                                             "rater_id", "choice"};
    if (rows[0] != header) {
        throw ValidationError(
            "pairwise ratings row 1: header must be design_a,design_b,principle,rater_id,choice");
    }
    std::vector<PairwiseRating> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::string where = "pairwise ratings row " + std::to_string(i + 1);
        const auto& r = rows[i];
        if (r.size() != 5) throw ValidationError(where + ": expected 5 fields");
        PairwiseRating p;
        p.design_a = r[0];
        p.design_b = r[1];
        try {
            p.principle = principle_from_string(r[2]);
            p.choice = pair_choice_from_string(r[4]);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        p.rater_id = r[3];
        out.push_back(std::move(p));
    }
    return out;
}

// Mean and population stddev per (design, principle); output ordered by
// (design_id, principle) and independent of input order.
inline std::vector<ConsensusScore> consensus(const std::vector<HumanRating>& ratings) {
    if (ratings.empty()) throw ValidationError("consensus: no ratings");
    std::map<std::pair<std::string, int>, std::vector<double>> groups;
    for (const HumanRating& r : ratings) {
        groups[{r.design_id, static_cast<int>(r.principle)}].push_back(
            static_cast<double>(r.score));
    }
    std::vector<ConsensusScore> out;
    out.reserve(groups.size());
    for (const auto& [key, values] : groups) {
        ConsensusScore c;
        c.design_id = key.first;
        c.principle = static_cast<Principle>(key.second);
        c.mean = mean(values);
        c.stddev = population_stddev(values);
        c.n = static_cast<int>(values.size());
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace deval
