#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deval/csv.hpp"
#include "deval/errors.hpp"
#include "deval/heuristics.hpp"
#include "deval/perturb.hpp"

namespace deval {

inline constexpr const char* kLevelOriginal = "original";

// One manifest line. Originals carry type = level = "original" and seed 0.
struct ManifestRow {
    std::string design_id;
    std::string original_id;
    std::string type;
    std::string level;
    std::uint64_t seed = 0;
    std::string path;

    bool is_original() const { return type == kLevelOriginal; }
};

inline std::string write_manifest(const std::vector<ManifestRow>& rows) {
    std::string out = "design_id,original_id,type,level,seed,path\n";
    for (const ManifestRow& r : rows) {
        out += csv::join_row({r.design_id, r.original_id, r.type, r.level,
                              std::to_string(r.seed), r.path});
    }
    return out;
}

inline std::vector<ManifestRow> load_manifest(const std::string& text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows[0] != std::vector<std::string>{"design_id", "original_id",
                                                            "type", "level", "seed", "path"}) {
        throw ValidationError("manifest: bad or missing header");
    }
    std::vector<ManifestRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 6) {
            throw ValidationError("manifest row " + std::to_string(i + 1) +
                                  ": expected 6 fields");
        }
        ManifestRow m;
        m.design_id = r[0];
        m.original_id = r[1];
        m.type = r[2];
        m.level = r[3];
        try {
            m.seed = std::stoull(r[4]);
        } catch (const std::exception&) {
            throw ValidationError("manifest row " + std::to_string(i + 1) + ": bad seed");
        }
        m.path = r[5];
        out.push_back(std::move(m));
    }
    return out;
}

// Perturbation records travel as line-delimited JSON next to the manifest.
inline nlohmann::json record_to_json(const PerturbationRecord& rec) {
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& [id, d] : rec.deltas) {
        deltas.push_back({{"element", id}, {"delta", d}});
    }
    return nlohmann::json{{"original_id", rec.original_id},
                          {"variant_id", rec.variant_id},
                          {"type", to_string(rec.type)},
                          {"level", to_string(rec.level)},
                          {"seed", rec.seed},
                          {"noop", rec.noop},
                          {"deltas", deltas}};
}

inline PerturbationRecord record_from_json(const nlohmann::json& j) {
    PerturbationRecord rec;
    rec.original_id = j.at("original_id").get<std::string>();
    rec.variant_id = j.at("variant_id").get<std::string>();
    rec.type = perturb_type_from_string(j.at("type").get<std::string>());
    rec.level = perturb_level_from_string(j.at("level").get<std::string>());
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.noop = j.at("noop").get<bool>();
    for (const auto& d : j.at("deltas")) {
        rec.deltas.emplace_back(d.at("element").get<std::string>(),
                                d.at("delta").get<double>());
    }
    return rec;
}

inline std::string write_records_jsonl(const std::vector<PerturbationRecord>& recs) {
    std::string out;
    for (const PerturbationRecord& r : recs) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

inline std::vector<PerturbationRecord> load_records_jsonl(const std::string& text) {
    std::vector<PerturbationRecord> out;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shared scores CSV schema: design_id,principle,method,run_index,value.
// run_index is empty for deterministic rows (heuristic) and for per-item
// aggregates of repeated LLM runs.
// ---------------------------------------------------------------------------

struct ScoreRow {
    std::string design_id;
    Principle principle = Principle::alignment;
    ScoreMethod method = ScoreMethod::heuristic;
    std::optional<int> run_index;
    double value = 0.0;
};

inline std::string write_scores_csv(const std::vector<ScoreRow>& rows) {
    std::string out = "design_id,principle,method,run_index,value\n";
    for (const ScoreRow& r : rows) {
        out += csv::join_row({r.design_id, to_string(r.principle), to_string(r.method),
                              r.run_index ? std::to_string(*r.run_index) : "",
                              format_double(r.value)});
    }
    return out;
}

inline std::vector<ScoreRow> load_scores_csv(const std::string& text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows[0] != std::vector<std::string>{"design_id", "principle",
                                                            "method", "run_index", "value"}) {
        throw ValidationError("scores: bad or missing header");
    }
    std::vector<ScoreRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const std::string where = "scores row " + std::to_string(i + 1);
        if (r.size() != 5) throw ValidationError(where + ": expected 5 fields");
        ScoreRow s;
        s.design_id = r[0];
        try {
            s.principle = principle_from_string(r[1]);
            s.method = method_from_string(r[2]);
            if (!r[3].empty()) s.run_index = std::stoi(r[3]);
            s.value = std::stod(r[4]);
        } catch (const std::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace deval
