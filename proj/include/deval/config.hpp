#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "deval/errors.hpp"
#include "deval/heuristics.hpp"
#include "deval/llm/judge.hpp"
#include "deval/perturb.hpp"

namespace deval {

// Everything tunable in one place. The JSON config file mirrors this
// structure section by section; unknown keys are rejected so typos cannot
// silently fall back to defaults.
struct ToolConfig {
    HeuristicConfig heuristics;
    PerturbConfig perturb;
    LlmConfig llm;
    double pairwise_tie_margin = 0.01; // heuristic judge tie band, score units
};

namespace detail {

class SectionReader {
public:
    SectionReader(const nlohmann::json& j, std::string path)
        : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ValidationError(path_ + ": must be an object");
    }

    ~SectionReader() = default;

    void number(const char* key, double& out) {
        mark(key);
        if (auto it = j_.find(key); it != j_.end()) {
            if (!it->is_number()) throw ValidationError(path_ + "." + key + ": must be a number");
            out = it->get<double>();
        }
    }

    void integer(const char* key, int& out) {
        mark(key);
        if (auto it = j_.find(key); it != j_.end()) {
            if (!it->is_number_integer()) {
                throw ValidationError(path_ + "." + key + ": must be an integer");
            }
            out = it->get<int>();
        }
    }

    void integer(const char* key, long long& out) {
        mark(key);
        if (auto it = j_.find(key); it != j_.end()) {
            if (!it->is_number_integer()) {
                throw ValidationError(path_ + "." + key + ": must be an integer");
            }
            out = it->get<long long>();
        }
    }

    void boolean(const char* key, bool& out) {
        mark(key);
        if (auto it = j_.find(key); it != j_.end()) {
            if (!it->is_boolean()) throw ValidationError(path_ + "." + key + ": must be a boolean");
            out = it->get<bool>();
        }
    }

    void string(const char* key, std::string& out) {
        mark(key);
        if (auto it = j_.find(key); it != j_.end()) {
            if (!it->is_string()) throw ValidationError(path_ + "." + key + ": must be a string");
            out = it->get<std::string>();
        }
    }

    void band(const char* key, PerturbConfig::Band& out) {
        mark(key);
        if (auto it = j_.find(key); it != j_.end()) {
            if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
                !(*it)[1].is_number()) {
                throw ValidationError(path_ + "." + key + ": must be [lo, hi]");
            }
            out.lo = (*it)[0].get<double>();
            out.hi = (*it)[1].get<double>();
            if (out.lo > out.hi) throw ValidationError(path_ + "." + key + ": lo > hi");
        }
    }

    const nlohmann::json* section(const char* key) {
        mark(key);
        if (auto it = j_.find(key); it != j_.end()) return &*it;
        return nullptr;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            (void)value;
            if (known_.find(key) == known_.end()) {
                throw ValidationError(path_ + ": unknown key \"" + key + "\"");
            }
        }
    }

private:
    void mark(const char* key) { known_.insert(key); }

    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> known_;
};

} // namespace detail

inline ToolConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    ToolConfig cfg;
    detail::SectionReader root(j, "config");
    if (const nlohmann::json* h = root.section("heuristics")) {
        detail::SectionReader hr(*h, "heuristics");
        if (const nlohmann::json* a = hr.section("alignment")) {
            detail::SectionReader r(*a, "heuristics.alignment");
            r.number("tau_exact_factor", cfg.heuristics.alignment.tau_exact_factor);
            r.number("tau_near_factor", cfg.heuristics.alignment.tau_near_factor);
            r.number("w_grouped", cfg.heuristics.alignment.w_grouped);
            r.number("w_near", cfg.heuristics.alignment.w_near);
            r.number("w_extent", cfg.heuristics.alignment.w_extent);
            r.finish();
        }
        if (const nlohmann::json* o = hr.section("overlap")) {
            detail::SectionReader r(*o, "heuristics.overlap");
            r.number("w_pair", cfg.heuristics.overlap.w_pair);
            r.number("w_contrast", cfg.heuristics.overlap.w_contrast);
            r.number("w_oob", cfg.heuristics.overlap.w_oob);
            r.number("contrast_target", cfg.heuristics.overlap.contrast_target);
            r.finish();
        }
        if (const nlohmann::json* w = hr.section("whitespace")) {
            detail::SectionReader r(*w, "heuristics.whitespace");
            r.number("w_ratio", cfg.heuristics.whitespace.w_ratio);
            r.number("w_trapped", cfg.heuristics.whitespace.w_trapped);
            r.number("w_proximity", cfg.heuristics.whitespace.w_proximity);
            r.number("w_uniformity", cfg.heuristics.whitespace.w_uniformity);
            r.number("w_margin", cfg.heuristics.whitespace.w_margin);
            r.number("theta_empty", cfg.heuristics.whitespace.theta_empty);
            r.number("d_ref_factor", cfg.heuristics.whitespace.d_ref_factor);
            r.number("m_ref_factor", cfg.heuristics.whitespace.m_ref_factor);
            r.finish();
        }
        hr.finish();
    }
    if (const nlohmann::json* p = root.section("perturb")) {
        detail::SectionReader r(*p, "perturb");
        r.band("x_shift_small", cfg.perturb.x_shift_small);
        r.band("x_shift_medium", cfg.perturb.x_shift_medium);
        r.band("x_shift_large", cfg.perturb.x_shift_large);
        r.band("font_scale_small", cfg.perturb.font_scale_small);
        r.band("font_scale_medium", cfg.perturb.font_scale_medium);
        r.band("font_scale_large", cfg.perturb.font_scale_large);
        r.boolean("font_allow_shrink", cfg.perturb.font_allow_shrink);
        r.finish();
    }
    if (const nlohmann::json* l = root.section("llm")) {
        detail::SectionReader r(*l, "llm");
        r.string("endpoint", cfg.llm.endpoint);
        r.string("model", cfg.llm.model);
        r.number("temperature", cfg.llm.temperature);
        r.integer("runs_per_item", cfg.llm.runs_per_item);
        r.integer("max_retries", cfg.llm.max_retries);
        r.integer("max_tokens", cfg.llm.max_tokens);
        r.integer("timeout_seconds", cfg.llm.timeout_seconds);
        r.string("api_key_env", cfg.llm.api_key_env);
        r.integer("parallelism", cfg.llm.parallelism);
        r.number("requests_per_second", cfg.llm.requests_per_second);
        r.integer("request_budget", cfg.llm.request_budget);
        r.boolean("randomize_pair_order", cfg.llm.randomize_pair_order);
        r.finish();
    }
    root.number("pairwise_tie_margin", cfg.pairwise_tie_margin);
    root.finish();

    validate(cfg.heuristics);
    validate(cfg.llm);
    return cfg;
}

// Snapshot for run manifests: the complete effective configuration.
inline nlohmann::json config_to_json(const ToolConfig& cfg) {
    auto band = [](const PerturbConfig::Band& b) {
        return nlohmann::json::array({b.lo, b.hi});
    };
    return nlohmann::json{
        {"heuristics",
         {{"alignment",
           {{"tau_exact_factor", cfg.heuristics.alignment.tau_exact_factor},
            {"tau_near_factor", cfg.heuristics.alignment.tau_near_factor},
            {"w_grouped", cfg.heuristics.alignment.w_grouped},
            {"w_near", cfg.heuristics.alignment.w_near},
            {"w_extent", cfg.heuristics.alignment.w_extent}}},
          {"overlap",
           {{"w_pair", cfg.heuristics.overlap.w_pair},
            {"w_contrast", cfg.heuristics.overlap.w_contrast},
            {"w_oob", cfg.heuristics.overlap.w_oob},
            {"contrast_target", cfg.heuristics.overlap.contrast_target}}},
          {"whitespace",
           {{"w_ratio", cfg.heuristics.whitespace.w_ratio},
            {"w_trapped", cfg.heuristics.whitespace.w_trapped},
            {"w_proximity", cfg.heuristics.whitespace.w_proximity},
            {"w_uniformity", cfg.heuristics.whitespace.w_uniformity},
            {"w_margin", cfg.heuristics.whitespace.w_margin},
            {"theta_empty", cfg.heuristics.whitespace.theta_empty},
            {"d_ref_factor", cfg.heuristics.whitespace.d_ref_factor},
            {"m_ref_factor", cfg.heuristics.whitespace.m_ref_factor}}}}},
        {"perturb",
         {{"x_shift_small", band(cfg.perturb.x_shift_small)},
          {"x_shift_medium", band(cfg.perturb.x_shift_medium)},
          {"x_shift_large", band(cfg.perturb.x_shift_large)},
          {"font_scale_small", band(cfg.perturb.font_scale_small)},
          {"font_scale_medium", band(cfg.perturb.font_scale_medium)},
          {"font_scale_large", band(cfg.perturb.font_scale_large)},
          {"font_allow_shrink", cfg.perturb.font_allow_shrink}}},
        {"llm",
         {{"endpoint", cfg.llm.endpoint},
          {"model", cfg.llm.model},
          {"temperature", cfg.llm.temperature},
          {"runs_per_item", cfg.llm.runs_per_item},
          {"max_retries", cfg.llm.max_retries},
          {"max_tokens", cfg.llm.max_tokens},
          {"timeout_seconds", cfg.llm.timeout_seconds},
          {"api_key_env", cfg.llm.api_key_env},
          {"parallelism", cfg.llm.parallelism},
          {"requests_per_second", cfg.llm.requests_per_second},
          {"request_budget", cfg.llm.request_budget},
          {"randomize_pair_order", cfg.llm.randomize_pair_order}}},
        {"pairwise_tie_margin", cfg.pairwise_tie_margin}};
}

} // namespace deval
