#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deval/annotations.hpp"
#include "deval/errors.hpp"
#include "deval/heuristics.hpp"
#include "deval/llm/prompts.hpp"
#include "deval/llm/provider.hpp"

namespace deval {

struct LlmConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    double temperature = 1.0;
    int runs_per_item = 5;
    int max_retries = 2; // extra attempts per run on transport/parse failure
    int max_tokens = 300;
    int timeout_seconds = 120;
    std::string api_key_env = "OPENAI_API_KEY";
    int parallelism = 2;
    double requests_per_second = 0.0; // 0 disables rate limiting
    long long request_budget = -1;    // -1 means unlimited
    bool randomize_pair_order = true;
};

inline void validate(const LlmConfig& cfg) {
    if (cfg.runs_per_item < 1) throw ValidationError("llm.runs_per_item: must be >= 1");
    if (cfg.temperature < 0.0) throw ValidationError("llm.temperature: must be >= 0");
    if (cfg.max_retries < 0) throw ValidationError("llm.max_retries: must be >= 0");
    if (cfg.parallelism < 1) throw ValidationError("llm.parallelism: must be >= 1");
}

struct AbsoluteVerdict {
    int score = 0; // 1..10, enforced on parse
    std::string explanation;
    std::string raw;
    int run_index = 0; // 1-based
};

struct PairwiseVerdict {
    PairChoice choice = PairChoice::both;
    std::string explanation;
    std::string raw;
    int run_index = 0;
};

// ---------------------------------------------------------------------------
// Clocks. Live runs stamp transcripts with wall time; offline runs use a
// logical clock so reruns produce identical bytes.
// ---------------------------------------------------------------------------

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::string now() = 0;
};

class SystemClock : public Clock {
public:
    std::string now() override {
        const auto t = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(t);
        std::tm tm{};
        gmtime_r(&tt, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }
};

class LogicalClock : public Clock {
public:
    std::string now() override {
        std::lock_guard<std::mutex> lock(mutex_);
        char buf[32];
        std::snprintf(buf, sizeof buf, "1970-01-01T00:00:00Z+%06llu",
                      static_cast<unsigned long long>(ticks_++));
        return buf;
    }

private:
    std::mutex mutex_;
    std::uint64_t ticks_ = 0;
};

// ---------------------------------------------------------------------------
// Transcripts: every attempt, successful or not, becomes one entry.
// ---------------------------------------------------------------------------

struct TranscriptEntry {
    std::string item;      // design id or "a|b" pair key
    std::string principle;
    int run = 0;     // 1-based run index
    int attempt = 0; // 1-based attempt within the run
    std::string timestamp;
    std::string request_digest;
    nlohmann::json request;
    std::string status; // ok | http_error | parse_error | rejected
    std::string response;
    std::string error;

    nlohmann::json to_json() const {
        return nlohmann::json{{"item", item},
                              {"principle", principle},
                              {"run", run},
                              {"attempt", attempt},
                              {"timestamp", timestamp},
                              {"request_digest", request_digest},
                              {"request", request},
                              {"status", status},
                              {"response", response},
                              {"error", error}};
    }
};

inline std::string write_transcript_jsonl(const std::vector<TranscriptEntry>& entries) {
    std::string out;
    for (const TranscriptEntry& e : entries) {
        out += e.to_json().dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Request building
// ---------------------------------------------------------------------------

inline std::string base64_encode(const std::string& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                                static_cast<unsigned char>(bytes[i + 2]);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += "=";
    }
    return out;
}

inline std::string png_data_url(const std::string& png_bytes) {
    return "data:image/png;base64," + base64_encode(png_bytes);
}

// Splits a prompt at its [image] slots and interleaves image attachments,
// producing chat-completions message content parts.
inline nlohmann::json prompt_to_content_parts(const std::string& prompt,
                                              const std::vector<std::string>& png_images) {
    nlohmann::json parts = nlohmann::json::array();
    std::size_t pos = 0;
    std::size_t image_index = 0;
    while (true) {
        const std::size_t slot = prompt.find(kImageSlot, pos);
        const std::string text =
            prompt.substr(pos, slot == std::string::npos ? std::string::npos : slot - pos);
        if (!text.empty()) {
            parts.push_back({{"type", "text"}, {"text", text}});
        }
        if (slot == std::string::npos) break;
        if (image_index >= png_images.size()) {
            throw LlmError("prompt has more [image] slots than provided images");
        }
        parts.push_back(
            {{"type", "image_url"},
             {"image_url", {{"url", png_data_url(png_images[image_index])}}}});
        ++image_index;
        pos = slot + std::string(kImageSlot).size();
    }
    if (image_index != png_images.size()) {
        throw LlmError("prompt has fewer [image] slots than provided images");
    }
    return parts;
}

inline nlohmann::json build_chat_request(const LlmConfig& cfg, const std::string& prompt,
                                         const std::vector<std::string>& png_images) {
    return nlohmann::json{
        {"model", cfg.model},
        {"temperature", cfg.temperature},
        {"max_tokens", cfg.max_tokens},
        {"messages",
         nlohmann::json::array(
             {{{"role", "user"}, {"content", prompt_to_content_parts(prompt, png_images)}}})}};
}

inline nlohmann::json build_absolute_request(const LlmConfig& cfg, Principle p,
                                             const std::string& png) {
    if (png.empty()) throw ValidationError("evaluate: empty image");
    return build_chat_request(cfg, build_absolute_prompt(p), {png});
}

inline nlohmann::json build_pairwise_request(const LlmConfig& cfg, Principle p,
                                             const std::string& png_a,
                                             const std::string& png_b) {
    if (png_a.empty() || png_b.empty()) throw ValidationError("evaluate: empty image");
    return build_chat_request(cfg, build_pairwise_prompt(p), {png_a, png_b});
}

// ---------------------------------------------------------------------------
// Response parsing. Code fences, surrounding whitespace and trailing prose
// are tolerated; field values never get repaired. Anything else is a
// failed run.
// ---------------------------------------------------------------------------

inline std::optional<nlohmann::json> extract_json_object(const std::string& text) {
    const std::size_t open = text.find('{');
    if (open == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) {
                try {
                    return nlohmann::json::parse(text.substr(open, i - open + 1));
                } catch (const nlohmann::json::exception&) {
                    return std::nullopt;
                }
            }
        }
    }
    return std::nullopt;
}

struct ParsedAbsolute {
    std::optional<AbsoluteVerdict> verdict;
    std::string reject_reason;
    bool schema_violation = false; // JSON came through but broke the contract
};

inline ParsedAbsolute parse_absolute_response(const std::string& content) {
    ParsedAbsolute out;
    const std::optional<nlohmann::json> j = extract_json_object(content);
    if (!j) {
        out.reject_reason = "no JSON object in response";
        return out;
    }
    out.schema_violation = true;
    auto it = j->find("score");
    if (it == j->end()) {
        out.reject_reason = "missing \"score\" field";
        return out;
    }
    if (!it->is_number_integer()) {
        out.reject_reason = "\"score\" is not an integer";
        return out;
    }
    const int score = it->get<int>();
    if (score < 1 || score > 10) {
        out.reject_reason = "score " + std::to_string(score) + " outside [1, 10]";
        return out;
    }
    AbsoluteVerdict v;
    v.score = score;
    v.explanation = j->value("explanation", "");
    v.raw = content;
    out.verdict = v;
    out.schema_violation = false;
    return out;
}

struct ParsedPairwise {
    std::optional<PairwiseVerdict> verdict;
    std::string reject_reason;
    bool schema_violation = false;
};

inline ParsedPairwise parse_pairwise_response(const std::string& content) {
    ParsedPairwise out;
    const std::optional<nlohmann::json> j = extract_json_object(content);
    if (!j) {
        out.reject_reason = "no JSON object in response";
        return out;
    }
    out.schema_violation = true;
    auto it = j->find("better_design");
    if (it == j->end() || !it->is_string()) {
        out.reject_reason = "missing \"better_design\" field";
        return out;
    }
    std::string s = it->get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    PairwiseVerdict v;
    if (s == "a") {
        v.choice = PairChoice::a;
    } else if (s == "b") {
        v.choice = PairChoice::b;
    } else if (s == "both") {
        v.choice = PairChoice::both;
    } else {
        out.reject_reason = "better_design \"" + it->get<std::string>() + "\" not in {a, b, both}";
        return out;
    }
    v.explanation = j->value("explanation", "");
    v.raw = content;
    out.verdict = v;
    out.schema_violation = false;
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation: mean of repeated scores; plurality vote over choices with
// ties collapsing to "both" (a tie is exactly "not sure").
// ---------------------------------------------------------------------------

inline double mean_score(const std::vector<AbsoluteVerdict>& verdicts) {
    if (verdicts.empty()) throw LlmError("mean_score: no verdicts");
    double s = 0.0;
    for (const AbsoluteVerdict& v : verdicts) s += v.score;
    return s / static_cast<double>(verdicts.size());
}

inline PairChoice vote(const std::vector<PairChoice>& choices) {
    if (choices.empty()) throw LlmError("vote: no verdicts");
    int na = 0, nb = 0, nboth = 0;
    for (PairChoice c : choices) {
        if (c == PairChoice::a) ++na;
        else if (c == PairChoice::b) ++nb;
        else ++nboth;
    }
    const int top = std::max({na, nb, nboth});
    const bool a_top = na == top, b_top = nb == top, both_top = nboth == top;
    if (a_top + b_top + both_top > 1) return PairChoice::both; // any tie
    if (a_top) return PairChoice::a;
    if (b_top) return PairChoice::b;
    return PairChoice::both;
}

// ---------------------------------------------------------------------------
// Evaluation: runs_per_item independent requests, each retried on failure,
// every attempt transcripted.
// ---------------------------------------------------------------------------

// Called before every provider request; wired to rate limiting and the
// request budget by the batch runner. Throws BudgetError to stop cleanly.
using RequestGate = std::function<void()>;

struct AbsoluteItemResult {
    std::optional<double> mean; // empty when every run failed
    std::vector<AbsoluteVerdict> verdicts;
    int failed_runs = 0;
};

namespace detail {

inline ChatResult attempt_request(ChatProvider& provider, const nlohmann::json& request,
                                  const RequestGate& gate) {
    if (gate) gate();
    return provider.complete(request);
}

} // namespace detail

inline AbsoluteItemResult evaluate_absolute(const std::string& png, Principle principle,
                                            const LlmConfig& cfg, ChatProvider& provider,
                                            Clock& clock,
                                            std::vector<TranscriptEntry>& transcript,
                                            const std::string& item_id,
                                            const RequestGate& gate = {}) {
    validate(cfg);
    const nlohmann::json request = build_absolute_request(cfg, principle, png);
    const std::string digest = request_digest(request);

    AbsoluteItemResult result;
    for (int run = 1; run <= cfg.runs_per_item; ++run) {
        bool accepted = false;
        for (int attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
            const ChatResult res = detail::attempt_request(provider, request, gate);
            TranscriptEntry entry;
            entry.item = item_id;
            entry.principle = to_string(principle);
            entry.run = run;
            entry.attempt = attempt;
            entry.timestamp = clock.now();
            entry.request_digest = digest;
            entry.request = request;
            entry.response = res.content;
            if (!res.ok) {
                entry.status = "http_error";
                entry.error = res.error;
                transcript.push_back(std::move(entry));
                continue;
            }
            const ParsedAbsolute parsed = parse_absolute_response(res.content);
            if (!parsed.verdict) {
                entry.status = parsed.schema_violation ? "rejected" : "parse_error";
                entry.error = parsed.reject_reason;
                transcript.push_back(std::move(entry));
                continue;
            }
            entry.status = "ok";
            transcript.push_back(std::move(entry));
            AbsoluteVerdict v = *parsed.verdict;
            v.run_index = run;
            result.verdicts.push_back(std::move(v));
            accepted = true;
            break;
        }
        if (!accepted) ++result.failed_runs;
    }
    if (!result.verdicts.empty()) result.mean = mean_score(result.verdicts);
    return result;
}

struct PairwiseItemResult {
    std::optional<PairChoice> final_choice; // empty when every run failed
    std::vector<PairwiseVerdict> verdicts;
    int failed_runs = 0;
};

// Evaluates (png_a, png_b) as presented; the caller handles order
// randomization and unflips the verdicts it gets back.
inline PairwiseItemResult evaluate_pairwise(const std::string& png_a,
                                            const std::string& png_b, Principle principle,
                                            const LlmConfig& cfg, ChatProvider& provider,
                                            Clock& clock,
                                            std::vector<TranscriptEntry>& transcript,
                                            const std::string& item_id,
                                            const RequestGate& gate = {}) {
    validate(cfg);
    const nlohmann::json request = build_pairwise_request(cfg, principle, png_a, png_b);
    const std::string digest = request_digest(request);

    PairwiseItemResult result;
    for (int run = 1; run <= cfg.runs_per_item; ++run) {
        bool accepted = false;
        for (int attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
            const ChatResult res = detail::attempt_request(provider, request, gate);
            TranscriptEntry entry;
            entry.item = item_id;
            entry.principle = to_string(principle);
            entry.run = run;
            entry.attempt = attempt;
            entry.timestamp = clock.now();
            entry.request_digest = digest;
            entry.request = request;
            entry.response = res.content;
            if (!res.ok) {
                entry.status = "http_error";
                entry.error = res.error;
                transcript.push_back(std::move(entry));
                continue;
            }
            const ParsedPairwise parsed = parse_pairwise_response(res.content);
            if (!parsed.verdict) {
                entry.status = parsed.schema_violation ? "rejected" : "parse_error";
                entry.error = parsed.reject_reason;
                transcript.push_back(std::move(entry));
                continue;
            }
            entry.status = "ok";
            transcript.push_back(std::move(entry));
            PairwiseVerdict v = *parsed.verdict;
            v.run_index = run;
            result.verdicts.push_back(std::move(v));
            accepted = true;
            break;
        }
        if (!accepted) ++result.failed_runs;
    }
    if (!result.verdicts.empty()) {
        std::vector<PairChoice> choices;
        choices.reserve(result.verdicts.size());
        for (const PairwiseVerdict& v : result.verdicts) choices.push_back(v.choice);
        result.final_choice = vote(choices);
    }
    return result;
}

} // namespace deval
