#include <catch2/catch.hpp>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "deval/csv.hpp"
#include "deval/llm/judge.hpp"
#include "deval/llm/prompts.hpp"
#include "deval/llm/provider.hpp"
#include "deval/llm/runner.hpp"
#include "deval/raster.hpp"
#include "testutil.hpp"

using namespace deval;
using namespace testutil;

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

TEST_CASE("absolute prompts match their golden files byte for byte", "[llm][prompt]") {
    for (Principle p : kAllPrinciples) {
        const std::string golden =
            read_file(golden_dir() / ("prompt_absolute_" + to_string(p) + ".txt"));
        CHECK(build_absolute_prompt(p) == golden);
    }
}

TEST_CASE("pairwise prompts match their golden files byte for byte", "[llm][prompt]") {
    for (Principle p : kAllPrinciples) {
        const std::string golden =
            read_file(golden_dir() / ("prompt_pairwise_" + to_string(p) + ".txt"));
        CHECK(build_pairwise_prompt(p) == golden);
    }
}

TEST_CASE("prompts carry the fixed anchor phrases", "[llm][prompt]") {
    const std::string alignment = build_absolute_prompt(Principle::alignment);
    CHECK(alignment.find("Correct alignment is an important aspect of design") !=
          std::string::npos);
    CHECK(alignment.find("Only respond in JSON format") != std::string::npos);
    CHECK(alignment.find("Grade seriously.") != std::string::npos);
    CHECK(build_absolute_prompt(Principle::overlap)
              .find("Overlapping elements are common in many designs") != std::string::npos);
    CHECK(build_absolute_prompt(Principle::whitespace)
              .find("White space in graphic designs is fundamental for readability") !=
          std::string::npos);
}

TEST_CASE("requests interleave text and image parts at the slots", "[llm][prompt]") {
    LlmConfig cfg;
    const std::string png = encode_png(render(make_doc(8, 8, {})));
    const nlohmann::json abs = build_absolute_request(cfg, Principle::alignment, png);
    const auto& abs_parts = abs.at("messages").at(0).at("content");
    REQUIRE(abs_parts.size() == 2);
    CHECK(abs_parts[0].at("type") == "text");
    CHECK(abs_parts[1].at("type") == "image_url");
    const std::string url = abs_parts[1].at("image_url").at("url").get<std::string>();
    CHECK(url.rfind("data:image/png;base64,", 0) == 0);
    CHECK(abs.at("temperature").get<double>() == 1.0);

    const nlohmann::json pair =
        build_pairwise_request(cfg, Principle::overlap, png, png);
    const auto& pair_parts = pair.at("messages").at(0).at("content");
    // text (a) image text (b) image
    REQUIRE(pair_parts.size() == 4);
    CHECK(pair_parts[0].at("type") == "text");
    CHECK(pair_parts[1].at("type") == "image_url");
    CHECK(pair_parts[2].at("type") == "text");
    CHECK(pair_parts[3].at("type") == "image_url");
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

TEST_CASE("verdict parser tolerates fences and trailing prose", "[llm][parse]") {
    const auto fenced = parse_absolute_response(
        "```json\n{\"score\": 7, \"explanation\": \"solid\"}\n```");
    REQUIRE(fenced.verdict.has_value());
    CHECK(fenced.verdict->score == 7);
    CHECK(fenced.verdict->explanation == "solid");

    const auto prose = parse_absolute_response(
        "{\"score\": 3, \"explanation\": \"weak\"} Hope that helps!");
    REQUIRE(prose.verdict.has_value());
    CHECK(prose.verdict->score == 3);

    const auto nested = parse_absolute_response(
        "  {\"score\": 9, \"explanation\": \"brace } in string\"}");
    REQUIRE(nested.verdict.has_value());
    CHECK(nested.verdict->explanation == "brace } in string");
}

TEST_CASE("out-of-range and malformed scores are rejected, not repaired", "[llm][parse]") {
    CHECK_FALSE(parse_absolute_response("{\"score\": 12}").verdict.has_value());
    CHECK_FALSE(parse_absolute_response("{\"score\": 0}").verdict.has_value());
    CHECK_FALSE(parse_absolute_response("{\"score\": 7.5}").verdict.has_value());
    CHECK_FALSE(parse_absolute_response("{\"score\": \"8\"}").verdict.has_value());
    CHECK_FALSE(parse_absolute_response("no json here").verdict.has_value());
    CHECK(parse_absolute_response("{\"score\": 12}").schema_violation);
    CHECK_FALSE(parse_absolute_response("plain text").schema_violation);
}

TEST_CASE("pairwise choices parse case-insensitively and reject junk", "[llm][parse]") {
    CHECK(parse_pairwise_response("{\"better_design\": \"a\"}").verdict->choice ==
          PairChoice::a);
    CHECK(parse_pairwise_response("{\"better_design\": \"B\"}").verdict->choice ==
          PairChoice::b);
    CHECK(parse_pairwise_response("{\"better_design\": \"both\"}").verdict->choice ==
          PairChoice::both);
    CHECK_FALSE(parse_pairwise_response("{\"better_design\": \"neither\"}").verdict);
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

TEST_CASE("mean of five fixture scores", "[llm][aggregate]") {
    std::vector<AbsoluteVerdict> verdicts;
    for (int score : {7, 8, 9, 7, 9}) verdicts.push_back({score, "", "", 0});
    CHECK(mean_score(verdicts) == Approx(8.0));
}

TEST_CASE("vote follows plurality with both-absorbing ties", "[llm][aggregate]") {
    using C = PairChoice;
    CHECK(vote({C::a, C::a, C::b, C::both, C::a}) == C::a);
    CHECK(vote({C::a, C::a, C::b, C::b, C::both}) == C::both);       // two-way a/b tie
    CHECK(vote({C::both, C::both, C::a, C::b, C::b}) == C::both);    // tie involving both
    CHECK(vote({C::b, C::b, C::a, C::both, C::b}) == C::b);
    CHECK(vote({C::both}) == C::both);
}

TEST_CASE("aggregation ignores input order", "[llm][aggregate][property]") {
    Sampler rng(11001);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<PairChoice> choices;
        const int n = rng.uniform_int(1, 9);
        for (int i = 0; i < n; ++i) {
            choices.push_back(static_cast<PairChoice>(rng.uniform_int(0, 2)));
        }
        const PairChoice base = vote(choices);
        for (int shuffle = 0; shuffle < 5; ++shuffle) {
            for (std::size_t i = choices.size(); i > 1; --i) {
                std::swap(choices[i - 1],
                          choices[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
            }
            CHECK(vote(choices) == base);
        }
    }
}

// ---------------------------------------------------------------------------
// Providers and evaluation loops
// ---------------------------------------------------------------------------

namespace {

// Scripted provider: pops canned results in order, recording each request.
class ScriptedProvider : public ChatProvider {
public:
    explicit ScriptedProvider(std::vector<ChatResult> script)
        : script_(std::move(script)) {}
    std::string name() const override { return "scripted"; }
    bool offline() const override { return true; }
    ChatResult complete(const nlohmann::json& request) override {
        requests.push_back(request);
        if (index_ >= script_.size()) {
            return ChatResult{false, "", "script exhausted", 0};
        }
        return script_[index_++];
    }
    std::vector<nlohmann::json> requests;

private:
    std::vector<ChatResult> script_;
    std::size_t index_ = 0;
};

ChatResult ok_result(const std::string& content) {
    return ChatResult{true, content, "", 200};
}

const std::string kTinyPng = [] {
    return encode_png(render(make_doc(4, 4, {})));
}();

} // namespace

TEST_CASE("evaluate_absolute retries rejected runs and records transcripts",
          "[llm][judge]") {
    LlmConfig cfg;
    cfg.runs_per_item = 3;
    cfg.max_retries = 1;
    ScriptedProvider provider({
        ok_result("{\"score\": 7, \"explanation\": \"one\"}"),
        ok_result("{\"score\": 12}"), // rejected, retried
        ok_result("{\"score\": 9, \"explanation\": \"two\"}"),
        ok_result("{\"score\": 8, \"explanation\": \"three\"}"),
    });
    LogicalClock clock;
    std::vector<TranscriptEntry> transcript;
    const AbsoluteItemResult result = evaluate_absolute(
        kTinyPng, Principle::alignment, cfg, provider, clock, transcript, "item-1");
    REQUIRE(result.mean.has_value());
    CHECK(*result.mean == Approx(8.0));
    CHECK(result.verdicts.size() == 3);
    CHECK(result.failed_runs == 0);
    REQUIRE(transcript.size() == 4); // every attempt, including the rejected one
    CHECK(transcript[1].status == "rejected");
    CHECK(transcript[1].run == 2);
    CHECK(transcript[1].attempt == 1);
    CHECK(transcript[2].attempt == 2);
    for (const TranscriptEntry& e : transcript) {
        CHECK_FALSE(e.timestamp.empty());
        CHECK(e.item == "item-1");
    }
}

TEST_CASE("all-failed runs produce an item-level failure", "[llm][judge]") {
    LlmConfig cfg;
    cfg.runs_per_item = 2;
    cfg.max_retries = 0;
    ScriptedProvider provider({
        ChatResult{false, "", "boom", 500},
        ok_result("not json"),
    });
    LogicalClock clock;
    std::vector<TranscriptEntry> transcript;
    const AbsoluteItemResult result = evaluate_absolute(
        kTinyPng, Principle::overlap, cfg, provider, clock, transcript, "sad");
    CHECK_FALSE(result.mean.has_value());
    CHECK(result.failed_runs == 2);
    CHECK(transcript.size() == 2);
    CHECK(transcript[0].status == "http_error");
    CHECK(transcript[1].status == "parse_error");
}

TEST_CASE("stub provider is deterministic per request and occurrence", "[llm][provider]") {
    LlmConfig cfg;
    const nlohmann::json request = build_absolute_request(cfg, Principle::alignment, kTinyPng);
    StubChatProvider p1(42), p2(42), p3(43);
    const std::string a1 = p1.complete(request).content;
    const std::string a2 = p1.complete(request).content; // second occurrence may differ
    CHECK(p2.complete(request).content == a1);
    CHECK(p2.complete(request).content == a2);
    // different seed, different stream (with overwhelming likelihood)
    StubChatProvider q(991);
    bool any_diff = false;
    for (int i = 0; i < 8; ++i) {
        if (q.complete(request).content != p3.complete(request).content) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("replay provider serves recorded transcripts in order", "[llm][provider]") {
    LlmConfig cfg;
    cfg.runs_per_item = 2;
    StubChatProvider stub(7);
    LogicalClock clock;
    std::vector<TranscriptEntry> transcript;
    const AbsoluteItemResult live = evaluate_absolute(
        kTinyPng, Principle::whitespace, cfg, stub, clock, transcript, "d1");
    REQUIRE(live.mean.has_value());

    ReplayChatProvider replay(write_transcript_jsonl(transcript));
    std::vector<TranscriptEntry> transcript2;
    LogicalClock clock2;
    const AbsoluteItemResult replayed = evaluate_absolute(
        kTinyPng, Principle::whitespace, cfg, replay, clock2, transcript2, "d1");
    REQUIRE(replayed.mean.has_value());
    CHECK(*replayed.mean == *live.mean);
    REQUIRE(replayed.verdicts.size() == live.verdicts.size());
    for (std::size_t i = 0; i < live.verdicts.size(); ++i) {
        CHECK(replayed.verdicts[i].score == live.verdicts[i].score);
    }
    // queue exhausted now
    const ChatResult miss =
        replay.complete(build_absolute_request(cfg, Principle::whitespace, kTinyPng));
    CHECK_FALSE(miss.ok);
}

TEST_CASE("http provider speaks chat-completions against a local server",
          "[llm][provider][http]") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth, seen_body;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    ++hits;
                    seen_auth = req.get_header_value("Authorization");
                    seen_body = req.body;
                    res.set_content(
                        R"({"choices": [{"message": {"content": "{\"score\": 6, \"explanation\": \"ok\"}"}}]})",
                        "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

    LlmConfig cfg;
    cfg.runs_per_item = 1;
    HttpChatProvider provider(
        "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions", "sekrit", 10);
    LogicalClock clock;
    std::vector<TranscriptEntry> transcript;
    const AbsoluteItemResult result = evaluate_absolute(
        kTinyPng, Principle::alignment, cfg, provider, clock, transcript, "remote");
    REQUIRE(result.mean.has_value());
    CHECK(*result.mean == 6.0);
    CHECK(hits == 1);
    CHECK(seen_auth == "Bearer sekrit");
    const nlohmann::json body = nlohmann::json::parse(seen_body);
    CHECK(body.at("model") == "gpt-4o");
    CHECK(body.at("temperature").get<double>() == 1.0);

    server.stop();
    thread.join();
}

TEST_CASE("http provider surfaces transport and status errors", "[llm][provider][http]") {
    // nothing listens on this port
    HttpChatProvider provider("http://127.0.0.1:1/v1/chat/completions", "k", 1);
    const ChatResult res = provider.complete(nlohmann::json{{"x", 1}});
    CHECK_FALSE(res.ok);
    CHECK_FALSE(res.error.empty());
}

// ---------------------------------------------------------------------------
// Batch runner
// ---------------------------------------------------------------------------

TEST_CASE("budget stops the batch cleanly and resume completes it", "[llm][runner]") {
    const auto dir = fresh_temp_dir("budget");
    const auto png_path = dir / "design.png";
    write_file_atomic(png_path, kTinyPng);

    std::vector<AbsoluteTask> tasks;
    for (int i = 0; i < 4; ++i) {
        tasks.push_back({"d" + std::to_string(i), Principle::alignment, png_path.string()});
    }
    LlmConfig cfg;
    cfg.runs_per_item = 2;
    cfg.parallelism = 1;
    cfg.request_budget = 5; // funds two items plus half of the third

    StubChatProvider provider(3);
    const BatchSummary first =
        run_absolute_batch(tasks, dir / "items", cfg, provider, true, true);
    CHECK(first.budget_stopped);
    CHECK(first.completed >= 1);
    CHECK(first.completed < 4);

    cfg.request_budget = -1;
    StubChatProvider provider2(3);
    const BatchSummary second =
        run_absolute_batch(tasks, dir / "items", cfg, provider2, true, true);
    CHECK_FALSE(second.budget_stopped);
    CHECK(second.skipped == first.completed);
    CHECK(second.completed + second.skipped == 4);
}

TEST_CASE("pairwise batch unflips verdicts back to canonical order", "[llm][runner]") {
    const auto dir = fresh_temp_dir("pairflip");
    write_file_atomic(dir / "a.png", kTinyPng);
    const std::string other = encode_png(render(make_doc(5, 5, {})));
    write_file_atomic(dir / "b.png", other);

    // Script a provider that always answers "a" for whatever it is shown;
    // with flip=true the canonical verdict must come back as "b".
    std::vector<ChatResult> script(5, ok_result("{\"better_design\": \"a\"}"));
    ScriptedProvider provider(script);

    PairwiseTask task;
    task.design_a = "orig";
    task.design_b = "variant";
    task.principle = Principle::alignment;
    task.png_a_path = (dir / "a.png").string();
    task.png_b_path = (dir / "b.png").string();
    task.flip = true;
    LlmConfig cfg;
    cfg.runs_per_item = 5;
    cfg.parallelism = 1;
    const BatchSummary summary =
        run_pairwise_batch({task}, dir / "items", cfg, provider, false, true);
    CHECK(summary.completed == 1);

    const auto item_path =
        dir / "items" / detail::item_file_name("orig|variant", Principle::alignment);
    const nlohmann::json item = nlohmann::json::parse(read_file(item_path));
    CHECK(item.at("final").get<std::string>() == "b");
    CHECK(item.at("votes").at("b").get<int>() == 5);
    CHECK(item.at("flipped").get<bool>() == true);

    // the images really were presented swapped
    REQUIRE_FALSE(provider.requests.empty());
    const auto& parts = provider.requests[0].at("messages").at(0).at("content");
    const std::string first_image = parts[1].at("image_url").at("url").get<std::string>();
    CHECK(first_image == png_data_url(other));
}

TEST_CASE("rate limiter paces acquisitions", "[llm][runner]") {
    RateLimiter limiter(50.0); // 20ms per token after the initial burst
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 55; ++i) limiter.acquire();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed >= 0.05); // at least five paced tokens beyond the burst
}

TEST_CASE("request budget throws exactly at the cap", "[llm][runner]") {
    RequestBudget budget(2);
    budget.consume();
    budget.consume();
    CHECK_THROWS_AS(budget.consume(), BudgetError);
    RequestBudget unlimited(-1);
    for (int i = 0; i < 100; ++i) unlimited.consume();
}
