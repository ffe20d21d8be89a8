#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "deval/csv.hpp"
#include "deval/errors.hpp"
#include "deval/llm/judge.hpp"
#include "deval/rng.hpp"

namespace deval {

// Token bucket; rate 0 disables limiting. Capacity is one second of
// traffic (at least one token) so short bursts smooth out instead of
// stacking up.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second)
        : rate_(requests_per_second),
          capacity_(std::max(1.0, requests_per_second)),
          tokens_(capacity_),
          last_(std::chrono::steady_clock::now()) {}

    void acquire() {
        if (rate_ <= 0.0) return;
        std::unique_lock<std::mutex> lock(mutex_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const double needed = (1.0 - tokens_) / rate_;
            lock.unlock();
            std::this_thread::sleep_for(std::chrono::duration<double>(needed));
            lock.lock();
        }
    }

private:
    void refill() {
        const auto now = std::chrono::steady_clock::now();
        const double dt = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + dt * rate_);
    }

    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
};

// Counts requests against a hard cap. consume() throws BudgetError on the
// request that would exceed the cap, before it is issued.
class RequestBudget {
public:
    explicit RequestBudget(long long budget) : remaining_(budget) {}

    void consume() {
        if (remaining_.load() < 0) return; // unlimited
        long long cur = remaining_.load();
        while (true) {
            if (cur == 0) {
                throw BudgetError("request budget exhausted");
            }
            if (remaining_.compare_exchange_weak(cur, cur - 1)) return;
        }
    }

private:
    std::atomic<long long> remaining_;
};

// Runs fn(i) for i in [0, n) on up to `jobs` worker threads. A BudgetError
// in any worker stops the dispatch of new work; other exceptions rethrow.
inline bool parallel_for(std::size_t n, int jobs,
                         const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1, jobs);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> budget_stop{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            if (budget_stop.load()) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (const BudgetError&) {
                budget_stop.store(true);
                return;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(n, 1));
    threads.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return !budget_stop.load(); // false = stopped on budget
}

// ---------------------------------------------------------------------------
// Resumable batches. Each (design, principle) item persists its verdicts
// and transcript as one JSON file the moment it completes, so interrupted
// runs (budget, crash) resume by skipping existing files.
// ---------------------------------------------------------------------------

struct AbsoluteTask {
    std::string design_id;
    Principle principle = Principle::alignment;
    std::string png_path;
};

struct BatchSummary {
    int completed = 0;
    int skipped = 0;  // resume hits
    int failed = 0;   // items whose runs all failed
    bool budget_stopped = false;
};

namespace detail {

inline std::string item_file_name(const std::string& design_id, Principle p) {
    // ids can contain path-hostile characters; hash them for the file name
    return to_hex64(fnv1a64(design_id)) + "__" + to_string(p) + ".json";
}

} // namespace detail

// When logical_time is set every item stamps its transcript with its own
// logical clock, so outputs stay byte-identical no matter how the worker
// threads interleave. Live runs share one wall clock.
inline BatchSummary run_absolute_batch(const std::vector<AbsoluteTask>& tasks,
                                       const std::filesystem::path& items_dir,
                                       const LlmConfig& cfg, ChatProvider& provider,
                                       bool resume, bool logical_time) {
    std::filesystem::create_directories(items_dir);
    RateLimiter limiter(cfg.requests_per_second);
    RequestBudget budget(cfg.request_budget);
    const RequestGate gate = [&] {
        budget.consume();
        limiter.acquire();
    };
    SystemClock wall_clock;

    BatchSummary summary;
    std::mutex summary_mutex;

    const bool finished = parallel_for(tasks.size(), cfg.parallelism, [&](std::size_t i) {
        const AbsoluteTask& task = tasks[i];
        const std::filesystem::path item_path =
            items_dir / detail::item_file_name(task.design_id, task.principle);
        if (resume && std::filesystem::exists(item_path)) {
            std::lock_guard<std::mutex> lock(summary_mutex);
            ++summary.skipped;
            return;
        }
        LogicalClock item_clock;
        Clock& clock = logical_time ? static_cast<Clock&>(item_clock)
                                    : static_cast<Clock&>(wall_clock);
        const std::string png = read_file(task.png_path);
        std::vector<TranscriptEntry> transcript;
        const AbsoluteItemResult result = evaluate_absolute(
            png, task.principle, cfg, provider, clock, transcript, task.design_id, gate);

        nlohmann::json runs = nlohmann::json::array();
        for (const AbsoluteVerdict& v : result.verdicts) {
            runs.push_back({{"run", v.run_index},
                            {"score", v.score},
                            {"explanation", v.explanation},
                            {"raw", v.raw}});
        }
        nlohmann::json entries = nlohmann::json::array();
        for (const TranscriptEntry& e : transcript) entries.push_back(e.to_json());
        nlohmann::json item{{"design_id", task.design_id},
                            {"principle", to_string(task.principle)},
                            {"runs", runs},
                            {"mean", result.mean ? nlohmann::json(*result.mean)
                                                 : nlohmann::json()},
                            {"failed_runs", result.failed_runs},
                            {"transcript", entries}};
        write_file_atomic(item_path, item.dump(2) + "\n");

        std::lock_guard<std::mutex> lock(summary_mutex);
        ++summary.completed;
        if (!result.mean) ++summary.failed;
    });
    summary.budget_stopped = !finished;
    return summary;
}

struct PairwiseTask {
    std::string design_a;
    std::string design_b;
    Principle principle = Principle::alignment;
    std::string png_a_path;
    std::string png_b_path;
    bool flip = false; // present b first, unflip verdicts afterwards
};

inline BatchSummary run_pairwise_batch(const std::vector<PairwiseTask>& tasks,
                                       const std::filesystem::path& items_dir,
                                       const LlmConfig& cfg, ChatProvider& provider,
                                       bool resume, bool logical_time) {
    std::filesystem::create_directories(items_dir);
    RateLimiter limiter(cfg.requests_per_second);
    RequestBudget budget(cfg.request_budget);
    const RequestGate gate = [&] {
        budget.consume();
        limiter.acquire();
    };
    SystemClock wall_clock;

    BatchSummary summary;
    std::mutex summary_mutex;

    const bool finished = parallel_for(tasks.size(), cfg.parallelism, [&](std::size_t i) {
        const PairwiseTask& task = tasks[i];
        const std::string pair_key = task.design_a + "|" + task.design_b;
        const std::filesystem::path item_path =
            items_dir / detail::item_file_name(pair_key, task.principle);
        if (resume && std::filesystem::exists(item_path)) {
            std::lock_guard<std::mutex> lock(summary_mutex);
            ++summary.skipped;
            return;
        }
        LogicalClock item_clock;
        Clock& clock = logical_time ? static_cast<Clock&>(item_clock)
                                    : static_cast<Clock&>(wall_clock);
        const std::string png_a = read_file(task.png_a_path);
        const std::string png_b = read_file(task.png_b_path);
        std::vector<TranscriptEntry> transcript;
        const PairwiseItemResult presented = evaluate_pairwise(
            task.flip ? png_b : png_a, task.flip ? png_a : png_b, task.principle, cfg,
            provider, clock, transcript, pair_key, gate);

        auto unflip = [&](PairChoice c) {
            if (!task.flip || c == PairChoice::both) return c;
            return c == PairChoice::a ? PairChoice::b : PairChoice::a;
        };

        nlohmann::json runs = nlohmann::json::array();
        int votes_a = 0, votes_b = 0, votes_both = 0;
        for (const PairwiseVerdict& v : presented.verdicts) {
            const PairChoice canonical = unflip(v.choice);
            if (canonical == PairChoice::a) ++votes_a;
            else if (canonical == PairChoice::b) ++votes_b;
            else ++votes_both;
            runs.push_back({{"run", v.run_index},
                            {"choice", to_string(canonical)},
                            {"explanation", v.explanation},
                            {"raw", v.raw}});
        }
        nlohmann::json entries = nlohmann::json::array();
        for (const TranscriptEntry& e : transcript) entries.push_back(e.to_json());
        nlohmann::json item{
            {"design_a", task.design_a},
            {"design_b", task.design_b},
            {"principle", to_string(task.principle)},
            {"flipped", task.flip},
            {"runs", runs},
            {"votes", {{"a", votes_a}, {"b", votes_b}, {"both", votes_both}}},
            {"final", presented.final_choice
                          ? nlohmann::json(to_string(unflip(*presented.final_choice)))
                          : nlohmann::json()},
            {"failed_runs", presented.failed_runs},
            {"transcript", entries}};
        write_file_atomic(item_path, item.dump(2) + "\n");

        std::lock_guard<std::mutex> lock(summary_mutex);
        ++summary.completed;
        if (!presented.final_choice) ++summary.failed;
    });
    summary.budget_stopped = !finished;
    return summary;
}

} // namespace deval
