// deval: score graphic-design documents against alignment, overlap and
// white-space principles, build perturbed evaluation corpora, drive an
// LMM judge over HTTP, and compare everything against human ratings.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deval/analysis.hpp"
#include "deval/annotations.hpp"
#include "deval/charts.hpp"
#include "deval/config.hpp"
#include "deval/corpus.hpp"
#include "deval/csv.hpp"
#include "deval/document.hpp"
#include "deval/heuristics.hpp"
#include "deval/llm/runner.hpp"
#include "deval/perturb.hpp"
#include "deval/raster.hpp"

namespace fs = std::filesystem;
using namespace deval;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 success, 1 validation/input error, 2 runtime/provider
// error, 3 budget stop.
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitBudget = 3;

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool deterministic = false;
    int jobs = 0; // 0 = hardware default
};

ToolConfig load_tool_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) return ToolConfig{};
    if (!fs::exists(opts.config_path)) {
        throw ValidationError("config file not found: " + opts.config_path);
    }
    return parse_config(read_file(opts.config_path));
}

std::unique_ptr<Clock> make_clock(bool deterministic) {
    if (deterministic) return std::make_unique<LogicalClock>();
    return std::make_unique<SystemClock>();
}

int effective_jobs(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 2 : static_cast<int>(hc);
}

void write_run_manifest(const fs::path& dir, const std::string& command,
                        const ToolConfig& cfg, std::uint64_t seed,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs,
                        const std::string& started, const std::string& finished) {
    nlohmann::json j{{"command", command},
                     {"tool_version", kToolVersion},
                     {"master_seed", seed},
                     {"config", config_to_json(cfg)},
                     {"inputs", inputs},
                     {"outputs", outputs},
                     {"timestamps", {{"started", started}, {"finished", finished}}}};
    write_file_atomic(dir / "run_manifest.json", j.dump(2) + "\n");
}

std::string sanitize_file_stem(const std::string& id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() ? "design" : out;
}

std::vector<Principle> parse_principles(const std::string& csv_list) {
    if (csv_list.empty()) {
        return {Principle::alignment, Principle::overlap, Principle::whitespace};
    }
    std::vector<Principle> out;
    std::size_t start = 0;
    while (start <= csv_list.size()) {
        std::size_t end = csv_list.find(',', start);
        if (end == std::string::npos) end = csv_list.size();
        const std::string token = csv_list.substr(start, end - start);
        if (!token.empty()) out.push_back(principle_from_string(token));
        start = end + 1;
    }
    if (out.empty()) throw ValidationError("--principles: no principles given");
    return out;
}

// ---------------------------------------------------------------------------
// build-dataset
// ---------------------------------------------------------------------------

void collect_asset_refs(const DesignDocument& doc, std::set<std::string>& refs) {
    if (doc.canvas.background_asset) refs.insert(*doc.canvas.background_asset);
    for (const Element& e : doc.elements) {
        if (e.asset) refs.insert(*e.asset);
    }
}

int cmd_build_dataset(const std::string& in_dir, const std::string& out_dir,
                      const CommonOpts& opts) {
    auto clock = make_clock(opts.deterministic);
    const std::string started = clock->now();
    const ToolConfig cfg = load_tool_config(opts);

    if (!fs::is_directory(in_dir)) {
        throw ValidationError("input directory not found: " + in_dir);
    }
    std::vector<fs::path> doc_files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            doc_files.push_back(entry.path());
        }
    }
    std::sort(doc_files.begin(), doc_files.end());
    if (doc_files.empty()) {
        throw ValidationError("no .json documents in " + in_dir);
    }

    // Validate everything before writing anything: an invalid input must
    // leave no partial corpus behind.
    std::vector<std::pair<std::string, DesignDocument>> originals;
    for (const fs::path& file : doc_files) {
        try {
            originals.emplace_back(file.stem().string(), parse_document(read_file(file)));
        } catch (const Error& e) {
            throw ValidationError(file.string() + ": " + e.what());
        }
    }

    const std::vector<CorpusEntry> corpus = build_corpus(originals, opts.seed, cfg.perturb);

    const fs::path out(out_dir);
    if (fs::exists(out) && !fs::is_empty(out)) {
        throw ValidationError("output directory exists and is not empty: " + out_dir);
    }
    const fs::path staging = out.string() + ".staging";
    fs::remove_all(staging);
    fs::create_directories(staging);

    // Keep the corpus self-contained: copy every referenced asset next to
    // the documents so later pipeline stages resolve them locally.
    std::set<std::string> asset_refs;
    for (const auto& [id, doc] : originals) collect_asset_refs(doc, asset_refs);
    for (const std::string& ref : asset_refs) {
        const fs::path src = fs::path(in_dir) / ref;
        if (!fs::exists(src)) throw ValidationError("referenced asset not found: " + src.string());
        const fs::path dst = staging / ref;
        fs::create_directories(dst.parent_path());
        fs::copy_file(src, dst);
    }
    const AssetLoader assets{staging};

    std::vector<ManifestRow> manifest(corpus.size());
    std::vector<PerturbationRecord> records;
    std::set<std::string> stems;
    for (const CorpusEntry& entry : corpus) {
        if (!stems.insert(sanitize_file_stem(entry.design_id)).second) {
            throw ValidationError("design ids collide after file-name sanitization: " +
                                  entry.design_id);
        }
    }

    const int jobs = effective_jobs(opts.jobs);
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        const CorpusEntry& entry = corpus[i];
        const std::string stem = sanitize_file_stem(entry.design_id);
        write_file_atomic(staging / (stem + ".json"), serialize_document(entry.doc));
        write_file_atomic(staging / (stem + ".png"), encode_png(render(entry.doc, &assets)));
        ManifestRow row;
        row.design_id = entry.design_id;
        row.original_id = entry.original_id;
        row.type = entry.record ? to_string(entry.record->type) : kLevelOriginal;
        row.level = entry.record ? to_string(entry.record->level) : kLevelOriginal;
        row.seed = entry.record ? entry.record->seed : 0;
        row.path = stem + ".json";
        manifest[i] = std::move(row);
    });
    for (const CorpusEntry& entry : corpus) {
        if (entry.record) records.push_back(*entry.record);
    }

    write_file_atomic(staging / "manifest.csv", write_manifest(manifest));
    write_file_atomic(staging / "records.jsonl", write_records_jsonl(records));
    write_run_manifest(staging, "build-dataset", cfg, opts.seed, {in_dir}, {out_dir},
                       started, clock->now());

    fs::remove_all(out);
    fs::rename(staging, out);
    std::cout << "built corpus: " << corpus.size() << " designs ("
              << originals.size() << " originals) in " << out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

int cmd_render(const std::string& in_file, const std::string& out_file) {
    const DesignDocument doc = parse_document(read_file(in_file));
    const AssetLoader assets{fs::path(in_file).parent_path()};
    write_file_atomic(out_file, encode_png(render(doc, &assets)));
    std::cout << "rendered " << in_file << " -> " << out_file << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// score-heuristic
// ---------------------------------------------------------------------------

struct CorpusOnDisk {
    fs::path dir;
    std::vector<ManifestRow> manifest;
};

CorpusOnDisk load_corpus_dir(const std::string& corpus_dir) {
    const fs::path dir(corpus_dir);
    const fs::path manifest_path = dir / "manifest.csv";
    if (!fs::exists(manifest_path)) {
        throw ValidationError("corpus manifest not found: " + manifest_path.string());
    }
    return CorpusOnDisk{dir, load_manifest(read_file(manifest_path))};
}

int cmd_score_heuristic(const std::string& corpus_dir, const std::string& out_dir,
                        const std::string& principles_arg, const CommonOpts& opts) {
    auto clock = make_clock(opts.deterministic);
    const std::string started = clock->now();
    const ToolConfig cfg = load_tool_config(opts);
    const std::vector<Principle> principles = parse_principles(principles_arg);
    const CorpusOnDisk corpus = load_corpus_dir(corpus_dir);
    const AssetLoader assets{corpus.dir};

    struct DesignResult {
        std::vector<ScoreRow> rows;
        std::vector<std::vector<std::string>> component_rows;
        std::vector<std::string> errors;
    };
    std::vector<DesignResult> results(corpus.manifest.size());

    const int jobs = effective_jobs(opts.jobs);
    parallel_for(corpus.manifest.size(), jobs, [&](std::size_t i) {
        const ManifestRow& row = corpus.manifest[i];
        DesignResult& res = results[i];
        DesignDocument doc;
        try {
            doc = parse_document(read_file(corpus.dir / row.path));
        } catch (const Error& e) {
            res.errors.push_back(std::string(e.what()));
            return;
        }
        for (Principle p : principles) {
            try {
                const PrincipleScore score = score_principle(doc, p, cfg.heuristics, &assets);
                res.rows.push_back(
                    ScoreRow{row.design_id, p, ScoreMethod::heuristic, std::nullopt,
                             score.value});
                for (const ScoreComponent& c : score.components) {
                    res.component_rows.push_back(
                        {row.design_id, to_string(p), c.name, format_double(c.raw),
                         format_double(c.normalized), format_double(c.weight)});
                }
            } catch (const Error& e) {
                res.errors.push_back(to_string(p) + ": " + e.what());
            }
        }
    });

    fs::create_directories(out_dir);
    std::vector<ScoreRow> all_rows;
    std::string components_csv = "design_id,principle,component,raw,normalized,weight\n";
    std::string errors_csv = "design_id,error\n";
    int error_count = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (const ScoreRow& r : results[i].rows) all_rows.push_back(r);
        for (const auto& c : results[i].component_rows) components_csv += csv::join_row(c);
        for (const std::string& err : results[i].errors) {
            errors_csv += csv::join_row({corpus.manifest[i].design_id, err});
            std::cerr << "error: " << corpus.manifest[i].design_id << ": " << err << "\n";
            ++error_count;
        }
    }
    write_file_atomic(fs::path(out_dir) / "scores.csv", write_scores_csv(all_rows));
    write_file_atomic(fs::path(out_dir) / "components.csv", components_csv);
    if (error_count > 0) {
        write_file_atomic(fs::path(out_dir) / "errors.csv", errors_csv);
    }
    write_run_manifest(out_dir, "score-heuristic", cfg, opts.seed, {corpus_dir}, {out_dir},
                       started, clock->now());

    std::cout << "scored " << corpus.manifest.size() << " designs x " << principles.size()
              << " principles, " << all_rows.size() << " rows";
    if (error_count > 0) std::cout << ", " << error_count << " errors";
    std::cout << "\n";
    return error_count > 0 ? kExitRuntime : kExitOk;
}

// ---------------------------------------------------------------------------
// score-llm
// ---------------------------------------------------------------------------

struct ProviderOpts {
    std::string provider = "http";
    std::string replay_file;
};

std::unique_ptr<ChatProvider> make_provider(const ProviderOpts& opts, const LlmConfig& cfg,
                                            std::uint64_t seed) {
    if (opts.provider == "http") {
        const char* key = std::getenv(cfg.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw LlmError("credentials missing: set " + cfg.api_key_env);
        }
        return std::make_unique<HttpChatProvider>(cfg.endpoint, key, cfg.timeout_seconds);
    }
    if (opts.provider == "replay") {
        if (opts.replay_file.empty()) {
            throw ValidationError("--provider replay requires --replay-file");
        }
        return std::make_unique<ReplayChatProvider>(read_file(opts.replay_file));
    }
    if (opts.provider == "stub") {
        return std::make_unique<StubChatProvider>(seed);
    }
    throw ValidationError("unknown provider \"" + opts.provider + "\"");
}

int cmd_score_llm(const std::string& corpus_dir, const std::string& out_dir,
                  const std::string& principles_arg, const ProviderOpts& prov,
                  int runs_override, long long budget_override, bool resume,
                  const CommonOpts& opts) {
    const ToolConfig base_cfg = load_tool_config(opts);
    LlmConfig cfg = base_cfg.llm;
    if (runs_override > 0) cfg.runs_per_item = runs_override;
    if (budget_override >= 0) cfg.request_budget = budget_override;
    validate(cfg);

    std::unique_ptr<ChatProvider> provider = make_provider(prov, cfg, opts.seed);
    const bool offline = provider->offline() || opts.deterministic;
    auto clock = make_clock(offline);
    const std::string started = clock->now();

    const std::vector<Principle> principles = parse_principles(principles_arg);
    const CorpusOnDisk corpus = load_corpus_dir(corpus_dir);

    std::vector<AbsoluteTask> tasks;
    for (const ManifestRow& row : corpus.manifest) {
        const fs::path png = corpus.dir / (fs::path(row.path).stem().string() + ".png");
        for (Principle p : principles) {
            tasks.push_back(AbsoluteTask{row.design_id, p, png.string()});
        }
    }

    const fs::path items_dir = fs::path(out_dir) / "items";
    const BatchSummary summary =
        run_absolute_batch(tasks, items_dir, cfg, *provider, resume, offline);

    if (summary.budget_stopped) {
        std::cerr << "budget stop: " << summary.completed << " items completed this run, "
                  << summary.skipped << " already present; rerun with --resume to continue\n";
        return kExitBudget;
    }

    // All items exist now; assemble deterministic outputs in manifest order.
    std::vector<ScoreRow> rows;
    std::string transcripts;
    std::string errors_csv = "design_id,principle,error\n";
    int failed_items = 0;
    for (const ManifestRow& row : corpus.manifest) {
        for (Principle p : principles) {
            const fs::path item_path = items_dir / detail::item_file_name(row.design_id, p);
            const nlohmann::json item = nlohmann::json::parse(read_file(item_path));
            for (const auto& run : item.at("runs")) {
                rows.push_back(ScoreRow{row.design_id, p, ScoreMethod::llm,
                                        run.at("run").get<int>(),
                                        static_cast<double>(run.at("score").get<int>())});
            }
            if (item.at("mean").is_null()) {
                ++failed_items;
                errors_csv += csv::join_row(
                    {row.design_id, to_string(p), "all runs failed; see transcripts"});
            } else {
                rows.push_back(ScoreRow{row.design_id, p, ScoreMethod::llm, std::nullopt,
                                        item.at("mean").get<double>()});
            }
            for (const auto& entry : item.at("transcript")) {
                transcripts += entry.dump();
                transcripts += '\n';
            }
        }
    }
    write_file_atomic(fs::path(out_dir) / "scores.csv", write_scores_csv(rows));
    write_file_atomic(fs::path(out_dir) / "transcripts.jsonl", transcripts);
    if (failed_items > 0) {
        write_file_atomic(fs::path(out_dir) / "errors.csv", errors_csv);
    }
    write_run_manifest(out_dir, "score-llm", base_cfg, opts.seed, {corpus_dir}, {out_dir},
                       started, clock->now());

    std::cout << "llm-scored " << corpus.manifest.size() << " designs x "
              << principles.size() << " principles (" << summary.skipped << " resumed)";
    if (failed_items > 0) std::cout << ", " << failed_items << " failed items";
    std::cout << "\n";
    return failed_items > 0 ? kExitRuntime : kExitOk;
}

// ---------------------------------------------------------------------------
// pairwise
// ---------------------------------------------------------------------------

std::vector<Principle> principles_for_type(PerturbType t, bool matched) {
    if (!matched) {
        return {Principle::alignment, Principle::overlap, Principle::whitespace};
    }
    // x perturbations probe alignment; font perturbations probe overlap and
    // white space
    if (t == PerturbType::x_shift) return {Principle::alignment};
    return {Principle::overlap, Principle::whitespace};
}

int cmd_pairwise(const std::string& corpus_dir, const std::string& out_dir,
                 const std::string& pairing, const ProviderOpts& prov, int runs_override,
                 long long budget_override, bool resume, const CommonOpts& opts) {
    const ToolConfig base_cfg = load_tool_config(opts);
    LlmConfig cfg = base_cfg.llm;
    if (runs_override > 0) cfg.runs_per_item = runs_override;
    if (budget_override >= 0) cfg.request_budget = budget_override;
    validate(cfg);
    if (pairing != "matched" && pairing != "all") {
        throw ValidationError("--pairing must be matched or all");
    }

    std::unique_ptr<ChatProvider> provider = make_provider(prov, cfg, opts.seed);
    const bool offline = provider->offline() || opts.deterministic;
    auto clock = make_clock(offline);
    const std::string started = clock->now();

    const CorpusOnDisk corpus = load_corpus_dir(corpus_dir);
    const fs::path records_path = corpus.dir / "records.jsonl";
    std::map<std::string, PerturbationRecord> record_of;
    if (fs::exists(records_path)) {
        for (PerturbationRecord& rec : load_records_jsonl(read_file(records_path))) {
            record_of[rec.variant_id] = std::move(rec);
        }
    }

    std::map<std::string, const ManifestRow*> row_of;
    for (const ManifestRow& row : corpus.manifest) row_of[row.design_id] = &row;

    std::vector<PairwiseTask> tasks;
    for (const ManifestRow& row : corpus.manifest) {
        if (row.is_original()) continue;
        auto rec = record_of.find(row.design_id);
        if (rec != record_of.end() && rec->second.noop) continue; // identical images
        auto orig = row_of.find(row.original_id);
        if (orig == row_of.end()) {
            throw ValidationError("manifest: variant " + row.design_id +
                                  " references missing original " + row.original_id);
        }
        const PerturbType type = perturb_type_from_string(row.type);
        for (Principle p : principles_for_type(type, pairing == "matched")) {
            PairwiseTask task;
            task.design_a = row.original_id;
            task.design_b = row.design_id;
            task.principle = p;
            task.png_a_path =
                (corpus.dir / (fs::path(orig->second->path).stem().string() + ".png")).string();
            task.png_b_path =
                (corpus.dir / (fs::path(row.path).stem().string() + ".png")).string();
            if (cfg.randomize_pair_order) {
                const std::uint64_t flip_seed = fnv1a64(
                    task.design_a + "|" + task.design_b + "|" + to_string(p),
                    fnv1a64("pair-order", opts.seed ^ 0x9e3779b97f4a7c15ULL));
                task.flip = Sampler(flip_seed).chance(0.5);
            }
            tasks.push_back(std::move(task));
        }
    }
    if (tasks.empty()) throw ValidationError("no (original, variant) pairs in manifest");

    const fs::path items_dir = fs::path(out_dir) / "items";
    const BatchSummary summary =
        run_pairwise_batch(tasks, items_dir, cfg, *provider, resume, offline);

    if (summary.budget_stopped) {
        std::cerr << "budget stop: " << summary.completed << " pairs completed this run, "
                  << summary.skipped << " already present; rerun with --resume to continue\n";
        return kExitBudget;
    }

    std::string verdicts_csv =
        "design_a,design_b,principle,level,flipped,votes_a,votes_b,votes_both,final\n";
    std::string transcripts;
    int failed_items = 0;
    for (const PairwiseTask& task : tasks) {
        const std::string pair_key = task.design_a + "|" + task.design_b;
        const fs::path item_path =
            items_dir / detail::item_file_name(pair_key, task.principle);
        const nlohmann::json item = nlohmann::json::parse(read_file(item_path));
        const std::string level = row_of.at(task.design_b)->level;
        const auto& votes = item.at("votes");
        const bool failed = item.at("final").is_null();
        if (failed) ++failed_items;
        verdicts_csv += csv::join_row(
            {task.design_a, task.design_b, to_string(task.principle), level,
             item.at("flipped").get<bool>() ? "1" : "0",
             std::to_string(votes.at("a").get<int>()),
             std::to_string(votes.at("b").get<int>()),
             std::to_string(votes.at("both").get<int>()),
             failed ? "error" : item.at("final").get<std::string>()});
        for (const auto& entry : item.at("transcript")) {
            transcripts += entry.dump();
            transcripts += '\n';
        }
    }
    write_file_atomic(fs::path(out_dir) / "verdicts.csv", verdicts_csv);
    write_file_atomic(fs::path(out_dir) / "transcripts.jsonl", transcripts);
    write_run_manifest(out_dir, "pairwise", base_cfg, opts.seed, {corpus_dir}, {out_dir},
                       started, clock->now());

    std::set<std::string> distinct_pairs;
    for (const PairwiseTask& task : tasks) {
        distinct_pairs.insert(task.design_a + "|" + task.design_b);
    }
    std::cout << "pairwise-evaluated " << distinct_pairs.size() << " pairs, "
              << tasks.size() << " judgments (" << summary.skipped << " resumed)";
    if (failed_items > 0) std::cout << ", " << failed_items << " failed";
    std::cout << "\n";
    return failed_items > 0 ? kExitRuntime : kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

std::vector<PairVerdictRow> load_verdicts_csv(const std::string& text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows[0].size() < 9 || rows[0][0] != "design_a") {
        throw ValidationError("verdicts: bad or missing header");
    }
    std::vector<PairVerdictRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 9) {
            throw ValidationError("verdicts row " + std::to_string(i + 1) +
                                  ": expected 9 fields");
        }
        if (r[8] == "error") continue; // item-level failures carry no verdict
        PairVerdictRow v;
        v.design_a = r[0];
        v.design_b = r[1];
        v.principle = principle_from_string(r[2]);
        v.final_choice = pair_choice_from_string(r[8]);
        out.push_back(std::move(v));
    }
    return out;
}

int cmd_analyze(const std::vector<std::string>& score_files, const std::string& ratings_file,
                const std::string& manifest_file, const std::string& verdicts_file,
                const std::string& pairwise_human_file, bool heuristic_pairs,
                const std::string& out_dir, const std::string& format,
                const CommonOpts& opts) {
    auto clock = make_clock(opts.deterministic);
    const std::string started = clock->now();
    const ToolConfig cfg = load_tool_config(opts);
    if (format != "csv" && format != "csv,svg") {
        throw ValidationError("--format must be csv or csv,svg");
    }

    std::vector<ScoreRow> scores;
    for (const std::string& file : score_files) {
        for (ScoreRow& r : load_scores_csv(read_file(file))) scores.push_back(std::move(r));
    }

    std::vector<ManifestRow> manifest;
    if (!manifest_file.empty()) manifest = load_manifest(read_file(manifest_file));
    std::map<std::string, const ManifestRow*> row_of;
    for (const ManifestRow& row : manifest) row_of[row.design_id] = &row;

    AgreementReport report;

    std::vector<ConsensusScore> human;
    if (!ratings_file.empty()) {
        human = consensus(load_ratings(read_file(ratings_file)));
        report.correlations = correlate_by_level(scores, human, manifest, &report.scatter);

        // itemize designs that could not be joined
        std::set<std::string> rated;
        for (const ConsensusScore& c : human) rated.insert(c.design_id);
        std::set<std::string> unjoined;
        for (const ScoreRow& s : scores) {
            if (!s.run_index && rated.find(s.design_id) == rated.end()) {
                unjoined.insert(s.design_id);
            }
        }
        for (const std::string& id : unjoined) {
            std::cerr << "join: no human ratings for " << id << "\n";
        }
    }

    // Spread of repeated measurements: LLM run rows per item, human raters
    // per consensus entry.
    {
        std::map<std::pair<std::string, int>, std::vector<double>> llm_runs;
        for (const ScoreRow& s : scores) {
            if (s.method == ScoreMethod::llm && s.run_index) {
                llm_runs[{s.design_id, static_cast<int>(s.principle)}].push_back(s.value);
            }
        }
        std::map<int, std::vector<double>> llm_stddevs;
        for (const auto& [key, values] : llm_runs) {
            if (values.size() >= 2) {
                llm_stddevs[key.second].push_back(population_stddev(values));
            }
        }
        for (const auto& [principle, stddevs] : llm_stddevs) {
            report.spreads.push_back(SpreadSlice{static_cast<Principle>(principle), "llm",
                                                 spread_summary(stddevs)});
        }
        std::map<int, std::vector<double>> human_stddevs;
        for (const ConsensusScore& c : human) {
            if (c.n >= 2) human_stddevs[static_cast<int>(c.principle)].push_back(c.stddev);
        }
        for (const auto& [principle, stddevs] : human_stddevs) {
            report.spreads.push_back(SpreadSlice{static_cast<Principle>(principle), "human",
                                                 spread_summary(stddevs)});
        }
    }

    const auto level_of = [&](const std::string& design_id) -> std::optional<std::string> {
        auto it = row_of.find(design_id);
        if (it == row_of.end()) return std::nullopt;
        return it->second->level;
    };

    // Truth for (original, variant) pairs: human pairwise consensus when
    // provided, otherwise the original-is-better convention.
    std::map<std::tuple<std::string, std::string, int>, PairChoice> human_pairs;
    if (!pairwise_human_file.empty()) {
        std::map<std::tuple<std::string, std::string, int>, std::array<int, 3>> votes;
        for (const PairwiseRating& r : load_pairwise_ratings(read_file(pairwise_human_file))) {
            votes[{r.design_a, r.design_b, static_cast<int>(r.principle)}]
                 [static_cast<int>(r.choice)]++;
        }
        for (const auto& [key, counts] : votes) {
            std::vector<PairChoice> expanded;
            for (int c = 0; c < 3; ++c) {
                for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
                    expanded.push_back(static_cast<PairChoice>(c));
                }
            }
            human_pairs[key] = vote(expanded);
        }
    }
    const auto truth_of = [&](const PairVerdictRow& v) -> std::optional<PairChoice> {
        if (!human_pairs.empty()) {
            auto it = human_pairs.find(
                {v.design_a, v.design_b, static_cast<int>(v.principle)});
            if (it == human_pairs.end()) return std::nullopt;
            return it->second;
        }
        auto b = row_of.find(v.design_b);
        if (b == row_of.end() || b->second->original_id != v.design_a) return std::nullopt;
        return PairChoice::a;
    };

    if (!verdicts_file.empty()) {
        const std::vector<PairVerdictRow> verdicts = load_verdicts_csv(read_file(verdicts_file));
        for (AccuracySlice& s : pairwise_accuracy(verdicts, truth_of, level_of, "llm")) {
            report.accuracies.push_back(std::move(s));
        }
    }

    if (heuristic_pairs) {
        if (manifest.empty()) {
            throw ValidationError("--heuristic-pairs requires --manifest");
        }
        std::map<std::pair<std::string, int>, double> heuristic_score;
        for (const ScoreRow& s : scores) {
            if (s.method == ScoreMethod::heuristic && !s.run_index) {
                heuristic_score[{s.design_id, static_cast<int>(s.principle)}] = s.value;
            }
        }
        std::vector<PairVerdictRow> judged;
        for (const ManifestRow& row : manifest) {
            if (row.is_original()) continue;
            const PerturbType type = perturb_type_from_string(row.type);
            for (Principle p : principles_for_type(type, true)) {
                auto a = heuristic_score.find({row.original_id, static_cast<int>(p)});
                auto b = heuristic_score.find({row.design_id, static_cast<int>(p)});
                if (a == heuristic_score.end() || b == heuristic_score.end()) continue;
                PairVerdictRow v;
                v.design_a = row.original_id;
                v.design_b = row.design_id;
                v.principle = p;
                v.final_choice =
                    heuristic_judge(a->second, b->second, cfg.pairwise_tie_margin);
                judged.push_back(std::move(v));
            }
        }
        for (AccuracySlice& s : pairwise_accuracy(judged, truth_of, level_of, "heuristic")) {
            report.accuracies.push_back(std::move(s));
        }
    }

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_file_atomic(out / "correlations.csv", write_correlations_csv(report.correlations));
    write_file_atomic(out / "spread.csv", write_spread_csv(report.spreads));
    write_file_atomic(out / "pairwise.csv", write_pairwise_csv(report.accuracies));
    if (format == "csv,svg") {
        write_file_atomic(out / "scatter.svg", chart_scatter(report.scatter));
        write_file_atomic(out / "correlation_by_level.svg",
                          chart_correlation_bars(report.correlations));
        write_file_atomic(out / "spread_box.svg", chart_spread_box(report.spreads));
        write_file_atomic(out / "pairwise_accuracy.svg",
                          chart_accuracy_bars(report.accuracies));
    }
    std::vector<std::string> inputs = score_files;
    if (!ratings_file.empty()) inputs.push_back(ratings_file);
    if (!manifest_file.empty()) inputs.push_back(manifest_file);
    if (!verdicts_file.empty()) inputs.push_back(verdicts_file);
    write_run_manifest(out, "analyze", cfg, opts.seed, inputs, {out_dir}, started,
                       clock->now());

    std::cout << "report written to " << out_dir << " (" << report.correlations.size()
              << " correlation slices, " << report.accuracies.size()
              << " accuracy slices)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphic-design principle scoring and evaluation pipeline"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOpts common;

    auto add_common = [&common](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON config file");
        sub->add_option("--seed", common.seed, "master seed");
        sub->add_flag("--deterministic", common.deterministic,
                      "logical timestamps for byte-identical reruns");
        sub->add_option("--jobs", common.jobs, "worker threads (default: hardware)");
    };

    // build-dataset
    std::string in_path, out_path;
    CLI::App* build = app.add_subcommand(
        "build-dataset", "perturb originals into a graded corpus with renders");
    build->add_option("--input", in_path, "directory of original documents")->required();
    build->add_option("--out", out_path, "corpus output directory")->required();
    add_common(build);

    // render
    std::string render_in, render_out;
    CLI::App* render_cmd = app.add_subcommand("render", "render one document to PNG");
    render_cmd->add_option("--input", render_in, "document file")->required();
    render_cmd->add_option("--out", render_out, "PNG output path")->required();

    // score-heuristic
    std::string sh_corpus, sh_out, sh_principles;
    CLI::App* sh = app.add_subcommand("score-heuristic",
                                      "score a corpus with the principle heuristics");
    sh->add_option("--input", sh_corpus, "corpus directory")->required();
    sh->add_option("--out", sh_out, "output directory")->required();
    sh->add_option("--principles", sh_principles, "comma list (default: all)");
    add_common(sh);

    // score-llm
    std::string sl_corpus, sl_out, sl_principles;
    ProviderOpts sl_prov;
    int sl_runs = 0;
    long long sl_budget = -1;
    bool sl_resume = true;
    CLI::App* sl = app.add_subcommand("score-llm", "score a corpus with the LMM judge");
    sl->add_option("--input", sl_corpus, "corpus directory")->required();
    sl->add_option("--out", sl_out, "output directory")->required();
    sl->add_option("--principles", sl_principles, "comma list (default: all)");
    sl->add_option("--provider", sl_prov.provider, "http | replay | stub");
    sl->add_option("--replay-file", sl_prov.replay_file, "transcript for replay provider");
    sl->add_option("--runs", sl_runs, "runs per item (default: config)");
    sl->add_option("--budget", sl_budget, "max requests this invocation");
    sl->add_flag("--resume,!--fresh", sl_resume,
                 "skip already-completed items (default) / recompute everything");
    add_common(sl);

    // pairwise
    std::string pw_corpus, pw_out, pw_pairing = "matched";
    ProviderOpts pw_prov;
    int pw_runs = 0;
    long long pw_budget = -1;
    bool pw_resume = true;
    CLI::App* pw = app.add_subcommand("pairwise",
                                      "judge (original, variant) pairs with the LMM");
    pw->add_option("--input", pw_corpus, "corpus directory")->required();
    pw->add_option("--out", pw_out, "output directory")->required();
    pw->add_option("--pairing", pw_pairing,
                   "matched (perturbation-specific principles) | all");
    pw->add_option("--provider", pw_prov.provider, "http | replay | stub");
    pw->add_option("--replay-file", pw_prov.replay_file, "transcript for replay provider");
    pw->add_option("--runs", pw_runs, "runs per pair (default: config)");
    pw->add_option("--budget", pw_budget, "max requests this invocation");
    pw->add_flag("--resume,!--fresh", pw_resume,
                 "skip already-completed pairs (default) / recompute everything");
    add_common(pw);

    // analyze
    std::vector<std::string> an_scores;
    std::string an_ratings, an_manifest, an_verdicts, an_pairwise_human, an_out;
    std::string an_format = "csv";
    bool an_heuristic_pairs = false;
    CLI::App* an = app.add_subcommand("analyze",
                                      "correlations, spreads and pairwise accuracy");
    an->add_option("--scores", an_scores, "scores CSV (repeatable)")->required();
    an->add_option("--ratings", an_ratings, "human ratings CSV");
    an->add_option("--manifest", an_manifest, "corpus manifest for level slicing");
    an->add_option("--pairwise-verdicts", an_verdicts, "verdicts CSV from pairwise");
    an->add_option("--pairwise-human", an_pairwise_human, "human pairwise ratings CSV");
    an->add_flag("--heuristic-pairs", an_heuristic_pairs,
                 "judge (original, variant) pairs from heuristic scores");
    an->add_option("--out", an_out, "report directory")->required();
    an->add_option("--format", an_format, "csv | csv,svg");
    add_common(an);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build) return cmd_build_dataset(in_path, out_path, common);
        if (*render_cmd) return cmd_render(render_in, render_out);
        if (*sh) return cmd_score_heuristic(sh_corpus, sh_out, sh_principles, common);
        if (*sl) {
            return cmd_score_llm(sl_corpus, sl_out, sl_principles, sl_prov, sl_runs,
                                 sl_budget, sl_resume, common);
        }
        if (*pw) {
            return cmd_pairwise(pw_corpus, pw_out, pw_pairing, pw_prov, pw_runs, pw_budget,
                                pw_resume, common);
        }
        if (*an) {
            return cmd_analyze(an_scores, an_ratings, an_manifest, an_verdicts,
                               an_pairwise_human, an_heuristic_pairs, an_out, an_format,
                               common);
        }
    } catch (const BudgetError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
