#include <catch2/catch.hpp>

#include "deval/corpus.hpp"
#include "deval/heuristics.hpp"
#include "deval/perturb.hpp"
#include "testutil.hpp"

using namespace deval;
using namespace testutil;

TEST_CASE("perturbations are deterministic under a fixed seed", "[perturb]") {
    Sampler rng(8001);
    const DesignDocument doc = aligned_column_document(rng, false);
    const auto [v1, r1] = perturb_x(doc, PerturbLevel::medium, 1234);
    const auto [v2, r2] = perturb_x(doc, PerturbLevel::medium, 1234);
    CHECK(v1 == v2);
    CHECK(r1.deltas == r2.deltas);
    const auto [f1, fr1] = perturb_font(doc, PerturbLevel::large, 99);
    const auto [f2, fr2] = perturb_font(doc, PerturbLevel::large, 99);
    CHECK(f1 == f2);
    CHECK(fr1.deltas == fr2.deltas);
}

TEST_CASE("x_shift touches only text bbox.x", "[perturb]") {
    Sampler rng(8002);
    const DesignDocument doc = aligned_column_document(rng, false);
    const auto [variant, rec] = perturb_x(doc, PerturbLevel::small, 7);
    REQUIRE(variant.elements.size() == doc.elements.size());
    const double width = doc.canvas.width;
    const PerturbConfig cfg;
    for (std::size_t i = 0; i < doc.elements.size(); ++i) {
        const Element& a = doc.elements[i];
        const Element& b = variant.elements[i];
        if (a.is_text()) {
            const double delta = b.bbox.x - a.bbox.x;
            const double u = std::abs(delta) / width;
            CHECK(u >= cfg.x_shift_small.lo);
            CHECK(u <= cfg.x_shift_small.hi);
            Element restored = b;
            restored.bbox.x = a.bbox.x;
            CHECK(restored == a); // nothing else moved
        } else {
            CHECK(a == b);
        }
    }
}

TEST_CASE("font_scale couples bbox to the factor", "[perturb]") {
    Sampler rng(8003);
    const DesignDocument doc = aligned_column_document(rng, false);
    const auto [variant, rec] = perturb_font(doc, PerturbLevel::medium, 21);
    std::map<std::string, double> factor(rec.deltas.begin(), rec.deltas.end());
    for (std::size_t i = 0; i < doc.elements.size(); ++i) {
        const Element& a = doc.elements[i];
        const Element& b = variant.elements[i];
        if (!a.is_text()) {
            CHECK(a == b);
            continue;
        }
        const double f = factor.at(a.id);
        CHECK(f >= PerturbConfig{}.font_scale_medium.lo);
        CHECK(f <= PerturbConfig{}.font_scale_medium.hi);
        CHECK(b.bbox.w / a.bbox.w == Approx(f));
        CHECK(b.bbox.h / a.bbox.h == Approx(f));
        CHECK(*b.font_size / *a.font_size == Approx(f));
        CHECK(b.bbox.x == a.bbox.x); // anchored at the top-left corner
        CHECK(b.bbox.y == a.bbox.y);
    }
}

TEST_CASE("documents without text perturb to flagged no-ops", "[perturb]") {
    const DesignDocument doc =
        make_doc(200, 200, {graphic_el("g1", 10, 10, 50, 50), graphic_el("g2", 100, 100, 40, 40)});
    const auto [variant, rec] = perturb_x(doc, PerturbLevel::large, 5);
    CHECK(rec.noop);
    CHECK(variant == doc);
}

TEST_CASE("replaying recorded deltas reproduces the variant exactly", "[perturb]") {
    Sampler rng(8004);
    for (int trial = 0; trial < 20; ++trial) {
        const DesignDocument doc = aligned_column_document(rng, trial % 4 == 3);
        for (PerturbType type : kAllPerturbTypes) {
            for (PerturbLevel level : kAllPerturbLevels) {
                const auto [variant, rec] = perturb(doc, type, level, rng.next_u64());
                const DesignDocument replayed = apply_record(doc, rec);
                REQUIRE(replayed == variant);
                REQUIRE(serialize_document(replayed) == serialize_document(variant));
            }
        }
    }
}

TEST_CASE("one original expands to seven corpus entries", "[perturb][corpus]") {
    Sampler rng(8005);
    const DesignDocument doc = aligned_column_document(rng, false);
    const auto corpus = build_corpus({{"d0", doc}}, 42);
    REQUIRE(corpus.size() == 7);
    CHECK(corpus[0].design_id == "d0");
    CHECK_FALSE(corpus[0].record.has_value());
    int variants = 0;
    for (const CorpusEntry& e : corpus) {
        if (e.record) {
            ++variants;
            CHECK(e.original_id == "d0");
            CHECK(e.design_id == variant_id_for("d0", e.record->type, e.record->level));
        }
    }
    CHECK(variants == 6);
}

TEST_CASE("corpus building is insensitive to input order", "[perturb][corpus]") {
    Sampler rng(8006);
    const DesignDocument d1 = aligned_column_document(rng, false);
    const DesignDocument d2 = aligned_column_document(rng, true);
    const auto ab = build_corpus({{"a", d1}, {"b", d2}}, 9);
    const auto ba = build_corpus({{"b", d2}, {"a", d1}}, 9);
    REQUIRE(ab.size() == ba.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
        CHECK(ab[i].design_id == ba[i].design_id);
        CHECK(ab[i].doc == ba[i].doc);
    }
}

TEST_CASE("duplicate original ids are rejected", "[perturb][corpus]") {
    Sampler rng(8007);
    const DesignDocument doc = aligned_column_document(rng, false);
    CHECK_THROWS_AS(build_corpus({{"x", doc}, {"x", doc}}, 1), ValidationError);
}

TEST_CASE("perturbation records serialize through JSONL", "[perturb][corpus]") {
    Sampler rng(8008);
    const DesignDocument doc = aligned_column_document(rng, false);
    const auto corpus = build_corpus({{"d", doc}}, 77);
    std::vector<PerturbationRecord> records;
    for (const CorpusEntry& e : corpus) {
        if (e.record) records.push_back(*e.record);
    }
    const std::string jsonl = write_records_jsonl(records);
    const std::vector<PerturbationRecord> back = load_records_jsonl(jsonl);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].variant_id == records[i].variant_id);
        CHECK(back[i].seed == records[i].seed);
        CHECK(back[i].deltas == records[i].deltas);
        // replay through the serialized record still reproduces the variant
        CHECK(apply_record(doc, back[i]) == corpus[i + 1].doc);
    }
}

TEST_CASE("large x shifts degrade alignment of a clean column", "[perturb][severity]") {
    Sampler rng(8009);
    int strictly_lower = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const DesignDocument doc = aligned_column_document(rng, false);
        const double before = score_alignment(doc).value;
        const auto [variant, rec] = perturb_x(doc, PerturbLevel::large, rng.next_u64());
        const double after = score_alignment(variant).value;
        if (after < before) ++strictly_lower;
    }
    CHECK(strictly_lower == 10);
}

TEST_CASE("large font scaling cannot improve overlap on dense columns",
          "[perturb][severity]") {
    Sampler rng(8010);
    for (int trial = 0; trial < 10; ++trial) {
        const DesignDocument doc = aligned_column_document(rng, false);
        const double before = score_overlap(doc).value;
        const auto [variant, rec] = perturb_font(doc, PerturbLevel::large, rng.next_u64());
        CHECK(score_overlap(variant).value <= before + 1e-12);
    }
}

TEST_CASE("shrink mode flips factors to reciprocals", "[perturb]") {
    Sampler gen(8011);
    const DesignDocument doc = aligned_column_document(gen, false);
    PerturbConfig cfg;
    cfg.font_allow_shrink = true;
    cfg.font_scale_small = {2.0, 2.0}; // pin the magnitude, leave only the coin flip
    bool saw_grow = false, saw_shrink = false;
    for (std::uint64_t seed = 0; seed < 20 && !(saw_grow && saw_shrink); ++seed) {
        const auto [variant, rec] = perturb_font(doc, PerturbLevel::small, seed, cfg);
        for (const auto& [id, f] : rec.deltas) {
            if (f == 2.0) saw_grow = true;
            if (f == 0.5) saw_shrink = true;
            CHECK((f == 2.0 || f == 0.5));
        }
    }
    CHECK(saw_grow);
    CHECK(saw_shrink);
}
