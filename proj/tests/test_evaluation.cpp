#include <gtest/gtest.h>

#include <random>

#include "citare/eval.hpp"
#include "testutil.hpp"

using namespace citare;

namespace {

QuotationRecord det(uint32_t s_start, uint32_t s_size, const std::string& verse,
                    uint32_t b_start = 0, uint32_t b_size = 1, double score = 30.0,
                    const std::string& style = "simple") {
    QuotationRecord r;
    r.doc = "doc";
    r.s_start = s_start;
    r.s_size = s_size;
    r.b_verse = verse;
    r.b_start = b_start;
    r.b_size = b_size;
    r.score = score;
    r.style = style;
    return r;
}

GroundTruthEntry gt(uint32_t s_start, uint32_t s_size, const std::string& verse,
                    uint32_t b_start = 0, uint32_t b_size = 1,
                    const std::string& style = "simple") {
    GroundTruthEntry e;
    e.doc = "doc";
    e.s_start = s_start;
    e.s_size = s_size;
    e.b_verse = verse;
    e.b_start = b_start;
    e.b_size = b_size;
    e.style = style;
    return e;
}

const MatchPolicy kPolicy{};

// ---------------------------------------------------------------------
// match_quotations

TEST(Match, ExactMatchIsAllTruePositives) {
    std::vector<QuotationRecord> d = {det(0, 3, "Genesis 1:1"), det(10, 2, "Exodus 2:2")};
    std::vector<GroundTruthEntry> g = {gt(0, 3, "Genesis 1:1"), gt(10, 2, "Exodus 2:2")};
    auto res = match_quotations(d, g, kPolicy);
    EXPECT_EQ(res.tp, 2u);
    EXPECT_EQ(res.fp, 0u);
    EXPECT_EQ(res.fn, 0u);
    auto m = compute_metrics(res.tp, res.fp, res.fn);
    EXPECT_DOUBLE_EQ(m.precision, 1.0);
    EXPECT_DOUBLE_EQ(m.recall, 1.0);
    EXPECT_DOUBLE_EQ(m.f1, 1.0);
}

TEST(Match, EmptyDetectedGivesZeroByConvention) {
    std::vector<GroundTruthEntry> g = {gt(0, 3, "Genesis 1:1")};
    auto res = match_quotations({}, g, kPolicy);
    EXPECT_EQ(res.tp, 0u);
    EXPECT_EQ(res.fn, 1u);
    auto m = compute_metrics(res.tp, res.fp, res.fn);
    EXPECT_DOUBLE_EQ(m.precision, 0.0);
    EXPECT_DOUBLE_EQ(m.recall, 0.0);
    EXPECT_DOUBLE_EQ(m.f1, 0.0);
}

TEST(Match, VerseEqualityRequired) {
    std::vector<QuotationRecord> d = {det(0, 3, "Genesis 1:1")};
    std::vector<GroundTruthEntry> g = {gt(0, 3, "Genesis 1:2")};
    auto res = match_quotations(d, g, kPolicy);
    EXPECT_EQ(res.tp, 0u);
    EXPECT_EQ(res.fp, 1u);
    EXPECT_EQ(res.fn, 1u);
}

TEST(Match, BoundaryShiftedDetectionsAtOverlapPointSix) {
    // spans of size 8 shifted by 2: intersection 6, union 10, ratio 0.6
    std::vector<QuotationRecord> d = {det(2, 8, "Genesis 1:1"), det(52, 8, "Genesis 1:2")};
    std::vector<GroundTruthEntry> g = {gt(0, 8, "Genesis 1:1"), gt(50, 8, "Genesis 1:2")};
    MatchPolicy loose;
    loose.min_source_overlap = 0.5;
    auto res = match_quotations(d, g, loose);
    EXPECT_EQ(res.tp, 2u);
    MatchPolicy strict;
    strict.min_source_overlap = 0.7;
    auto res2 = match_quotations(d, g, strict);
    EXPECT_EQ(res2.tp, 0u);
    EXPECT_EQ(res2.fp, 2u);
    EXPECT_EQ(res2.fn, 2u);
}

TEST(Match, OneToOneNoDoubleCounting) {
    // two detections over one ground-truth entry: one tp, one fp
    std::vector<QuotationRecord> d = {det(0, 4, "Genesis 1:1"), det(1, 4, "Genesis 1:1")};
    std::vector<GroundTruthEntry> g = {gt(0, 4, "Genesis 1:1")};
    auto res = match_quotations(d, g, kPolicy);
    EXPECT_EQ(res.tp, 1u);
    EXPECT_EQ(res.fp, 1u);
    EXPECT_EQ(res.fn, 0u);
}

TEST(Match, DocumentMismatchIsAnError) {
    std::vector<QuotationRecord> d = {det(0, 3, "Genesis 1:1")};
    std::vector<GroundTruthEntry> g = {gt(0, 3, "Genesis 1:1")};
    g[0].doc = "otherdoc";
    EXPECT_THROW(match_quotations(d, g, kPolicy), Error);
}

TEST(Match, CountSymmetricUnderRoleSwap) {
    // tp counted from the detected side equals tp from the gt side
    std::mt19937 rng(21);
    std::uniform_int_distribution<uint32_t> start(0, 60);
    std::uniform_int_distribution<uint32_t> size(1, 6);
    std::uniform_int_distribution<int> verse(1, 3);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<QuotationRecord> d;
        std::vector<GroundTruthEntry> g;
        for (int i = 0; i < 8; ++i) {
            d.push_back(det(start(rng), size(rng),
                            "Genesis 1:" + std::to_string(verse(rng))));
            g.push_back(gt(start(rng), size(rng),
                           "Genesis 1:" + std::to_string(verse(rng))));
        }
        auto forward = match_quotations(d, g, kPolicy);
        // swap roles
        std::vector<QuotationRecord> d2;
        std::vector<GroundTruthEntry> g2;
        for (const auto& e : g) d2.push_back(det(e.s_start, e.s_size, e.b_verse));
        for (const auto& r : d) g2.push_back(gt(r.s_start, r.s_size, r.b_verse));
        auto backward = match_quotations(d2, g2, kPolicy);
        EXPECT_EQ(forward.tp, backward.tp);
    }
}

// ---------------------------------------------------------------------
// compute_metrics

TEST(Metrics, HeadlineShapeRow) {
    auto m = compute_metrics(89, 6, 11);
    EXPECT_NEAR(m.precision, 0.937, 1e-3);
    EXPECT_NEAR(m.recall, 0.89, 1e-12);
    EXPECT_NEAR(m.f1, 0.913, 1e-3);
}

TEST(Metrics, ZeroConventions) {
    auto m = compute_metrics(0, 0, 0);
    EXPECT_DOUBLE_EQ(m.precision, 0.0);
    EXPECT_DOUBLE_EQ(m.recall, 0.0);
    EXPECT_DOUBLE_EQ(m.f1, 0.0);
}

TEST(Metrics, OneEach) {
    auto m = compute_metrics(1, 1, 1);
    EXPECT_DOUBLE_EQ(m.precision, 0.5);
    EXPECT_DOUBLE_EQ(m.recall, 0.5);
    EXPECT_DOUBLE_EQ(m.f1, 0.5);
}

TEST(Metrics, IdentityAgainstIndependentFormula) {
    std::mt19937 rng(33);
    std::uniform_int_distribution<size_t> count(0, 500);
    for (int iter = 0; iter < 2000; ++iter) {
        size_t tp = count(rng), fp = count(rng), fn = count(rng);
        auto m = compute_metrics(tp, fp, fn);
        double p = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
        double r = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
        double f = p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
        EXPECT_NEAR(m.precision, p, 1e-12);
        EXPECT_NEAR(m.recall, r, 1e-12);
        EXPECT_NEAR(m.f1, f, 1e-12);
        if (p + r > 0) {
            EXPECT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-12);
        }
    }
}

// ---------------------------------------------------------------------
// threshold_sweep

std::vector<QuotationRecord> scored_detections() {
    std::vector<QuotationRecord> d;
    for (uint32_t i = 0; i < 10; ++i)
        d.push_back(det(i * 10, 3, "Genesis 1:" + std::to_string(i + 1), 0, 3,
                        /*score=*/4.0 * i));
    return d;
}

std::vector<GroundTruthEntry> sweep_gt() {
    std::vector<GroundTruthEntry> g;
    for (uint32_t i = 0; i < 10; ++i)
        g.push_back(gt(i * 10, 3, "Genesis 1:" + std::to_string(i + 1), 0, 3));
    return g;
}

TEST(Sweep, ZeroThresholdKeepsEverything) {
    auto rows = threshold_sweep(scored_detections(), sweep_gt(), {0.0}, kPolicy);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_DOUBLE_EQ(rows[0].metrics.recall, 1.0);
}

TEST(Sweep, InfiniteThresholdPrunesEverything) {
    auto rows = threshold_sweep(scored_detections(), sweep_gt(),
                                {std::numeric_limits<double>::infinity()}, kPolicy);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_DOUBLE_EQ(rows[0].metrics.recall, 0.0);
    EXPECT_EQ(rows[0].fn, 10u);
}

TEST(Sweep, RecallNonIncreasingAndSortedOutput) {
    std::vector<double> thresholds = {40, 0, 10, 5, 20, 15, 35, 25, 30};
    auto rows = threshold_sweep(scored_detections(), sweep_gt(), thresholds, kPolicy);
    ASSERT_EQ(rows.size(), thresholds.size());
    for (size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i].threshold, rows[i - 1].threshold); // ascending
        EXPECT_LE(rows[i].metrics.recall, rows[i - 1].metrics.recall);
    }
}

TEST(Sweep, BestF1MatchesRecomputation) {
    // detections 0..9 are correct, two spurious high-scoring ones hurt precision
    auto d = scored_detections();
    d.push_back(det(500, 3, "Exodus 9:9", 0, 3, 50.0));
    d.push_back(det(600, 3, "Exodus 9:8", 0, 3, 45.0));
    auto g = sweep_gt();
    std::vector<double> thresholds = {0, 5, 10, 15, 20, 25, 30, 35, 40};
    auto rows = threshold_sweep(d, g, thresholds, kPolicy);
    double best_f1 = -1.0, best_t = 0.0;
    for (const auto& row : rows) {
        if (row.metrics.f1 > best_f1) {
            best_f1 = row.metrics.f1;
            best_t = row.threshold;
        }
    }
    // recompute directly at each threshold
    for (const auto& row : rows) {
        std::vector<QuotationRecord> kept;
        for (const auto& q : d)
            if (q.score >= row.threshold) kept.push_back(q);
        auto mr = match_quotations(kept, g, kPolicy);
        auto m = compute_metrics(mr.tp, mr.fp, mr.fn);
        EXPECT_NEAR(m.f1, row.metrics.f1, 1e-12);
    }
    EXPECT_DOUBLE_EQ(best_t, 0.0); // pruning only loses true positives here
    EXPECT_GT(best_f1, 0.0);
}

// ---------------------------------------------------------------------
// style distribution

TEST(StyleDistribution, BasicFractions) {
    std::vector<QuotationRecord> quots;
    for (int i = 0; i < 6; ++i) quots.push_back(det(i, 1, "Genesis 1:1", 0, 1, 30, "simple"));
    for (int i = 0; i < 3; ++i) quots.push_back(det(i + 6, 1, "Genesis 1:1", 0, 1, 30, "echo"));
    quots.push_back(det(9, 1, "Genesis 1:1", 0, 1, 30, "wave"));
    auto dist = style_distribution(quots);
    EXPECT_DOUBLE_EQ(dist["simple"], 0.6);
    EXPECT_DOUBLE_EQ(dist["echo"], 0.3);
    EXPECT_DOUBLE_EQ(dist["wave"], 0.1);
}

TEST(StyleDistribution, AllSimple) {
    std::vector<QuotationRecord> quots = {det(0, 1, "Genesis 1:1"), det(1, 1, "Genesis 1:1")};
    auto dist = style_distribution(quots);
    ASSERT_EQ(dist.size(), 1u);
    EXPECT_DOUBLE_EQ(dist["simple"], 1.0);
}

TEST(StyleDistribution, EmptyInput) {
    EXPECT_TRUE(style_distribution({}).empty());
}

TEST(StyleDistribution, CompoundCountsUnderWave) {
    std::vector<QuotationRecord> quots = {
        det(0, 1, "Genesis 1:1", 0, 1, 30, "compound"),
        det(1, 1, "Genesis 1:1", 0, 1, 30, "wave"),
        det(2, 1, "Genesis 1:1", 0, 1, 30, "simple"),
        det(3, 1, "Genesis 1:1", 0, 1, 30, "simple"),
    };
    auto dist = style_distribution(quots);
    EXPECT_DOUBLE_EQ(dist["wave"], 0.5);
    EXPECT_DOUBLE_EQ(dist["simple"], 0.5);
    EXPECT_EQ(dist.count("compound"), 0u);
}

// Engineered 48/25/27 split, the shape of a per-work distribution table.
TEST(StyleDistribution, EngineeredSplit) {
    std::vector<QuotationRecord> quots;
    uint32_t pos = 0;
    for (int i = 0; i < 48; ++i) quots.push_back(det(pos++, 1, "Genesis 1:1", 0, 1, 30, "simple"));
    for (int i = 0; i < 25; ++i) quots.push_back(det(pos++, 1, "Genesis 1:1", 0, 1, 30, "echo"));
    for (int i = 0; i < 27; ++i) quots.push_back(det(pos++, 1, "Genesis 1:1", 0, 1, 30, "wave"));
    auto dist = style_distribution(quots);
    EXPECT_DOUBLE_EQ(dist["simple"], 0.48);
    EXPECT_DOUBLE_EQ(dist["echo"], 0.25);
    EXPECT_DOUBLE_EQ(dist["wave"], 0.27);
    double sum = 0.0;
    for (const auto& [style, frac] : dist) sum += frac;
    EXPECT_NEAR(sum, 1.0, 1e-9);
}

// ---------------------------------------------------------------------
// evaluate (full report)

TEST(Evaluate, MultiDocMicroAndMacro) {
    std::vector<QuotationRecord> d = {det(0, 3, "Genesis 1:1"), det(10, 3, "Genesis 1:2")};
    d[1].doc = "b";
    std::vector<GroundTruthEntry> g = {gt(0, 3, "Genesis 1:1"), gt(10, 3, "Genesis 1:2"),
                                       gt(20, 3, "Genesis 1:3")};
    g[1].doc = "b";
    g[2].doc = "b";
    MultiDocReport rep = evaluate_multi(d, g, kPolicy);
    ASSERT_EQ(rep.per_doc.size(), 2u);
    // doc: 1/1 matched; b: 1 matched of 2 gt
    EXPECT_DOUBLE_EQ(rep.per_doc["doc"].metrics.f1, 1.0);
    EXPECT_DOUBLE_EQ(rep.per_doc["b"].metrics.recall, 0.5);
    // micro: tp=2 fp=0 fn=1
    EXPECT_EQ(rep.micro.tp, 2u);
    EXPECT_EQ(rep.micro.fn, 1u);
    EXPECT_DOUBLE_EQ(rep.micro.metrics.precision, 1.0);
    EXPECT_DOUBLE_EQ(rep.micro.metrics.recall, 2.0 / 3.0);
    // macro: mean of per-doc metrics
    EXPECT_DOUBLE_EQ(rep.macro.precision, 1.0);
    EXPECT_DOUBLE_EQ(rep.macro.recall, 0.75);
    EXPECT_DOUBLE_EQ(rep.macro.f1,
                     (1.0 + rep.per_doc["b"].metrics.f1) / 2.0);
}

TEST(Evaluate, PerStyleCountsAndAgreement) {
    std::vector<QuotationRecord> d = {
        det(0, 3, "Genesis 1:1", 0, 3, 30, "simple"),
        det(10, 3, "Genesis 1:2", 0, 3, 30, "wave"),   // style disagrees with gt
        det(40, 3, "Genesis 1:4", 0, 3, 30, "simple"), // spurious
    };
    std::vector<GroundTruthEntry> g = {
        gt(0, 3, "Genesis 1:1", 0, 3, "simple"),
        gt(10, 3, "Genesis 1:2", 0, 3, "echo"),
        gt(20, 3, "Genesis 1:3", 0, 3, "wave"), // missed
    };
    EvalReport rep = evaluate(d, g, kPolicy);
    EXPECT_EQ(rep.tp, 2u);
    EXPECT_EQ(rep.fp, 1u);
    EXPECT_EQ(rep.fn, 1u);
    EXPECT_EQ(rep.per_style["simple"].tp, 1u);
    EXPECT_EQ(rep.per_style["echo"].tp, 1u);
    EXPECT_EQ(rep.per_style["wave"].fn, 1u);
    EXPECT_EQ(rep.per_style["simple"].fp, 1u);
    EXPECT_DOUBLE_EQ(rep.style_agreement, 0.5);
}

} // namespace
