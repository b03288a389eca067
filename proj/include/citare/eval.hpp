#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "citare/records.hpp"

namespace citare {

// How a detection is matched against a ground-truth entry: the verses must
// agree and the target-side spans must overlap by at least
// min_source_overlap of their union.
struct MatchPolicy {
    double min_source_overlap = 0.5;
    bool require_verse_equality = true;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline Metrics compute_metrics(size_t tp, size_t fp, size_t fn) {
    Metrics m;
    m.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

inline double span_overlap_ratio(uint32_t a_start, uint32_t a_size, uint32_t b_start,
                                 uint32_t b_size) {
    uint32_t lo = std::max(a_start, b_start);
    uint32_t hi = std::min(a_start + a_size, b_start + b_size);
    uint32_t inter = hi > lo ? hi - lo : 0;
    uint32_t uni = a_size + b_size - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct MatchResult {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    // (detected index, ground-truth index) for every matched pair.
    std::vector<std::pair<size_t, size_t>> pairs;
};

// Greedy one-to-one matching in s_start order: each detection takes the
// first unmatched ground-truth entry (in s_start order) with the same verse
// and sufficient source-span overlap.
inline MatchResult match_quotations(std::span<const QuotationRecord> detected,
                                    std::span<const GroundTruthEntry> gt,
                                    const MatchPolicy& policy) {
    for (const QuotationRecord& r : detected)
        if (r.doc != detected.front().doc)
            throw Error("detected quotations span multiple documents: \"" +
                        detected.front().doc + "\" vs \"" + r.doc + "\"");
    for (const GroundTruthEntry& e : gt)
        if (e.doc != gt.front().doc)
            throw Error("ground truth spans multiple documents: \"" + gt.front().doc +
                        "\" vs \"" + e.doc + "\"");
    if (!detected.empty() && !gt.empty() && detected.front().doc != gt.front().doc)
        throw Error("document id mismatch: detected \"" + detected.front().doc +
                    "\" vs ground truth \"" + gt.front().doc + "\"");

    std::vector<size_t> d_order(detected.size()), g_order(gt.size());
    for (size_t i = 0; i < d_order.size(); ++i) d_order[i] = i;
    for (size_t i = 0; i < g_order.size(); ++i) g_order[i] = i;
    std::stable_sort(d_order.begin(), d_order.end(), [&](size_t a, size_t b) {
        return detected[a].s_start < detected[b].s_start;
    });
    std::stable_sort(g_order.begin(), g_order.end(),
                     [&](size_t a, size_t b) { return gt[a].s_start < gt[b].s_start; });

    std::vector<bool> gt_taken(gt.size(), false);
    MatchResult res;
    for (size_t di : d_order) {
        const QuotationRecord& d = detected[di];
        for (size_t gi : g_order) {
            if (gt_taken[gi]) continue;
            const GroundTruthEntry& g = gt[gi];
            if (policy.require_verse_equality && d.b_verse != g.b_verse) continue;
            if (span_overlap_ratio(d.s_start, d.s_size, g.s_start, g.s_size) <
                policy.min_source_overlap)
                continue;
            gt_taken[gi] = true;
            res.pairs.emplace_back(di, gi);
            break;
        }
    }
    res.tp = res.pairs.size();
    res.fp = detected.size() - res.tp;
    res.fn = gt.size() - res.tp;
    return res;
}

struct StyleCounts {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
};

struct EvalReport {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    Metrics metrics;
    // Keyed by ground-truth style for tp/fn and by detected style for fp.
    std::map<std::string, StyleCounts> per_style;
    // Fraction per style over the detected set; compound counts under wave.
    std::map<std::string, double> style_distribution;
    size_t compound_count = 0;     // detected quotations labeled compound
    size_t style_agree_count = 0;  // matched pairs whose styles agree
    double style_agreement = 0.0;  // style_agree_count / tp
};

// Fractions per style over the given quotations. Compound groups are folded
// into wave for distribution reporting (the taxonomy's three top rows);
// callers wanting the raw compound count read it off EvalReport.
inline std::map<std::string, double> style_distribution(std::span<const QuotationRecord> quots) {
    std::map<std::string, double> out;
    if (quots.empty()) return out;
    std::map<std::string, size_t> counts;
    for (const QuotationRecord& q : quots) {
        std::string s = q.style == "compound" ? "wave" : q.style;
        counts[s]++;
    }
    for (const auto& [style, c] : counts)
        out[style] = static_cast<double>(c) / static_cast<double>(quots.size());
    return out;
}

inline EvalReport evaluate(std::span<const QuotationRecord> detected,
                           std::span<const GroundTruthEntry> gt, const MatchPolicy& policy) {
    MatchResult mr = match_quotations(detected, gt, policy);
    EvalReport rep;
    rep.tp = mr.tp;
    rep.fp = mr.fp;
    rep.fn = mr.fn;
    rep.metrics = compute_metrics(mr.tp, mr.fp, mr.fn);

    std::vector<bool> d_matched(detected.size(), false), g_matched(gt.size(), false);
    size_t agree = 0;
    for (const auto& [di, gi] : mr.pairs) {
        d_matched[di] = true;
        g_matched[gi] = true;
        rep.per_style[gt[gi].style].tp++;
        if (detected[di].style == gt[gi].style) ++agree;
    }
    for (size_t i = 0; i < detected.size(); ++i)
        if (!d_matched[i]) rep.per_style[detected[i].style].fp++;
    for (size_t i = 0; i < gt.size(); ++i)
        if (!g_matched[i]) rep.per_style[gt[i].style].fn++;
    rep.style_agree_count = agree;
    rep.style_agreement = mr.pairs.empty()
                              ? 0.0
                              : static_cast<double>(agree) / static_cast<double>(mr.pairs.size());
    rep.style_distribution = style_distribution(detected);
    for (const QuotationRecord& q : detected)
        if (q.style == "compound") rep.compound_count++;
    return rep;
}

// Multi-document evaluation: per-document reports plus micro-averaged
// counts (summed before computing metrics) and macro-averaged metrics
// (mean of the per-document values).
struct MultiDocReport {
    std::map<std::string, EvalReport> per_doc;
    EvalReport micro;
    Metrics macro;
};

inline MultiDocReport evaluate_multi(std::span<const QuotationRecord> detected,
                                     std::span<const GroundTruthEntry> gt,
                                     const MatchPolicy& policy) {
    std::map<std::string, std::pair<std::vector<QuotationRecord>, std::vector<GroundTruthEntry>>>
        by_doc;
    for (const QuotationRecord& r : detected) by_doc[r.doc].first.push_back(r);
    for (const GroundTruthEntry& e : gt) by_doc[e.doc].second.push_back(e);

    MultiDocReport out;
    size_t agree_pairs = 0;
    for (const auto& [doc, lists] : by_doc) {
        EvalReport rep = evaluate(lists.first, lists.second, policy);
        out.micro.tp += rep.tp;
        out.micro.fp += rep.fp;
        out.micro.fn += rep.fn;
        out.micro.compound_count += rep.compound_count;
        for (const auto& [style, c] : rep.per_style) {
            out.micro.per_style[style].tp += c.tp;
            out.micro.per_style[style].fp += c.fp;
            out.micro.per_style[style].fn += c.fn;
        }
        agree_pairs += rep.style_agree_count;
        out.macro.precision += rep.metrics.precision;
        out.macro.recall += rep.metrics.recall;
        out.macro.f1 += rep.metrics.f1;
        out.per_doc.emplace(doc, std::move(rep));
    }
    out.micro.metrics = compute_metrics(out.micro.tp, out.micro.fp, out.micro.fn);
    out.micro.style_distribution = style_distribution(detected);
    out.micro.style_agree_count = agree_pairs;
    out.micro.style_agreement =
        out.micro.tp == 0 ? 0.0
                          : static_cast<double>(agree_pairs) / static_cast<double>(out.micro.tp);
    if (!out.per_doc.empty()) {
        double n = static_cast<double>(out.per_doc.size());
        out.macro.precision /= n;
        out.macro.recall /= n;
        out.macro.f1 /= n;
    }
    return out;
}

struct SweepRow {
    double threshold = 0.0;
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    Metrics metrics;
};

// Prune-then-evaluate at each threshold. Input quotations must carry their
// pre-prune (boosted) scores; rows come back in ascending threshold order.
inline std::vector<SweepRow> threshold_sweep(std::span<const QuotationRecord> pre_prune,
                                             std::span<const GroundTruthEntry> gt,
                                             std::vector<double> thresholds,
                                             const MatchPolicy& policy) {
    std::sort(thresholds.begin(), thresholds.end());
    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds) {
        std::vector<QuotationRecord> kept;
        for (const QuotationRecord& q : pre_prune)
            if (q.score >= t) kept.push_back(q);
        MatchResult mr = match_quotations(kept, gt, policy);
        SweepRow row;
        row.threshold = t;
        row.tp = mr.tp;
        row.fp = mr.fp;
        row.fn = mr.fn;
        row.metrics = compute_metrics(mr.tp, mr.fp, mr.fn);
        rows.push_back(row);
    }
    return rows;
}

} // namespace citare
