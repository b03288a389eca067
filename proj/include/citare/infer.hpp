#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "citare/detect.hpp"

namespace citare {

enum class Style : uint8_t { simple, wave, echo, compound };

inline std::string_view style_name(Style s) {
    switch (s) {
        case Style::simple: return "simple";
        case Style::wave: return "wave";
        case Style::echo: return "echo";
        case Style::compound: return "compound";
    }
    return "simple";
}

inline std::optional<Style> style_from(std::string_view name) {
    if (name == "simple") return Style::simple;
    if (name == "wave") return Style::wave;
    if (name == "echo") return Style::echo;
    if (name == "compound") return Style::compound;
    return std::nullopt;
}

// A detected quotation: the five-tuple locating it in the target and the
// verse, its (group-boosted) surprisal score, and its structural style.
// Fragments of one wave/echo phenomenon share a group_id; a quotation
// embedded in a compound gap additionally carries the enclosing group as
// parent_group_id.
struct Quotation {
    uint32_t s_start = 0;
    uint32_t s_size = 0;
    uint32_t verse_ix = 0;
    uint32_t b_start = 0;
    uint32_t b_size = 0;
    double score = 0.0;      // reported score (group total when grouped)
    double base_score = 0.0; // this fragment's own surprisal
    Style style = Style::simple;
    std::optional<uint32_t> group_id;
    std::optional<uint32_t> parent_group_id;
};

struct InferenceParams {
    double score_threshold = 21.0; // quotations scoring below this are discarded
    uint32_t neighbor_window = 150; // max intervening target words for same-verse linking
};

// Sum of -log2 P(verse word) over the aligned pairs. Rarity is a property
// of the quoted verse material, so the verse-side words feed the product.
inline double surprisal_score(const CandidateMatch& match, const PositionalIndex& index) {
    const Verse& verse = index.verse(match.verse_ix);
    double score = 0.0;
    for (const AlignedPair& p : match.alignment.pairs)
        score += -std::log2(index.token_probability(verse.tokens[p.verse_pos].surface));
    return score;
}

// Neighbor boosting and wave/echo labeling. Every candidate starts as a
// Simple quotation scored by its own surprisal; each candidate from the
// second onward looks back for the most recent same-verse candidate within
// neighbor_window. Linked candidates form a group whose score is the sum
// of the members' surprisals, reported by every member. The linking pair's
// style is echo when their verse spans overlap (re-quoted material) and
// wave when they are disjoint (complementary fragments).
inline std::vector<Quotation> boost_and_label(const CandidateSequence& candidates,
                                              const PositionalIndex& index,
                                              const InferenceParams& params) {
    const auto& ms = candidates.matches;
    std::vector<Quotation> quots(ms.size());
    for (size_t i = 0; i < ms.size(); ++i) {
        Quotation& q = quots[i];
        q.s_start = ms[i].target_span.start;
        q.s_size = ms[i].target_span.size;
        q.verse_ix = ms[i].verse_ix;
        q.b_start = ms[i].verse_span.start;
        q.b_size = ms[i].verse_span.size;
        q.base_score = surprisal_score(ms[i], index);
        q.score = q.base_score;
        q.style = Style::simple;
    }

    std::vector<double> group_total;
    std::vector<int32_t> group_of(ms.size(), -1);
    for (size_t i = 1; i < ms.size(); ++i) {
        // Most recent prior candidate of the same verse within the window.
        int32_t prior = -1;
        for (size_t j = i; j-- > 0;) {
            if (ms[j].verse_ix != ms[i].verse_ix) continue;
            uint32_t j_end = ms[j].target_span.end();
            uint32_t gap = ms[i].target_span.start > j_end
                               ? ms[i].target_span.start - j_end
                               : 0;
            if (gap <= params.neighbor_window) {
                prior = static_cast<int32_t>(j);
                break;
            }
        }
        if (prior < 0) continue;
        const size_t p = static_cast<size_t>(prior);
        if (group_of[p] < 0) {
            group_of[p] = static_cast<int32_t>(group_total.size());
            group_total.push_back(quots[p].base_score);
        }
        group_of[i] = group_of[p];
        group_total[static_cast<size_t>(group_of[p])] += quots[i].base_score;

        const WordSpan& vi = ms[i].verse_span;
        const WordSpan& vp = ms[p].verse_span;
        bool overlap = vi.start < vp.end() && vp.start < vi.end();
        Style pair_style = overlap ? Style::echo : Style::wave;
        quots[i].style = pair_style;
        quots[p].style = pair_style;
    }

    // Renumber groups by first-member order and publish group totals.
    std::map<int32_t, uint32_t> renumber;
    for (size_t i = 0; i < quots.size(); ++i) {
        if (group_of[i] < 0) continue;
        auto [it, inserted] =
            renumber.emplace(group_of[i], static_cast<uint32_t>(renumber.size()));
        quots[i].group_id = it->second;
        quots[i].score = group_total[static_cast<size_t>(group_of[i])];
    }
    return quots;
}

// Compound labeling: a group with fragment structure (at least one wave
// member) whose inter-fragment gaps contain a quotation of a different
// verse is relabeled compound; the embedded quotation keeps its own style
// and gains the enclosing group as parent.
inline void label_compound(std::vector<Quotation>& quots) {
    std::map<uint32_t, std::vector<size_t>> groups;
    for (size_t i = 0; i < quots.size(); ++i)
        if (quots[i].group_id) groups[*quots[i].group_id].push_back(i);

    for (const auto& [gid, members] : groups) {
        bool has_wave = false;
        for (size_t i : members) has_wave |= quots[i].style == Style::wave;
        if (!has_wave || members.size() < 2) continue;

        std::vector<size_t> sorted = members;
        std::sort(sorted.begin(), sorted.end(), [&](size_t a, size_t b) {
            return quots[a].s_start < quots[b].s_start;
        });
        bool compound = false;
        for (size_t k = 0; k + 1 < sorted.size(); ++k) {
            uint32_t gap_lo = quots[sorted[k]].s_start + quots[sorted[k]].s_size;
            uint32_t gap_hi = quots[sorted[k + 1]].s_start;
            if (gap_lo >= gap_hi) continue;
            for (size_t i = 0; i < quots.size(); ++i) {
                Quotation& q = quots[i];
                if (q.verse_ix == quots[sorted[0]].verse_ix) continue;
                if (q.s_start >= gap_lo && q.s_start + q.s_size <= gap_hi) {
                    compound = true;
                    if (!q.parent_group_id) q.parent_group_id = gid;
                }
            }
        }
        if (compound)
            for (size_t i : members) quots[i].style = Style::compound;
    }
}

// Quotations scoring below the threshold are discarded; a score exactly at
// the threshold survives. Grouped fragments all carry the group total, so
// groups live or die as a unit.
inline std::vector<Quotation> prune(std::vector<Quotation> quots, const InferenceParams& params) {
    std::vector<Quotation> out;
    out.reserve(quots.size());
    for (Quotation& q : quots)
        if (q.score >= params.score_threshold) out.push_back(std::move(q));
    return out;
}

// The whole inference stage. Compound labeling runs on the pruned set: a
// gap only makes its group compound when the embedded candidate is itself
// a surviving quotation, and parent links never dangle on pruned groups.
inline std::vector<Quotation> infer_quotations(const CandidateSequence& candidates,
                                               const PositionalIndex& index,
                                               const InferenceParams& params) {
    std::vector<Quotation> quots = prune(boost_and_label(candidates, index, params), params);
    label_compound(quots);
    return quots;
}

} // namespace citare
