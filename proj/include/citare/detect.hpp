#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <thread>
#include <vector>

#include "citare/align.hpp"
#include "citare/index.hpp"

namespace citare {

struct DetectionParams {
    uint32_t ngram_size = 1;
    uint32_t stride = 1;
    uint32_t max_candidates_per_window = 50;
    uint32_t verse_context_radius = 15; // verse words handed to the aligner around a hit
};

struct Window {
    uint32_t start = 0;
    uint32_t size = 0;
    bool operator==(const Window&) const = default;
};

// Window starts walk the stride grid. Every full-size window is emitted,
// then shorter tail windows continue on the same grid until the text runs
// out, so trailing words stay searchable for any n-gram size.
inline std::vector<Window> sliding_windows(size_t token_count, const DetectionParams& params) {
    std::vector<Window> out;
    if (params.ngram_size == 0 || params.stride == 0)
        throw Error("ngram_size and stride must be >= 1");
    for (size_t start = 0; start < token_count; start += params.stride) {
        uint32_t size = static_cast<uint32_t>(
            std::min<size_t>(params.ngram_size, token_count - start));
        out.push_back({static_cast<uint32_t>(start), size});
    }
    return out;
}

// A clustered index hit: a verse region worth aligning against, tagged with
// the surprisal of the rarest window token that produced it.
struct Anchor {
    uint32_t verse_ix = 0;
    uint32_t pos_lo = 0;
    uint32_t pos_hi = 0; // inclusive
    double surprisal = 0.0;
};

// Queries the index for every window token and clusters the postings per
// verse (hits within verse_context_radius of each other collapse into one
// anchor). When a window yields more anchors than the cap, the rarest-token
// anchors win.
inline std::vector<Anchor> retrieve_candidates(std::span<const Token> window_tokens,
                                               const PositionalIndex& index,
                                               const DetectionParams& params) {
    struct Hit {
        uint32_t verse_ix;
        uint32_t pos;
        double surprisal;
    };
    std::vector<Hit> hits;
    std::set<std::string_view> seen;
    for (const Token& t : window_tokens) {
        if (!seen.insert(t.surface).second) continue;
        auto postings = index.lookup(t.surface);
        if (postings.empty()) continue;
        double surprisal = -std::log2(index.token_probability(t.surface));
        for (const Posting& p : postings)
            hits.push_back({p.verse_ix, p.word_position, surprisal});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return std::tie(a.verse_ix, a.pos) < std::tie(b.verse_ix, b.pos);
    });
    std::vector<Anchor> anchors;
    for (const Hit& h : hits) {
        if (!anchors.empty() && anchors.back().verse_ix == h.verse_ix &&
            h.pos - anchors.back().pos_hi <= params.verse_context_radius) {
            anchors.back().pos_hi = h.pos;
            anchors.back().surprisal = std::max(anchors.back().surprisal, h.surprisal);
        } else {
            anchors.push_back({h.verse_ix, h.pos, h.pos, h.surprisal});
        }
    }
    if (anchors.size() > params.max_candidates_per_window) {
        std::stable_sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) {
            if (a.surprisal != b.surprisal) return a.surprisal > b.surprisal;
            return std::tie(a.verse_ix, a.pos_lo) < std::tie(b.verse_ix, b.pos_lo);
        });
        anchors.resize(params.max_candidates_per_window);
        std::sort(anchors.begin(), anchors.end(), [](const Anchor& a, const Anchor& b) {
            return std::tie(a.verse_ix, a.pos_lo) < std::tie(b.verse_ix, b.pos_lo);
        });
    }
    return anchors;
}

// An aligned (target span, verse span) pair. Spans are the bounding boxes
// of the alignment pairs, in absolute word positions.
struct CandidateMatch {
    WordSpan target_span;
    uint32_t verse_ix = 0;
    WordSpan verse_span;
    AlignmentResult alignment;
    uint32_t order_key() const { return target_span.start; }
};

// Candidates sorted by target order, with a forward link from each match to
// the next match of the same verse later in the target (or -1).
struct CandidateSequence {
    std::vector<CandidateMatch> matches;
    std::vector<int32_t> next_same_verse;
};

namespace detail {

inline bool spans_touch(const WordSpan& a, const WordSpan& b) {
    return a.start <= b.end() && b.start <= a.end();
}

// Aligns a target range against a verse region and rebases the result to
// absolute positions.
inline std::optional<CandidateMatch> align_region(std::span<const Token> target,
                                                  uint32_t t_begin, uint32_t t_size,
                                                  const PositionalIndex& index,
                                                  uint32_t verse_ix, uint32_t region_lo,
                                                  uint32_t region_hi, // exclusive
                                                  const AlignmentParams& align_params) {
    const Verse& verse = index.verse(verse_ix);
    std::vector<std::string_view> w, v;
    w.reserve(t_size);
    for (uint32_t i = 0; i < t_size; ++i) w.push_back(target[t_begin + i].surface);
    v.reserve(region_hi - region_lo);
    for (uint32_t j = region_lo; j < region_hi; ++j) v.push_back(verse.tokens[j].surface);
    auto res = local_align(std::span<const std::string_view>(w),
                           std::span<const std::string_view>(v), align_params);
    if (!res) return std::nullopt;
    for (AlignedPair& p : res->pairs) {
        p.target_pos += t_begin;
        p.verse_pos += region_lo;
    }
    res->target_span.start += t_begin;
    res->verse_span.start += region_lo;
    CandidateMatch m;
    m.target_span = res->target_span;
    m.verse_ix = verse_ix;
    m.verse_span = res->verse_span;
    m.alignment = std::move(*res);
    return m;
}

// Overlapping windows produce duplicate fragments of the same verse; two
// matches merge when both their target spans and their verse spans overlap
// or touch. The merged alignment is re-run over the union target range so
// the result stays alignment-backed.
inline std::vector<CandidateMatch> merge_matches(std::vector<CandidateMatch> matches,
                                                 std::span<const Token> target,
                                                 const PositionalIndex& index,
                                                 const AlignmentParams& align_params,
                                                 const DetectionParams& detect_params) {
    std::map<uint32_t, std::vector<CandidateMatch>> by_verse;
    for (CandidateMatch& m : matches) by_verse[m.verse_ix].push_back(std::move(m));
    std::vector<CandidateMatch> out;
    for (auto& [verse_ix, group] : by_verse) {
        const uint32_t verse_len = static_cast<uint32_t>(index.verse(verse_ix).tokens.size());
        auto span_key = [](const CandidateMatch& m) {
            return std::tuple(m.target_span.start, m.target_span.size, m.verse_span.start,
                              m.verse_span.size);
        };
        std::sort(group.begin(), group.end(), [&](const CandidateMatch& a, const CandidateMatch& b) {
            return span_key(a) < span_key(b);
        });
        group.erase(std::unique(group.begin(), group.end(),
                                [&](const CandidateMatch& a, const CandidateMatch& b) {
                                    return span_key(a) == span_key(b);
                                }),
                    group.end());
        bool merged_any = true;
        while (merged_any) {
            merged_any = false;
            for (size_t i = 0; i < group.size() && !merged_any; ++i) {
                for (size_t j = i + 1; j < group.size() && !merged_any; ++j) {
                    if (!spans_touch(group[i].target_span, group[j].target_span) ||
                        !spans_touch(group[i].verse_span, group[j].verse_span))
                        continue;
                    uint32_t t_lo = std::min(group[i].target_span.start, group[j].target_span.start);
                    uint32_t t_hi = std::max(group[i].target_span.end(), group[j].target_span.end());
                    uint32_t v_lo = std::min(group[i].verse_span.start, group[j].verse_span.start);
                    uint32_t v_hi = std::max(group[i].verse_span.end(), group[j].verse_span.end());
                    uint32_t r = detect_params.verse_context_radius;
                    uint32_t region_lo = v_lo > r ? v_lo - r : 0;
                    uint32_t region_hi = std::min(verse_len, v_hi + r);
                    auto merged = align_region(target, t_lo, t_hi - t_lo, index, verse_ix,
                                               region_lo, region_hi, align_params);
                    if (!merged) continue; // keep the fragments as they are
                    // A merge may not lose aligned target words (duplicate
                    // words in the union can collapse); if it would, the
                    // fragments stay separate.
                    std::set<uint32_t> covered;
                    for (const AlignedPair& p : merged->alignment.pairs)
                        covered.insert(p.target_pos);
                    bool lossless = true;
                    for (const CandidateMatch* part : {&group[i], &group[j]})
                        for (const AlignedPair& p : part->alignment.pairs)
                            lossless &= covered.count(p.target_pos) > 0;
                    if (!lossless) continue;
                    group.erase(group.begin() + static_cast<ptrdiff_t>(j));
                    group[i] = std::move(*merged);
                    merged_any = true;
                }
            }
        }
        for (CandidateMatch& m : group) out.push_back(std::move(m));
    }
    return out;
}

} // namespace detail

// Full candidate stage: slide windows, query the index, align every anchor
// region, merge duplicates, and return the target-ordered sequence with
// same-verse forward links. Window processing parallelizes across `jobs`
// threads; results are identical for any job count.
inline CandidateSequence detect_candidates(std::span<const Token> target,
                                           const PositionalIndex& index,
                                           const AlignmentParams& align_params,
                                           const DetectionParams& detect_params,
                                           unsigned jobs = 1) {
    std::vector<Window> windows = sliding_windows(target.size(), detect_params);
    std::vector<std::vector<CandidateMatch>> per_window(windows.size());

    auto process = [&](size_t wi) {
        const Window& win = windows[wi];
        auto anchors = retrieve_candidates(target.subspan(win.start, win.size), index,
                                           detect_params);
        for (const Anchor& a : anchors) {
            const uint32_t verse_len =
                static_cast<uint32_t>(index.verse(a.verse_ix).tokens.size());
            const uint32_t r = detect_params.verse_context_radius;
            uint32_t region_lo = a.pos_lo > r ? a.pos_lo - r : 0;
            uint32_t region_hi = std::min(verse_len, a.pos_hi + r + 1);
            auto m = detail::align_region(target, win.start, win.size, index, a.verse_ix,
                                          region_lo, region_hi, align_params);
            if (m) per_window[wi].push_back(std::move(*m));
        }
    };

    if (jobs <= 1 || windows.size() < 2) {
        for (size_t wi = 0; wi < windows.size(); ++wi) process(wi);
    } else {
        const unsigned nthreads = std::min<unsigned>(jobs, static_cast<unsigned>(windows.size()));
        std::vector<std::thread> threads;
        threads.reserve(nthreads);
        for (unsigned t = 0; t < nthreads; ++t) {
            threads.emplace_back([&, t]() {
                for (size_t wi = t; wi < windows.size(); wi += nthreads) process(wi);
            });
        }
        for (auto& th : threads) th.join();
    }

    std::vector<CandidateMatch> flat;
    for (auto& v : per_window)
        for (auto& m : v) flat.push_back(std::move(m));

    flat = detail::merge_matches(std::move(flat), target, index, align_params, detect_params);

    std::sort(flat.begin(), flat.end(), [](const CandidateMatch& a, const CandidateMatch& b) {
        return std::tuple(a.target_span.start, a.verse_ix, a.verse_span.start,
                          a.target_span.size) <
               std::tuple(b.target_span.start, b.verse_ix, b.verse_span.start,
                          b.target_span.size);
    });

    CandidateSequence seq;
    seq.matches = std::move(flat);
    seq.next_same_verse.assign(seq.matches.size(), -1);
    std::map<uint32_t, std::vector<size_t>> verse_members;
    for (size_t i = 0; i < seq.matches.size(); ++i)
        verse_members[seq.matches[i].verse_ix].push_back(i);
    for (const auto& [verse_ix, members] : verse_members) {
        // Link to the next match of the same verse strictly later in the
        // target; equal-start siblings are skipped over.
        for (size_t a = 0; a < members.size(); ++a) {
            for (size_t b = a + 1; b < members.size(); ++b) {
                if (seq.matches[members[b]].target_span.start >
                    seq.matches[members[a]].target_span.start) {
                    seq.next_same_verse[members[a]] = static_cast<int32_t>(members[b]);
                    break;
                }
            }
        }
    }
    return seq;
}

} // namespace citare
