#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citare/unicode.hpp"
#include "citare/verse.hpp"

namespace citare {

// Half-open range of word positions.
struct WordSpan {
    uint32_t start = 0;
    uint32_t size = 0;
    uint32_t end() const { return start + size; }
    bool operator==(const WordSpan&) const = default;
};

struct AlignmentParams {
    double match_threshold = 0.75; // word similarity at or above this counts as a match
    double gap_penalty = -0.5;     // per skipped word inside the alignment
    double mismatch_penalty = -1.0;
    double swap_penalty = -0.25;   // extra charge for an adjacent transposition
    bool allow_swaps = true;
    uint32_t min_alignment_len = 1;
    std::u32string prefix_letters = U"בהוכלמש";
};

// A matched word pair: target word `target_pos` aligned to verse word
// `verse_pos` at the given similarity. Pairs are strictly increasing in the
// target coordinate; the verse coordinate is increasing too except across an
// accepted adjacent swap.
struct AlignedPair {
    uint32_t target_pos = 0;
    uint32_t verse_pos = 0;
    double similarity = 0.0;
    bool operator==(const AlignedPair&) const = default;
};

struct AlignmentResult {
    WordSpan target_span;
    WordSpan verse_span;
    std::vector<AlignedPair> pairs;
    double score = 0.0;
};

namespace detail {

// Word-level edit distance on codepoints; two-row Wagner-Fischer.
inline uint32_t edit_distance_u32(std::u32string_view a, std::u32string_view b) {
    if (a == b) return 0;
    if (a.empty()) return static_cast<uint32_t>(b.size());
    if (b.empty()) return static_cast<uint32_t>(a.size());
    std::vector<uint32_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<uint32_t>(j);
    for (size_t i = 0; i < a.size(); ++i) {
        cur[0] = static_cast<uint32_t>(i + 1);
        for (size_t j = 0; j < b.size(); ++j) {
            uint32_t cost = a[i] == b[j] ? 0 : 1;
            cur[j + 1] = std::min({cur[j] + 1, prev[j + 1] + 1, prev[j] + cost});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// A word together with its admissible affix-stripped variant (one leading
// prefix letter removed, when the word is long enough to afford it).
struct WordForms {
    std::u32string full;
    bool has_variant = false;
    std::u32string_view variant() const { return std::u32string_view(full).substr(1); }

    static WordForms of(std::string_view surface, const AlignmentParams& p) {
        WordForms f;
        f.full = decode_utf8_cps(surface);
        f.has_variant = f.full.size() >= 2 &&
                        p.prefix_letters.find(f.full[0]) != std::u32string::npos;
        return f;
    }
};

inline double raw_similarity(std::u32string_view a, std::u32string_view b) {
    if (a == b) return 1.0;
    uint32_t d = edit_distance_u32(a, b);
    double m = static_cast<double>(std::max(a.size(), b.size()));
    return std::max(0.0, 1.0 - static_cast<double>(d) / m);
}

inline double word_similarity_forms(const WordForms& a, const WordForms& b) {
    double best = raw_similarity(a.full, b.full);
    if (a.has_variant) best = std::max(best, raw_similarity(a.variant(), b.full));
    if (b.has_variant) best = std::max(best, raw_similarity(a.full, b.variant()));
    if (a.has_variant && b.has_variant)
        best = std::max(best, raw_similarity(a.variant(), b.variant()));
    return best;
}

} // namespace detail

// Orthographic word similarity in [0,1]: exact equality of any admissible
// affix-stripped pair gives 1.0, otherwise edit distance normalized by the
// longer form. Symmetric by construction.
inline double word_similarity(std::string_view a, std::string_view b,
                              const AlignmentParams& params) {
    return detail::word_similarity_forms(detail::WordForms::of(a, params),
                                         detail::WordForms::of(b, params));
}

namespace detail {

enum class Move : uint8_t { stop, pair, up, left, swap };

struct TraceOut {
    std::vector<AlignedPair> pairs;
    uint32_t t_begin = 0, v_begin = 0; // cell where the path bottomed out
};

} // namespace detail

// Word-level Smith-Waterman over the similarity kernel. A cell pairs two
// words (match if similarity clears the threshold, otherwise the mismatch
// penalty), gaps skip a word on either side, and — when enabled — an
// adjacent transposition of two matching words is admitted with
// swap_penalty on top of both similarities.
//
// Returns the maximal local alignment, or nothing when the best score is
// not positive or fewer than min_alignment_len word pairs matched. Ties
// prefer the smallest verse start, then the smallest target start.
inline std::optional<AlignmentResult> local_align(std::span<const std::string_view> window,
                                                  std::span<const std::string_view> verse_words,
                                                  const AlignmentParams& params) {
    const size_t n = window.size();
    const size_t m = verse_words.size();
    if (n == 0 || m == 0) return std::nullopt;

    std::vector<detail::WordForms> wf(n), vf(m);
    for (size_t i = 0; i < n; ++i) wf[i] = detail::WordForms::of(window[i], params);
    for (size_t j = 0; j < m; ++j) vf[j] = detail::WordForms::of(verse_words[j], params);

    std::vector<double> sim(n * m);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j)
            sim[i * m + j] = detail::word_similarity_forms(wf[i], vf[j]);
    auto s = [&](size_t i, size_t j) { return sim[i * m + j]; };

    const size_t w = m + 1;
    std::vector<double> H((n + 1) * w, 0.0);
    std::vector<detail::Move> mv((n + 1) * w, detail::Move::stop);
    auto at = [&](size_t i, size_t j) -> double& { return H[i * w + j]; };

    double best = 0.0;
    for (size_t i = 1; i <= n; ++i) {
        for (size_t j = 1; j <= m; ++j) {
            const double sij = s(i - 1, j - 1);
            const double pair_score = sij >= params.match_threshold ? sij : params.mismatch_penalty;
            double v = at(i - 1, j - 1) + pair_score;
            detail::Move move = detail::Move::pair;
            if (double u = at(i - 1, j) + params.gap_penalty; u > v) {
                v = u;
                move = detail::Move::up;
            }
            if (double l = at(i, j - 1) + params.gap_penalty; l > v) {
                v = l;
                move = detail::Move::left;
            }
            if (params.allow_swaps && i >= 2 && j >= 2) {
                const double s_a = s(i - 2, j - 1); // earlier target word vs later verse word
                const double s_b = s(i - 1, j - 2); // later target word vs earlier verse word
                if (s_a >= params.match_threshold && s_b >= params.match_threshold) {
                    if (double sw = at(i - 2, j - 2) + s_a + s_b + params.swap_penalty; sw > v) {
                        v = sw;
                        move = detail::Move::swap;
                    }
                }
            }
            if (v <= 0.0) {
                v = 0.0;
                move = detail::Move::stop;
            }
            at(i, j) = v;
            mv[i * w + j] = move;
            best = std::max(best, v);
        }
    }
    if (best <= 0.0) return std::nullopt;

    auto trace = [&](size_t ei, size_t ej) {
        detail::TraceOut out;
        size_t i = ei, j = ej;
        while (i > 0 && j > 0) {
            switch (mv[i * w + j]) {
                case detail::Move::stop:
                    goto done;
                case detail::Move::pair: {
                    const double sij = s(i - 1, j - 1);
                    if (sij >= params.match_threshold)
                        out.pairs.push_back({static_cast<uint32_t>(i - 1),
                                             static_cast<uint32_t>(j - 1), sij});
                    --i;
                    --j;
                    break;
                }
                case detail::Move::up:
                    --i;
                    break;
                case detail::Move::left:
                    --j;
                    break;
                case detail::Move::swap:
                    out.pairs.push_back({static_cast<uint32_t>(i - 1),
                                         static_cast<uint32_t>(j - 2), s(i - 1, j - 2)});
                    out.pairs.push_back({static_cast<uint32_t>(i - 2),
                                         static_cast<uint32_t>(j - 1), s(i - 2, j - 1)});
                    i -= 2;
                    j -= 2;
                    break;
            }
        }
    done:
        out.t_begin = static_cast<uint32_t>(i);
        out.v_begin = static_cast<uint32_t>(j);
        std::reverse(out.pairs.begin(), out.pairs.end());
        return out;
    };

    std::optional<AlignmentResult> chosen;
    for (size_t i = 1; i <= n; ++i) {
        for (size_t j = 1; j <= m; ++j) {
            if (at(i, j) != best) continue;
            detail::TraceOut t = trace(i, j);
            if (t.pairs.empty()) continue;
            AlignmentResult r;
            r.pairs = std::move(t.pairs);
            r.score = best;
            uint32_t t_lo = r.pairs.front().target_pos, t_hi = r.pairs.front().target_pos;
            uint32_t v_lo = r.pairs.front().verse_pos, v_hi = r.pairs.front().verse_pos;
            for (const AlignedPair& p : r.pairs) {
                t_lo = std::min(t_lo, p.target_pos);
                t_hi = std::max(t_hi, p.target_pos);
                v_lo = std::min(v_lo, p.verse_pos);
                v_hi = std::max(v_hi, p.verse_pos);
            }
            r.target_span = {t_lo, t_hi - t_lo + 1};
            r.verse_span = {v_lo, v_hi - v_lo + 1};
            if (!chosen ||
                std::pair(r.verse_span.start, r.target_span.start) <
                    std::pair(chosen->verse_span.start, chosen->target_span.start)) {
                chosen = std::move(r);
            }
        }
    }
    if (!chosen) return std::nullopt;
    if (chosen->pairs.size() < params.min_alignment_len) return std::nullopt;
    return chosen;
}

inline std::optional<AlignmentResult> local_align(std::span<const Token> window,
                                                  const Verse& verse,
                                                  const AlignmentParams& params) {
    std::vector<std::string_view> w, v;
    w.reserve(window.size());
    v.reserve(verse.tokens.size());
    for (const Token& t : window) w.push_back(t.surface);
    for (const Token& t : verse.tokens) v.push_back(t.surface);
    return local_align(std::span<const std::string_view>(w),
                       std::span<const std::string_view>(v), params);
}

} // namespace citare
