#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "citare/hash.hpp"
#include "citare/unicode.hpp"

namespace citare {

// A document before normalization. `content` must be valid UTF-8.
struct RawText {
    std::string content;
    std::string source_id;
};

// One normalized word. `char_begin`/`char_end` are byte offsets into the
// ORIGINAL raw text (pre-normalization), so hits can be projected back.
struct Token {
    std::string surface;
    uint32_t position = 0;
    uint32_t char_begin = 0;
    uint32_t char_end = 0;
};

struct CodepointRange {
    char32_t lo;
    char32_t hi;
    bool operator==(const CodepointRange&) const = default;
};

// Normalization rules. Corpus and target texts must run through a
// byte-identical config; the index stores hash() so detection can refuse
// a mismatched pairing.
struct NormalizationConfig {
    bool strip_diacritics = true;
    bool strip_matres = true;

    // Codepoints deleted outright when strip_diacritics is on.
    std::vector<CodepointRange> diacritic_ranges;

    // Letters removed in word-medial position when strip_matres is on.
    std::u32string matres_letters;

    // Character standardization, applied before tokenization. Must be
    // idempotent: no image character may itself be remapped.
    std::map<char32_t, std::u32string> special_char_map;

    static NormalizationConfig hebrew_default();
    static NormalizationConfig plain();

    void validate() const;
    std::string canonical_string() const;
    uint64_t hash() const { return fnv1a64(canonical_string()); }

    bool operator==(const NormalizationConfig&) const = default;
};

inline NormalizationConfig NormalizationConfig::hebrew_default() {
    NormalizationConfig c;
    c.diacritic_ranges = {
        {0x0591, 0x05BD}, // Hebrew cantillation + points (maqaf excluded)
        {0x05BF, 0x05BF}, // rafe
        {0x05C1, 0x05C2}, // shin/sin dots
        {0x05C4, 0x05C5}, // upper/lower dots
        {0x05C7, 0x05C7}, // qamats qatan
        {0x0300, 0x036F}, // combining diacritical marks
        {0x1AB0, 0x1AFF},
        {0x1DC0, 0x1DFF},
        {0x20D0, 0x20FF},
        {0xFE20, 0xFE2F},
    };
    c.matres_letters = U"וי"; // vav, yod
    auto& m = c.special_char_map;
    for (char32_t q : {U'‘', U'’', U'‚', U'‛'}) m[q] = U"'";
    for (char32_t q : {U'“', U'”', U'„', U'‟'}) m[q] = U"\"";
    m[U'׳'] = U"'";  // geresh
    m[U'״'] = U"\""; // gershayim
    m[U'%'] = U"";
    m[U'$'] = U"";
    // Invisible formatting controls common in digital Hebrew editions.
    for (char32_t z : {U'‌', U'‍', U'‎', U'‏', U'‪',
                       U'‫', U'‬', U'‭', U'‮', U'﻿'})
        m[z] = U"";
    return c;
}

inline NormalizationConfig NormalizationConfig::plain() {
    NormalizationConfig c;
    c.strip_matres = false;
    c.diacritic_ranges = {{0x0300, 0x036F}};
    for (char32_t q : {U'‘', U'’'}) c.special_char_map[q] = U"'";
    for (char32_t q : {U'“', U'”'}) c.special_char_map[q] = U"\"";
    return c;
}

inline void NormalizationConfig::validate() const {
    for (const auto& [from, to] : special_char_map) {
        for (char32_t c : to) {
            auto it = special_char_map.find(c);
            if (it != special_char_map.end() &&
                !(it->second.size() == 1 && it->second[0] == c)) {
                throw Error("special_char_map is not idempotent: image of U+" +
                            std::to_string(static_cast<uint32_t>(from)) +
                            " contains a remapped character");
            }
        }
    }
    for (const auto& r : diacritic_ranges)
        if (r.lo > r.hi) throw Error("diacritic range with lo > hi");
}

inline std::string NormalizationConfig::canonical_string() const {
    std::ostringstream os;
    os << "norm/v1;sd=" << strip_diacritics << ";sm=" << strip_matres << ";dr=";
    for (const auto& r : diacritic_ranges)
        os << std::hex << static_cast<uint32_t>(r.lo) << "-"
           << static_cast<uint32_t>(r.hi) << ",";
    os << ";ml=";
    for (char32_t c : matres_letters) os << std::hex << static_cast<uint32_t>(c) << ",";
    os << ";map=";
    for (const auto& [from, to] : special_char_map) {
        os << std::hex << static_cast<uint32_t>(from) << ">";
        for (char32_t c : to) os << std::hex << static_cast<uint32_t>(c) << ".";
        os << ",";
    }
    return os.str();
}

// Normalized codepoints plus, for each one, the byte range of the original
// raw text it descends from.
struct MappedText {
    std::u32string text;
    std::vector<uint32_t> origin_begin;
    std::vector<uint32_t> origin_end;
};

inline MappedText make_mapped(std::string_view utf8) {
    DecodedText d = decode_utf8(utf8);
    return MappedText{std::move(d.cps), std::move(d.byte_begin), std::move(d.byte_end)};
}

inline bool is_diacritic(char32_t c, const NormalizationConfig& cfg) {
    for (const auto& r : cfg.diacritic_ranges)
        if (c >= r.lo && c <= r.hi) return true;
    return false;
}

// Word boundary characters: whitespace, ASCII and general punctuation, and
// the Hebrew word-level punctuation (maqaf joins words in verse text but is
// a word boundary for alignment purposes).
inline bool is_separator(char32_t c) {
    if (c <= 0x20 || c == 0x7F) return true;
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
               (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
    }
    if (c == 0x85 || c == 0xA0 || c == 0x1680) return true;
    if (c >= 0x2000 && c <= 0x200B) return true;
    if (c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000) return true;
    if (c >= 0x2010 && c <= 0x2027) return true;
    if (c >= 0x2030 && c <= 0x205E) return true;
    if (c == 0x05BE || c == 0x05C0 || c == 0x05C3 || c == 0x05C6) return true;
    return false;
}

inline MappedText strip_diacritics(const MappedText& in, const NormalizationConfig& cfg) {
    MappedText out;
    out.text.reserve(in.text.size());
    for (size_t i = 0; i < in.text.size(); ++i) {
        if (is_diacritic(in.text[i], cfg)) continue;
        out.text.push_back(in.text[i]);
        out.origin_begin.push_back(in.origin_begin[i]);
        out.origin_end.push_back(in.origin_end[i]);
    }
    return out;
}

inline MappedText normalize_special_chars(const MappedText& in, const NormalizationConfig& cfg) {
    MappedText out;
    out.text.reserve(in.text.size());
    for (size_t i = 0; i < in.text.size(); ++i) {
        auto it = cfg.special_char_map.find(in.text[i]);
        if (it == cfg.special_char_map.end()) {
            out.text.push_back(in.text[i]);
            out.origin_begin.push_back(in.origin_begin[i]);
            out.origin_end.push_back(in.origin_end[i]);
        } else {
            for (char32_t c : it->second) {
                out.text.push_back(c);
                out.origin_begin.push_back(in.origin_begin[i]);
                out.origin_end.push_back(in.origin_end[i]);
            }
        }
    }
    return out;
}

// Matres lectionis removal: configured letters are dropped in word-medial
// position only; first and last letters always survive. A word that would
// vanish keeps its original surface.
inline std::u32string strip_matres_u32(std::u32string_view word, const NormalizationConfig& cfg) {
    if (word.size() < 3) return std::u32string(word);
    std::u32string out;
    out.reserve(word.size());
    out.push_back(word.front());
    for (size_t i = 1; i + 1 < word.size(); ++i) {
        if (cfg.matres_letters.find(word[i]) != std::u32string::npos) continue;
        out.push_back(word[i]);
    }
    out.push_back(word.back());
    if (out.empty()) return std::u32string(word);
    return out;
}

inline std::string strip_matres(std::string_view surface, const NormalizationConfig& cfg) {
    if (!cfg.strip_matres) return std::string(surface);
    return encode_utf8(strip_matres_u32(decode_utf8_cps(surface), cfg));
}

// Splits mapped text into maximal separator-free runs. Does NOT apply the
// matres rule; callers wanting the full pipeline use normalize_document.
inline std::vector<Token> tokenize(const MappedText& in) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < in.text.size()) {
        if (is_separator(in.text[i])) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < in.text.size() && !is_separator(in.text[j])) ++j;
        Token t;
        t.surface = encode_utf8(std::u32string_view(in.text).substr(i, j - i));
        t.position = static_cast<uint32_t>(out.size());
        t.char_begin = in.origin_begin[i];
        t.char_end = in.origin_end[j - 1];
        out.push_back(std::move(t));
        i = j;
    }
    return out;
}

// Full pipeline: diacritic removal, character standardization, tokenization,
// then per-token matres removal. Applied identically to corpus and targets.
inline std::vector<Token> normalize_document(const RawText& raw, const NormalizationConfig& cfg) {
    MappedText m = make_mapped(raw.content);
    if (cfg.strip_diacritics) m = strip_diacritics(m, cfg);
    m = normalize_special_chars(m, cfg);
    std::vector<Token> tokens = tokenize(m);
    if (cfg.strip_matres) {
        for (Token& t : tokens) t.surface = strip_matres(t.surface, cfg);
    }
    return tokens;
}

inline std::vector<std::string> normalize_tokens(std::string_view text, const NormalizationConfig& cfg) {
    std::vector<std::string> out;
    for (Token& t : normalize_document(RawText{std::string(text), "-"}, cfg))
        out.push_back(std::move(t.surface));
    return out;
}

// Normalized surfaces joined by single spaces; a fixed point of itself.
inline std::string normalize_to_string(std::string_view text, const NormalizationConfig& cfg) {
    std::string out;
    bool first = true;
    for (const std::string& s : normalize_tokens(text, cfg)) {
        if (!first) out.push_back(' ');
        out += s;
        first = false;
    }
    return out;
}

inline RawText strip_diacritics(const RawText& raw, const NormalizationConfig& cfg) {
    MappedText m = strip_diacritics(make_mapped(raw.content), cfg);
    return RawText{encode_utf8(m.text), raw.source_id};
}

inline RawText normalize_special_chars(const RawText& raw, const NormalizationConfig& cfg) {
    MappedText m = normalize_special_chars(make_mapped(raw.content), cfg);
    return RawText{encode_utf8(m.text), raw.source_id};
}

} // namespace citare
