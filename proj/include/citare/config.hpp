#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "citare/detect.hpp"
#include "citare/eval.hpp"
#include "citare/infer.hpp"

namespace citare {

// Everything tunable, loadable from one JSON file. Sections may be omitted
// (defaults apply) and unknown keys are rejected so typos do not silently
// run with defaults.
struct RunConfig {
    NormalizationConfig normalization = NormalizationConfig::hebrew_default();
    AlignmentParams alignment;
    DetectionParams detection;
    InferenceParams inference;
    MatchPolicy match_policy;
    BookOrder book_order = BookOrder::tanakh();

    static RunConfig defaults() { return RunConfig{}; }
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load_file(const std::string& path);
    nlohmann::json to_json() const;
    void validate() const;
};

namespace detail {

inline std::string encode_cp(char32_t c) {
    std::string s;
    append_utf8(s, c);
    return s;
}

inline char32_t decode_single_cp(const std::string& s, const std::string& what) {
    std::u32string cps = decode_utf8_cps(s);
    if (cps.size() != 1) throw Error(what + " must be a single character, got \"" + s + "\"");
    return cps[0];
}

template <typename T>
void take(nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    out = j.at(key).get<T>();
    j.erase(key);
}

inline void reject_unknown(const nlohmann::json& j, const std::string& section) {
    if (!j.empty())
        throw Error("unknown key \"" + j.begin().key() + "\" in config section " + section);
}

} // namespace detail

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json norm;
    norm["profile"] = "custom";
    norm["strip_diacritics"] = normalization.strip_diacritics;
    norm["strip_matres"] = normalization.strip_matres;
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& r : normalization.diacritic_ranges)
        ranges.push_back({static_cast<uint32_t>(r.lo), static_cast<uint32_t>(r.hi)});
    norm["diacritic_ranges"] = ranges;
    std::string matres;
    for (char32_t c : normalization.matres_letters) append_utf8(matres, c);
    norm["matres_letters"] = matres;
    nlohmann::json scm = nlohmann::json::object();
    for (const auto& [from, to] : normalization.special_char_map)
        scm[detail::encode_cp(from)] = encode_utf8(to);
    norm["special_char_map"] = scm;

    std::string prefixes;
    for (char32_t c : alignment.prefix_letters) append_utf8(prefixes, c);

    return nlohmann::json{
        {"normalization", norm},
        {"alignment",
         {{"match_threshold", alignment.match_threshold},
          {"gap_penalty", alignment.gap_penalty},
          {"mismatch_penalty", alignment.mismatch_penalty},
          {"swap_penalty", alignment.swap_penalty},
          {"allow_swaps", alignment.allow_swaps},
          {"min_alignment_len", alignment.min_alignment_len},
          {"prefix_letters", prefixes}}},
        {"detection",
         {{"ngram_size", detection.ngram_size},
          {"stride", detection.stride},
          {"max_candidates_per_window", detection.max_candidates_per_window},
          {"verse_context_radius", detection.verse_context_radius}}},
        {"inference",
         {{"score_threshold", inference.score_threshold},
          {"neighbor_window", inference.neighbor_window}}},
        {"match_policy",
         {{"min_source_overlap", match_policy.min_source_overlap},
          {"require_verse_equality", match_policy.require_verse_equality}}},
        {"book_order", book_order.books},
    };
}

inline RunConfig RunConfig::from_json(const nlohmann::json& input) {
    RunConfig cfg;
    nlohmann::json j = input;
    if (!j.is_object()) throw Error("config must be a JSON object");

    if (j.contains("normalization")) {
        nlohmann::json n = j["normalization"];
        j.erase("normalization");
        std::string profile = "hebrew-default";
        detail::take(n, "profile", profile);
        if (profile == "hebrew-default")
            cfg.normalization = NormalizationConfig::hebrew_default();
        else if (profile == "plain")
            cfg.normalization = NormalizationConfig::plain();
        else if (profile != "custom")
            throw Error("unknown normalization profile \"" + profile + "\"");
        detail::take(n, "strip_diacritics", cfg.normalization.strip_diacritics);
        detail::take(n, "strip_matres", cfg.normalization.strip_matres);
        if (n.contains("diacritic_ranges")) {
            cfg.normalization.diacritic_ranges.clear();
            for (const auto& r : n["diacritic_ranges"]) {
                if (!r.is_array() || r.size() != 2)
                    throw Error("diacritic_ranges entries must be [lo, hi] pairs");
                cfg.normalization.diacritic_ranges.push_back(
                    {static_cast<char32_t>(r[0].get<uint32_t>()),
                     static_cast<char32_t>(r[1].get<uint32_t>())});
            }
            n.erase("diacritic_ranges");
        }
        if (n.contains("matres_letters")) {
            cfg.normalization.matres_letters =
                decode_utf8_cps(n["matres_letters"].get<std::string>());
            n.erase("matres_letters");
        }
        if (n.contains("special_char_map")) {
            cfg.normalization.special_char_map.clear();
            for (const auto& [k, v] : n["special_char_map"].items()) {
                cfg.normalization.special_char_map
                    [detail::decode_single_cp(k, "special_char_map key")] =
                    decode_utf8_cps(v.get<std::string>());
            }
            n.erase("special_char_map");
        }
        detail::reject_unknown(n, "normalization");
    }
    if (j.contains("alignment")) {
        nlohmann::json a = j["alignment"];
        j.erase("alignment");
        detail::take(a, "match_threshold", cfg.alignment.match_threshold);
        detail::take(a, "gap_penalty", cfg.alignment.gap_penalty);
        detail::take(a, "mismatch_penalty", cfg.alignment.mismatch_penalty);
        detail::take(a, "swap_penalty", cfg.alignment.swap_penalty);
        detail::take(a, "allow_swaps", cfg.alignment.allow_swaps);
        detail::take(a, "min_alignment_len", cfg.alignment.min_alignment_len);
        if (a.contains("prefix_letters")) {
            cfg.alignment.prefix_letters = decode_utf8_cps(a["prefix_letters"].get<std::string>());
            a.erase("prefix_letters");
        }
        detail::reject_unknown(a, "alignment");
    }
    if (j.contains("detection")) {
        nlohmann::json d = j["detection"];
        j.erase("detection");
        detail::take(d, "ngram_size", cfg.detection.ngram_size);
        detail::take(d, "stride", cfg.detection.stride);
        detail::take(d, "max_candidates_per_window", cfg.detection.max_candidates_per_window);
        detail::take(d, "verse_context_radius", cfg.detection.verse_context_radius);
        detail::reject_unknown(d, "detection");
    }
    if (j.contains("inference")) {
        nlohmann::json i = j["inference"];
        j.erase("inference");
        detail::take(i, "score_threshold", cfg.inference.score_threshold);
        detail::take(i, "neighbor_window", cfg.inference.neighbor_window);
        detail::reject_unknown(i, "inference");
    }
    if (j.contains("match_policy")) {
        nlohmann::json m = j["match_policy"];
        j.erase("match_policy");
        detail::take(m, "min_source_overlap", cfg.match_policy.min_source_overlap);
        detail::take(m, "require_verse_equality", cfg.match_policy.require_verse_equality);
        detail::reject_unknown(m, "match_policy");
    }
    if (j.contains("book_order")) {
        cfg.book_order = BookOrder(j["book_order"].get<std::vector<std::string>>());
        j.erase("book_order");
    }
    detail::reject_unknown(j, "(top level)");
    cfg.validate();
    return cfg;
}

inline RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
    if (j.is_discarded()) throw Error("config file is not valid JSON: " + path);
    return from_json(j);
}

inline void RunConfig::validate() const {
    normalization.validate();
    if (alignment.match_threshold < 0.0 || alignment.match_threshold > 1.0)
        throw Error("alignment.match_threshold must be in [0, 1]");
    if (alignment.gap_penalty >= 0.0) throw Error("alignment.gap_penalty must be negative");
    if (alignment.min_alignment_len < 1)
        throw Error("alignment.min_alignment_len must be >= 1");
    if (detection.ngram_size < 1) throw Error("detection.ngram_size must be >= 1");
    if (detection.stride < 1) throw Error("detection.stride must be >= 1");
    if (detection.max_candidates_per_window < 1)
        throw Error("detection.max_candidates_per_window must be >= 1");
    if (match_policy.min_source_overlap <= 0.0 || match_policy.min_source_overlap > 1.0)
        throw Error("match_policy.min_source_overlap must be in (0, 1]");
}

} // namespace citare
