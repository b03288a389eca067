#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "citare/infer.hpp"

namespace citare {

// Flat quotation record as written to / read from quotation JSONL files.
// char_start/char_end are byte offsets into the original target text.
struct QuotationRecord {
    std::string doc;
    uint32_t s_start = 0;
    uint32_t s_size = 0;
    uint32_t char_start = 0;
    uint32_t char_end = 0;
    std::string b_verse;
    uint32_t b_start = 0;
    uint32_t b_size = 0;
    double score = 0.0;
    std::string style = "simple";
    std::optional<uint32_t> group_id;
    std::optional<uint32_t> parent_group_id;

    bool operator==(const QuotationRecord&) const = default;
};

// One ground-truth annotation: the five-tuple plus style and document id.
struct GroundTruthEntry {
    std::string doc;
    uint32_t s_start = 0;
    uint32_t s_size = 0;
    std::string b_verse;
    uint32_t b_start = 0;
    uint32_t b_size = 0;
    std::string style = "simple";

    bool operator==(const GroundTruthEntry&) const = default;
};

inline nlohmann::json to_json(const QuotationRecord& r) {
    nlohmann::json j{{"doc", r.doc},
                     {"s_start", r.s_start},
                     {"s_size", r.s_size},
                     {"char_start", r.char_start},
                     {"char_end", r.char_end},
                     {"b_verse", r.b_verse},
                     {"b_start", r.b_start},
                     {"b_size", r.b_size},
                     {"score", r.score},
                     {"style", r.style}};
    if (r.group_id)
        j["group_id"] = *r.group_id;
    else if (r.parent_group_id)
        j["group_id"] = *r.parent_group_id; // embedded member reports the enclosing group
    else
        j["group_id"] = nullptr;
    if (r.parent_group_id) j["parent_group_id"] = *r.parent_group_id;
    return j;
}

inline QuotationRecord quotation_from_json(const nlohmann::json& j, const std::string& where) {
    const auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw Error(where + ": missing field \"" + key + "\"");
        return j.at(key);
    };
    QuotationRecord r;
    r.doc = need("doc").get<std::string>();
    r.s_start = need("s_start").get<uint32_t>();
    r.s_size = need("s_size").get<uint32_t>();
    r.char_start = j.value("char_start", 0u);
    r.char_end = j.value("char_end", 0u);
    r.b_verse = need("b_verse").get<std::string>();
    r.b_start = need("b_start").get<uint32_t>();
    r.b_size = need("b_size").get<uint32_t>();
    r.score = j.value("score", 0.0);
    r.style = j.value("style", std::string("simple"));
    if (!style_from(r.style)) throw Error(where + ": unknown style \"" + r.style + "\"");
    if (j.contains("group_id") && !j["group_id"].is_null())
        r.group_id = j["group_id"].get<uint32_t>();
    if (j.contains("parent_group_id") && !j["parent_group_id"].is_null())
        r.parent_group_id = j["parent_group_id"].get<uint32_t>();
    if (r.s_size == 0 || r.b_size == 0)
        throw Error(where + ": s_size and b_size must be >= 1");
    return r;
}

inline GroundTruthEntry ground_truth_from_json(const nlohmann::json& j, const std::string& where) {
    const auto need = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw Error(where + ": missing field \"" + key + "\"");
        return j.at(key);
    };
    GroundTruthEntry e;
    e.doc = need("doc").get<std::string>();
    e.s_start = need("s_start").get<uint32_t>();
    e.s_size = need("s_size").get<uint32_t>();
    e.b_verse = need("b_verse").get<std::string>();
    e.b_start = need("b_start").get<uint32_t>();
    e.b_size = need("b_size").get<uint32_t>();
    e.style = j.value("style", std::string("simple"));
    if (!style_from(e.style)) throw Error(where + ": unknown style \"" + e.style + "\"");
    if (e.s_size == 0 || e.b_size == 0)
        throw Error(where + ": s_size and b_size must be >= 1");
    return e;
}

namespace detail {

template <typename T, typename Parse>
std::vector<T> read_jsonl(std::istream& in, const std::string& source_name, Parse parse) {
    std::vector<T> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        const std::string where = source_name + ":" + std::to_string(lineno);
        if (j.is_discarded()) throw Error(where + ": invalid JSON");
        out.push_back(parse(j, where));
    }
    return out;
}

} // namespace detail

inline std::vector<QuotationRecord> read_quotations_jsonl(std::istream& in,
                                                          const std::string& source_name) {
    return detail::read_jsonl<QuotationRecord>(in, source_name, quotation_from_json);
}

inline std::vector<QuotationRecord> read_quotations_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open quotations file: " + path);
    return read_quotations_jsonl(f, path);
}

inline std::vector<GroundTruthEntry> read_ground_truth_jsonl(std::istream& in,
                                                             const std::string& source_name) {
    return detail::read_jsonl<GroundTruthEntry>(in, source_name, ground_truth_from_json);
}

inline std::vector<GroundTruthEntry> read_ground_truth_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open ground truth file: " + path);
    return read_ground_truth_jsonl(f, path);
}

inline std::string quotations_to_jsonl(std::span<const QuotationRecord> records) {
    std::string out;
    for (const QuotationRecord& r : records) {
        out += to_json(r).dump();
        out += "\n";
    }
    return out;
}

// Projects internal quotations to flat records, resolving verse ids and
// char offsets from the target tokens.
inline std::vector<QuotationRecord> to_records(std::span<const Quotation> quots,
                                               const PositionalIndex& index,
                                               std::span<const Token> target_tokens,
                                               const std::string& doc) {
    std::vector<QuotationRecord> out;
    out.reserve(quots.size());
    for (const Quotation& q : quots) {
        QuotationRecord r;
        r.doc = doc;
        r.s_start = q.s_start;
        r.s_size = q.s_size;
        r.char_start = target_tokens[q.s_start].char_begin;
        r.char_end = target_tokens[q.s_start + q.s_size - 1].char_end;
        r.b_verse = index.verse_id(q.verse_ix).str();
        r.b_start = q.b_start;
        r.b_size = q.b_size;
        r.score = q.score;
        r.style = std::string(style_name(q.style));
        r.group_id = q.group_id;
        r.parent_group_id = q.parent_group_id;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace citare
