#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "citare/hash.hpp"
#include "citare/verse.hpp"

namespace citare {

// One occurrence of a token: which verse (by canonical position) and which
// word slot inside it.
struct Posting {
    uint32_t verse_ix = 0;
    uint32_t word_position = 0;
    bool operator==(const Posting&) const = default;
};

namespace detail {

inline void put_varint(std::string& out, uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<char>(0x80 | (v & 0x7F)));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

inline uint64_t get_varint(std::string_view buf, size_t& pos) {
    uint64_t v = 0;
    int shift = 0;
    while (true) {
        if (pos >= buf.size()) throw Error("index file truncated");
        unsigned char b = static_cast<unsigned char>(buf[pos++]);
        v |= static_cast<uint64_t>(b & 0x7F) << shift;
        if (!(b & 0x80)) break;
        shift += 7;
        if (shift > 63) throw Error("index file corrupt: varint overflow");
    }
    return v;
}

inline void put_string(std::string& out, std::string_view s) {
    put_varint(out, s.size());
    out.append(s);
}

inline std::string get_string(std::string_view buf, size_t& pos) {
    uint64_t n = get_varint(buf, pos);
    if (pos + n > buf.size()) throw Error("index file truncated");
    std::string s(buf.substr(pos, n));
    pos += n;
    return s;
}

} // namespace detail

// Write-once positional inverted index over a normalized corpus. Lookup is
// a hash-map access returning a view of the stored (sorted) posting list;
// token probabilities come straight from occurrence counts.
class PositionalIndex {
public:
    static PositionalIndex build(std::vector<Verse> verses,
                                 const NormalizationConfig& cfg,
                                 const BookOrder& order) {
        if (verses.empty()) throw Error("cannot build an index from an empty corpus");
        for (size_t i = 1; i < verses.size(); ++i) {
            if (order.less(verses[i].id, verses[i - 1].id))
                throw Error("verses not in canonical order: " + verses[i].id.str());
        }
        PositionalIndex ix;
        ix.order_ = order;
        ix.verses_ = std::move(verses);
        ix.config_hash_ = cfg.hash();
        Fnv1a64 fp;
        fp.update(cfg.canonical_string());
        for (size_t v = 0; v < ix.verses_.size(); ++v) {
            const Verse& verse = ix.verses_[v];
            fp.update(verse.id.book);
            fp.update_u64(verse.id.chapter);
            fp.update_u64(verse.id.verse);
            for (size_t p = 0; p < verse.tokens.size(); ++p) {
                const std::string& surface = verse.tokens[p].surface;
                fp.update(surface);
                fp.update("\x1e");
                ix.postings_[surface].push_back(
                    {static_cast<uint32_t>(v), static_cast<uint32_t>(p)});
                ++ix.total_tokens_;
            }
            fp.update("\x1d");
        }
        ix.fingerprint_ = fp.digest();
        return ix;
    }

    // Sorted posting list for a (normalized) token surface; empty if unseen.
    std::span<const Posting> lookup(const std::string& token) const {
        auto it = postings_.find(token);
        if (it == postings_.end()) return {};
        return it->second;
    }

    uint64_t token_count(const std::string& token) const {
        auto it = postings_.find(token);
        return it == postings_.end() ? 0 : it->second.size();
    }

    // count/total for seen tokens; unseen tokens get the floor 1/(total+1)
    // so log-scoring stays defined and maximally surprised.
    double token_probability(const std::string& token) const {
        uint64_t c = token_count(token);
        if (c == 0) return 1.0 / static_cast<double>(total_tokens_ + 1);
        return static_cast<double>(c) / static_cast<double>(total_tokens_);
    }

    uint64_t total_tokens() const { return total_tokens_; }
    uint64_t fingerprint() const { return fingerprint_; }
    uint64_t config_hash() const { return config_hash_; }
    size_t distinct_tokens() const { return postings_.size(); }
    const std::vector<Verse>& verses() const { return verses_; }
    const Verse& verse(uint32_t ix) const { return verses_.at(ix); }
    const VerseId& verse_id(uint32_t ix) const { return verses_.at(ix).id; }
    const BookOrder& book_order() const { return order_; }

    // ---- persistence -------------------------------------------------
    //
    // Layout (all integers little-endian or LEB128 varints):
    //   magic "CITAREIX"            8 bytes
    //   format version              varint (currently 1)
    //   config_hash, fingerprint    8 bytes each
    //   book order                  varint count, then strings
    //   verses                      varint count, then per verse:
    //       book, chapter, verse, raw text,
    //       token count, per token: surface, char_begin, char_end
    //   postings                    varint distinct-token count, then per
    //       token (sorted by surface): surface, occurrence count, postings
    //       delta-encoded by (verse_ix, word_position)

    static constexpr char kMagic[9] = "CITAREIX";
    static constexpr uint64_t kFormatVersion = 1;

    std::string serialize() const {
        using detail::put_string;
        using detail::put_varint;
        std::string out;
        out.append(kMagic, 8);
        put_varint(out, kFormatVersion);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(config_hash_ >> (8 * i)));
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(fingerprint_ >> (8 * i)));
        put_varint(out, order_.books.size());
        for (const auto& b : order_.books) put_string(out, b);
        put_varint(out, verses_.size());
        for (const Verse& v : verses_) {
            put_string(out, v.id.book);
            put_varint(out, v.id.chapter);
            put_varint(out, v.id.verse);
            put_string(out, v.raw);
            put_varint(out, v.tokens.size());
            for (const Token& t : v.tokens) {
                put_string(out, t.surface);
                put_varint(out, t.char_begin);
                put_varint(out, t.char_end);
            }
        }
        std::vector<const std::string*> keys;
        keys.reserve(postings_.size());
        for (const auto& [k, _] : postings_) keys.push_back(&k);
        std::sort(keys.begin(), keys.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        put_varint(out, keys.size());
        for (const std::string* k : keys) {
            const auto& list = postings_.at(*k);
            put_string(out, *k);
            put_varint(out, list.size());
            uint32_t prev_verse = 0;
            uint32_t prev_pos = 0;
            for (const Posting& p : list) {
                uint32_t dv = p.verse_ix - prev_verse;
                put_varint(out, dv);
                if (dv == 0) {
                    put_varint(out, p.word_position - prev_pos);
                } else {
                    put_varint(out, p.word_position);
                }
                prev_verse = p.verse_ix;
                prev_pos = p.word_position;
            }
        }
        return out;
    }

    static PositionalIndex deserialize(std::string_view buf) {
        using detail::get_string;
        using detail::get_varint;
        if (buf.size() < 8 || buf.substr(0, 8) != std::string_view(kMagic, 8))
            throw Error("not an index file (bad magic)");
        size_t pos = 8;
        uint64_t version = get_varint(buf, pos);
        if (version != kFormatVersion)
            throw Error("unsupported index format version " + std::to_string(version));
        PositionalIndex ix;
        auto get_u64le = [&]() {
            if (pos + 8 > buf.size()) throw Error("index file truncated");
            uint64_t v = 0;
            for (int i = 0; i < 8; ++i)
                v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
            pos += 8;
            return v;
        };
        ix.config_hash_ = get_u64le();
        ix.fingerprint_ = get_u64le();
        uint64_t nbooks = get_varint(buf, pos);
        std::vector<std::string> books;
        books.reserve(nbooks);
        for (uint64_t i = 0; i < nbooks; ++i) books.push_back(get_string(buf, pos));
        ix.order_ = BookOrder(std::move(books));
        uint64_t nverses = get_varint(buf, pos);
        ix.verses_.reserve(nverses);
        for (uint64_t i = 0; i < nverses; ++i) {
            Verse v;
            v.id.book = get_string(buf, pos);
            v.id.chapter = static_cast<uint32_t>(get_varint(buf, pos));
            v.id.verse = static_cast<uint32_t>(get_varint(buf, pos));
            v.raw = get_string(buf, pos);
            uint64_t ntok = get_varint(buf, pos);
            v.tokens.reserve(ntok);
            for (uint64_t t = 0; t < ntok; ++t) {
                Token tok;
                tok.surface = get_string(buf, pos);
                tok.position = static_cast<uint32_t>(t);
                tok.char_begin = static_cast<uint32_t>(get_varint(buf, pos));
                tok.char_end = static_cast<uint32_t>(get_varint(buf, pos));
                v.tokens.push_back(std::move(tok));
            }
            ix.verses_.push_back(std::move(v));
        }
        uint64_t ntokens = get_varint(buf, pos);
        for (uint64_t i = 0; i < ntokens; ++i) {
            std::string surface = get_string(buf, pos);
            uint64_t count = get_varint(buf, pos);
            std::vector<Posting> list;
            list.reserve(count);
            uint32_t prev_verse = 0;
            uint32_t prev_pos = 0;
            for (uint64_t k = 0; k < count; ++k) {
                uint32_t dv = static_cast<uint32_t>(get_varint(buf, pos));
                uint32_t verse_ix = prev_verse + dv;
                uint32_t p = static_cast<uint32_t>(get_varint(buf, pos));
                uint32_t word_pos = (dv == 0 && k > 0) ? prev_pos + p : p;
                list.push_back({verse_ix, word_pos});
                prev_verse = verse_ix;
                prev_pos = word_pos;
                ix.total_tokens_++;
            }
            ix.postings_.emplace(std::move(surface), std::move(list));
        }
        ix.check_invariants();
        return ix;
    }

    void save(const std::string& path) const {
        std::string bytes = serialize();
        std::string tmp = path + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw Error("cannot write index file: " + tmp);
            f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!f) throw Error("failed writing index file: " + tmp);
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) throw Error("cannot move index into place: " + path + ": " + ec.message());
    }

    static PositionalIndex load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw Error("cannot open index file: " + path);
        std::string bytes((std::istreambuf_iterator<char>(f)),
                          std::istreambuf_iterator<char>());
        return deserialize(bytes);
    }

    void check_invariants() const {
        uint64_t sum = 0;
        for (const auto& [token, list] : postings_) {
            if (list.empty()) throw Error("index invariant broken: empty posting list");
            sum += list.size();
            for (const Posting& p : list) {
                if (p.verse_ix >= verses_.size() ||
                    p.word_position >= verses_[p.verse_ix].tokens.size())
                    throw Error("index invariant broken: posting out of range for '" + token + "'");
            }
            for (size_t i = 1; i < list.size(); ++i) {
                if (!(list[i - 1].verse_ix < list[i].verse_ix ||
                      (list[i - 1].verse_ix == list[i].verse_ix &&
                       list[i - 1].word_position < list[i].word_position)))
                    throw Error("index invariant broken: postings unsorted for '" + token + "'");
            }
        }
        if (sum != total_tokens_)
            throw Error("index invariant broken: posting counts do not sum to total");
    }

private:
    std::vector<Verse> verses_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    uint64_t total_tokens_ = 0;
    uint64_t fingerprint_ = 0;
    uint64_t config_hash_ = 0;
    BookOrder order_;
};

// Reads the JSONL corpus format: one verse per line,
// {"book": str, "chapter": int, "verse": int, "text": str}.
// Verses come back normalized and in canonical order; duplicates and
// malformed lines are errors that name the offender.
inline std::vector<Verse> ingest_corpus(std::istream& in, const NormalizationConfig& cfg,
                                        const BookOrder& order,
                                        const std::string& source_name = "corpus") {
    std::vector<Verse> verses;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        const std::string where = source_name + ":" + std::to_string(lineno);
        if (j.is_discarded()) throw Error(where + ": invalid JSON");
        if (!j.is_object() || !j.contains("book") || !j.contains("chapter") ||
            !j.contains("verse") || !j.contains("text") || !j["book"].is_string() ||
            !j["chapter"].is_number_unsigned() || !j["verse"].is_number_unsigned() ||
            !j["text"].is_string())
            throw Error(where + ": expected {\"book\": str, \"chapter\": int, \"verse\": int, \"text\": str}");
        Verse v;
        v.id = VerseId{j["book"].get<std::string>(), j["chapter"].get<uint32_t>(),
                       j["verse"].get<uint32_t>()};
        if (v.id.chapter == 0 || v.id.verse == 0)
            throw Error(where + ": chapter and verse must be positive");
        v.raw = j["text"].get<std::string>();
        v.tokens = normalize_document(RawText{v.raw, v.id.str()}, cfg);
        if (v.tokens.empty())
            throw Error(where + ": verse " + v.id.str() + " has no tokens after normalization");
        verses.push_back(std::move(v));
    }
    std::stable_sort(verses.begin(), verses.end(),
                     [&](const Verse& a, const Verse& b) { return order.less(a.id, b.id); });
    for (size_t i = 1; i < verses.size(); ++i) {
        if (verses[i].id == verses[i - 1].id)
            throw Error(source_name + ": duplicate verse id " + verses[i].id.str());
    }
    return verses;
}

inline std::vector<Verse> ingest_corpus_file(const std::string& path,
                                             const NormalizationConfig& cfg,
                                             const BookOrder& order) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open corpus file: " + path);
    return ingest_corpus(f, cfg, order, path);
}

} // namespace citare
