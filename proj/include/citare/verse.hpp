#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citare/normalize.hpp"

namespace citare {

// Reference-corpus address, printable as "Book C:V".
struct VerseId {
    std::string book;
    uint32_t chapter = 0;
    uint32_t verse = 0;

    std::string str() const {
        return book + " " + std::to_string(chapter) + ":" + std::to_string(verse);
    }

    // Parses "Book C:V"; book names may contain spaces, so the chapter:verse
    // pair is taken from the last whitespace-separated field.
    static std::optional<VerseId> parse(std::string_view s) {
        size_t sp = s.find_last_of(' ');
        if (sp == std::string_view::npos || sp == 0 || sp + 1 >= s.size()) return std::nullopt;
        std::string_view ref = s.substr(sp + 1);
        size_t colon = ref.find(':');
        if (colon == std::string_view::npos) return std::nullopt;
        VerseId id;
        id.book = std::string(s.substr(0, sp));
        auto parse_u32 = [](std::string_view t, uint32_t& out) {
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
            return ec == std::errc() && p == t.data() + t.size();
        };
        if (!parse_u32(ref.substr(0, colon), id.chapter)) return std::nullopt;
        if (!parse_u32(ref.substr(colon + 1), id.verse)) return std::nullopt;
        if (id.chapter == 0 || id.verse == 0) return std::nullopt;
        return id;
    }

    bool operator==(const VerseId&) const = default;
};

struct Verse {
    VerseId id;
    std::vector<Token> tokens; // normalized, positions 0-based within verse
    std::string raw;           // original verse text
};

// Canonical ordering of corpus books. Books absent from the list order
// after all listed books, alphabetically.
struct BookOrder {
    std::vector<std::string> books;

    BookOrder() = default;
    explicit BookOrder(std::vector<std::string> b) : books(std::move(b)) { rebuild(); }

    void rebuild() {
        rank_.clear();
        for (size_t i = 0; i < books.size(); ++i) rank_[books[i]] = i;
    }

    std::optional<size_t> rank(const std::string& book) const {
        auto it = rank_.find(book);
        if (it == rank_.end()) return std::nullopt;
        return it->second;
    }

    bool less(const VerseId& a, const VerseId& b) const {
        auto ra = rank(a.book), rb = rank(b.book);
        size_t ka = ra.value_or(books.size());
        size_t kb = rb.value_or(books.size());
        if (ka != kb) return ka < kb;
        if (!ra && !rb && a.book != b.book) return a.book < b.book;
        if (a.chapter != b.chapter) return a.chapter < b.chapter;
        return a.verse < b.verse;
    }

    static BookOrder tanakh() {
        return BookOrder({
            "Genesis", "Exodus", "Leviticus", "Numbers", "Deuteronomy",
            "Joshua", "Judges", "1 Samuel", "2 Samuel", "1 Kings", "2 Kings",
            "Isaiah", "Jeremiah", "Ezekiel",
            "Hosea", "Joel", "Amos", "Obadiah", "Jonah", "Micah", "Nahum",
            "Habakkuk", "Zephaniah", "Haggai", "Zechariah", "Malachi",
            "Psalms", "Proverbs", "Job", "Song of Songs", "Ruth",
            "Lamentations", "Ecclesiastes", "Esther", "Daniel", "Ezra",
            "Nehemiah", "1 Chronicles", "2 Chronicles",
        });
    }

    bool operator==(const BookOrder& o) const { return books == o.books; }

private:
    std::unordered_map<std::string, size_t> rank_;
};

} // namespace citare
