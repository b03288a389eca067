#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "citare/error.hpp"

namespace citare {

// UTF-8 decoding that keeps, for every codepoint, the byte range it came
// from. Normalization deletes and rewrites characters but detections must
// be projectable back onto the original bytes, so the byte provenance is
// threaded through the whole pipeline.
struct DecodedText {
    std::u32string cps;
    std::vector<uint32_t> byte_begin; // per codepoint
    std::vector<uint32_t> byte_end;
};

inline void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

inline std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) append_utf8(out, c);
    return out;
}

// Strict decoder: rejects truncated sequences, overlong encodings,
// surrogates and out-of-range values.
inline DecodedText decode_utf8(std::string_view bytes) {
    DecodedText out;
    out.cps.reserve(bytes.size());
    size_t i = 0;
    const auto fail = [&](size_t at) -> void {
        throw Error("invalid UTF-8 at byte offset " + std::to_string(at));
    };
    while (i < bytes.size()) {
        const size_t start = i;
        const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
        char32_t cp = 0;
        size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            fail(start);
        }
        if (start + len > bytes.size()) fail(start);
        for (size_t k = 1; k < len; ++k) {
            const unsigned char bk = static_cast<unsigned char>(bytes[start + k]);
            if ((bk & 0xC0) != 0x80) fail(start);
            cp = (cp << 6) | (bk & 0x3F);
        }
        static constexpr char32_t kMinForLen[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMinForLen[len]) fail(start); // overlong
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail(start);
        out.cps.push_back(cp);
        out.byte_begin.push_back(static_cast<uint32_t>(start));
        out.byte_end.push_back(static_cast<uint32_t>(start + len));
        i = start + len;
    }
    return out;
}

inline std::u32string decode_utf8_cps(std::string_view bytes) {
    return decode_utf8(bytes).cps;
}

} // namespace citare
