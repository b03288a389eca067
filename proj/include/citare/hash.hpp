#pragma once

#include <cstdint>
#include <string_view>

namespace citare {

// Streaming FNV-1a (64-bit). Used for corpus fingerprints and config
// hashes; stable across platforms and runs.
class Fnv1a64 {
public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001b3ULL;
        }
    }

    void update_u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            state_ ^= static_cast<unsigned char>(v >> (8 * i));
            state_ *= 0x100000001b3ULL;
        }
    }

    uint64_t digest() const { return state_; }

private:
    uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline uint64_t fnv1a64(std::string_view bytes) {
    Fnv1a64 h;
    h.update(bytes);
    return h.digest();
}

} // namespace citare
