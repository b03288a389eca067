#pragma once

#include <stdexcept>
#include <string>

namespace citare {

// Single exception type for user-facing failures (parse errors, bad
// configuration, fingerprint mismatches). The message is expected to be
// printable as-is by the CLI.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace citare
