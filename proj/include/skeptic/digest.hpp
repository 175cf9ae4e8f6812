#pragma once

#include <string>
#include <string_view>

namespace skeptic {

/// SHA-256 of `data`, lowercase hex. Used for fingerprints, cache keys
/// and mock-script lookups, so it must stay stable across platforms.
std::string sha256_hex(std::string_view data);

}  // namespace skeptic
