#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mimic {

/// SHA-256 of the input, lowercase hex.
std::string sha256_hex(std::string_view data);

/// FNV-1a 64-bit. Used for deterministic seed mixing, not security.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace mimic
