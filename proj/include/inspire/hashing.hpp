#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

namespace inspire {

// First 8 bytes of SHA-256, big-endian. Stable across platforms and runs.
std::uint64_t stable_hash64(std::span<const std::byte> bytes);
std::uint64_t stable_hash64(std::string_view text);

// Lowercase hex digest (SHA-256 truncated to `hex_chars`).
std::string hex_digest(std::span<const std::byte> bytes, std::size_t hex_chars = 16);

// Derives a 64-bit seed from a list of words via std::seed_seq, whose
// mixing algorithm is fixed by the standard.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words);

}  // namespace inspire
