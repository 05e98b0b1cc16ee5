#include "inspire/hashing.hpp"

#include <openssl/sha.h>

#include <array>
#include <random>
#include <vector>

namespace inspire {

namespace {

std::array<unsigned char, SHA256_DIGEST_LENGTH> sha256(std::span<const std::byte> bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());
  return digest;
}

}  // namespace

std::uint64_t stable_hash64(std::span<const std::byte> bytes) {
  const auto digest = sha256(bytes);
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | digest[static_cast<std::size_t>(i)];
  return out;
}

std::uint64_t stable_hash64(std::string_view text) {
  return stable_hash64(std::as_bytes(std::span(text.data(), text.size())));
}

std::string hex_digest(std::span<const std::byte> bytes, std::size_t hex_chars) {
  static constexpr char kHex[] = "0123456789abcdef";
  const auto digest = sha256(bytes);
  std::string out;
  out.reserve(hex_chars);
  for (std::size_t i = 0; i < digest.size() && out.size() < hex_chars; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    if (out.size() < hex_chars) out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> halves;
  halves.reserve(words.size() * 2);
  for (auto w : words) {
    halves.push_back(static_cast<std::uint32_t>(w & 0xFFFFFFFFu));
    halves.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq seq(halves.begin(), halves.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace inspire
