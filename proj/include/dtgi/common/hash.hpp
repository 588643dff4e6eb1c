#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace dtgi {

// SHA-256 of a byte range, lowercase hex.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::string& path);

// 64-bit FNV-1a; used for seeding, never for content addressing.
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);

// splitmix64 finalizer, handy for deriving independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace dtgi
