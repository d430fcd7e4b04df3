#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cechlab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Sub-stream seed splitting rule.
///
/// Every random draw in the library comes from an engine seeded with
/// derive_seed(parent, stream, index). `stream` names the consumer (for
/// example "count" or "coords") and `index` distinguishes repeated
/// consumers such as replications. Streams are keyed by name, so adding a
/// new consumer never shifts the draws of an existing one.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream,
                                    std::uint64_t index = 0) noexcept {
    std::uint64_t h = splitmix64(parent ^ 0x6a09e667f3bcc909ULL);
    h = splitmix64(h ^ fnv1a64(stream));
    return splitmix64(h ^ splitmix64(index + 0x3c6ef372fe94f82bULL));
}

inline Rng make_rng(std::uint64_t parent, std::string_view stream, std::uint64_t index = 0) {
    return Rng(derive_seed(parent, stream, index));
}

}  // namespace cechlab
