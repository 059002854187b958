#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace oucd {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a over raw bytes. Stable across platforms.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Subsystem seed split: every consumer of randomness derives its own stream
/// as mix64(root ^ fnv1a64(purpose)), so adding a consumer never shifts another.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose) noexcept {
    return mix64(root ^ fnv1a64(purpose));
}

} // namespace oucd
