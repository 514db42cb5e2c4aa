#pragma once

#include <cstddef>
#include <cstdint>

namespace flocksim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Maps 64 random bits onto [0, 1).
constexpr double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

/// 64-bit FNV-1a, used for digests of logs and parameter sets.
constexpr std::uint64_t fnv1a64(const char* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (std::size_t i = 0; i < size; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x00000100000001b3ull;
    }
    return h;
}

}  // namespace flocksim
