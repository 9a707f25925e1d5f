#pragma once

// One 64-bit seed fans out to independent streams keyed by fixed text labels.

#include <cstdint>
#include <string_view>

namespace bilinear {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic stream: uniform doubles in [0, 1) from the top 53 bits.
class SeedStream {
public:
    SeedStream(std::uint64_t seed, std::string_view label) : state_(seed ^ fnv1a(label)) { splitmix64(state_); }

    std::uint64_t next_u64() { return splitmix64(state_); }
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

} // namespace bilinear
