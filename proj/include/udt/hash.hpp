#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace udt::hash {

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

/// FNV-1a over raw bytes. Chainable via the `state` argument.
inline uint64_t fnv1a(std::string_view bytes, uint64_t state = kFnvOffset) {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= kFnvPrime;
    }
    return state;
}

/// splitmix64 finalizer: full-avalanche 64-bit mix.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic 64-bit RNG stream (splitmix64). Used wherever results must
/// be bit-identical across platforms; never std::mt19937 + distributions.
class Rng64 {
public:
    explicit Rng64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform value in [0, bound) by modulo; bound must be > 0.
    uint64_t below(uint64_t bound) { return next() % bound; }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

/// Seeded string hash: FNV-1a then avalanche with the seed folded in.
inline uint64_t seeded(std::string_view bytes, uint64_t seed) {
    return mix64(fnv1a(bytes) ^ seed);
}

std::string hex64(uint64_t v);

/// Parses exactly 16 lowercase hex chars; throws std::invalid_argument otherwise.
uint64_t parse_hex64(std::string_view s);

/// First 128 bits of SHA-256 over `bytes`, as 32 lowercase hex chars.
std::string sha256_trunc128_hex(std::string_view bytes);

}  // namespace udt::hash
