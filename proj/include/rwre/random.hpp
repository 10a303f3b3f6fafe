#pragma once

// Stateless counter-based randomness. Every variate is a pure function of a
// 64-bit key and a counter, so environments never need to be stored and walk
// streams can be replayed bit for bit.

#include <cstdint>

#include "rwre/lattice.hpp"

namespace rwre {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t chain(std::uint64_t key, std::uint64_t word) noexcept { return mix64(key ^ mix64(word)); }

/// Uniform on the open interval (0, 1): (k + 1/2) 2^-53 for the top 53 bits.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Key of one lattice site: (masterSeed, law tag, coordinates...).
inline std::uint64_t site_key(std::uint64_t masterSeed, std::uint64_t lawTag, const Site& x) noexcept {
    std::uint64_t k = chain(mix64(masterSeed), lawTag);
    for (int i = 0; i < x.dim; ++i) k = chain(k, static_cast<std::uint64_t>(x[i]));
    return k;
}

/// Sequence of uniforms u_0, u_1, ... drawn from one key.
class CounterStream {
public:
    explicit CounterStream(std::uint64_t key, std::uint64_t start = 0) noexcept : key_(key), counter_(start) {}

    double uniform() noexcept { return to_open_unit(chain(key_, counter_++)); }
    std::uint64_t bits() noexcept { return chain(key_, counter_++); }
    std::uint64_t consumed() const noexcept { return counter_; }
    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Seed of walk number `walk` in replicate `replicate` of an experiment.
inline std::uint64_t derive_seed(std::uint64_t masterSeed, std::uint64_t replicate, std::uint64_t walk) noexcept {
    return chain(chain(mix64(masterSeed ^ 0x5745414c4bULL), replicate), walk);
}

}  // namespace rwre
