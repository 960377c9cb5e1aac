#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace randman {

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/**
 * Stable seed derivation used throughout the experiments:
 *   h0 = mix64(root), h1 = mix64(h0 ^ a), h2 = mix64(h1 ^ b), ...
 * Any change here changes every published result; treat it as frozen.
 */
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key);
};

/**
 * Stream of uniforms and standard normals keyed by a 64-bit seed. The i-th
 * block of output is Philox(counter = (i, stream), key = seed), so a value
 * depends only on (seed, stream, position) and never on thread scheduling.
 */
class RandomStream {
public:
    using result_type = std::uint32_t;

    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform on (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal via Box-Muller; pairs are cached.
    double normal();

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace randman
