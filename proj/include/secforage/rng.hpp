#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace secforage {

/// SplitMix64 finalizer. Used both for stream derivation and as a hash mixer.
std::uint64_t mix64(std::uint64_t x);

/// Small, fast generator (xoshiro256**) with a portable sampling layer, so
/// that simulation outputs are byte-identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next();
    std::uint64_t operator()() { return next(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t s_[4];
};

/// Independent consumers of randomness inside one run. Each gets its own
/// stream so toggling one consumer never shifts another.
enum class Stream : std::uint64_t {
    env_placement = 1,
    agent_actions = 2,   // + agent index
    social_selection = 64,
    transfer_noise = 65,
};

/// Derive the generator for (master seed, stream, sub-index).
Rng derive_stream(std::uint64_t master_seed, Stream stream, std::uint64_t sub = 0);

/// FNV-1a over a byte range, 64-bit.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace secforage
