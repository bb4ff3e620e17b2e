#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace blockclt {

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Stateless 64-bit mixer (the SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// xoshiro256** generator with portable uniform and normal transforms.
/// Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on [a, b).
    double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }
    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept;
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Stream for path `path_index` of an experiment seeded by `master_seed`.
/// `substream` separates independent drivers of the same path. Streams are a
/// pure function of the triple, so results do not depend on how paths are
/// distributed over workers.
Stream derive_stream(std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t substream = 0) noexcept;

/// Seed for an auxiliary experiment (pilot batches, null replicates) tied to
/// a master seed by a tag.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) noexcept;

} // namespace blockclt
