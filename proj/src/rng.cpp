#include "blockclt/rng.hpp"

#include <cmath>
#include <numbers>

namespace blockclt {

__extension__ typedef unsigned __int128 u128;

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

} // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9e3779b97f4a7c15ULL;
    return mix64(state);
}

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Stream::Stream(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

Stream::result_type Stream::operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Stream::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Stream::normal() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // 1 - U lies in (0, 1], keeping the logarithm finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Stream::below(std::uint64_t bound) noexcept {
    // Lemire's nearly divisionless method.
    auto m = static_cast<u128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<u128>((*this)()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

Stream derive_stream(std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t substream) noexcept {
    std::uint64_t h = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ (path_index * 0x9e3779b97f4a7c15ULL + 0x3c6ef372fe94f82bULL));
    h = mix64(h ^ (substream * 0xd1b54a32d192ed03ULL + 0xa54ff53a5f1d36f1ULL));
    return Stream(h);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) noexcept {
    return mix64(mix64(master_seed ^ 0xbb67ae8584caa73bULL) + tag * 0x9e3779b97f4a7c15ULL);
}

} // namespace blockclt
