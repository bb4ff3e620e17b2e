#pragma once

#include <array>
#include <cstdint>

namespace blockclt {

/// Exact sum of doubles in a fixed-point accumulator spanning the full binary64
/// range. Addition and merging are exact, hence associative and commutative:
/// any partitioning of the inputs yields bit-identical results.
class ExactSum {
public:
    void add(double x) noexcept;
    void merge(const ExactSum& other) noexcept;

    /// Deterministic rounding of the exact value (error below 2^-90 relative).
    double value() const noexcept;

    bool operator==(const ExactSum& other) const noexcept;

private:
    static constexpr int kDigitBits = 32;
    static constexpr int kDigits = 70;

    void normalize() noexcept;

    std::array<std::int64_t, kDigits> digits_{};
    double special_ = 0.0;  // accumulates inf/nan inputs
    std::uint32_t pending_ = 0;
};

} // namespace blockclt
