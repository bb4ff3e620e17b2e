#include "blockclt/exact_sum.hpp"

#include <cmath>

namespace blockclt {

__extension__ typedef unsigned __int128 u128;

namespace {
// Digit 0 holds bit weight 2^-1074, the smallest subnormal.
constexpr int kBias = 1074;
constexpr std::int64_t kMask = (std::int64_t{1} << 32) - 1;
} // namespace

void ExactSum::add(double x) noexcept {
    if (!std::isfinite(x)) {
        special_ += x;
        return;
    }
    if (x == 0.0) return;
    int exponent = 0;
    const double fraction = std::frexp(std::abs(x), &exponent);
    auto mantissa = static_cast<std::uint64_t>(std::ldexp(fraction, 53));
    int pos = exponent - 53 + kBias;
    if (pos < 0) {
        // Subnormal: the dropped low bits are zero.
        mantissa >>= -pos;
        pos = 0;
    }
    const int digit = pos / kDigitBits;
    const auto shifted = static_cast<u128>(mantissa) << (pos % kDigitBits);
    const std::int64_t sign = x < 0 ? -1 : 1;
    digits_[digit] += sign * static_cast<std::int64_t>(static_cast<std::uint64_t>(shifted) & kMask);
    digits_[digit + 1] += sign * static_cast<std::int64_t>(static_cast<std::uint64_t>(shifted >> 32) & kMask);
    digits_[digit + 2] += sign * static_cast<std::int64_t>(static_cast<std::uint64_t>(shifted >> 64));
    if (++pending_ >= (1u << 30)) normalize();
}

void ExactSum::normalize() noexcept {
    for (int i = 0; i + 1 < kDigits; ++i) {
        const std::int64_t carry = digits_[i] >> kDigitBits;
        digits_[i] -= carry * (std::int64_t{1} << kDigitBits);
        digits_[i + 1] += carry;
    }
    pending_ = 0;
}

void ExactSum::merge(const ExactSum& other) noexcept {
    ExactSum rhs = other;
    rhs.normalize();
    normalize();
    for (int i = 0; i < kDigits; ++i) digits_[i] += rhs.digits_[i];
    special_ += rhs.special_;
    normalize();
}

double ExactSum::value() const noexcept {
    ExactSum copy = *this;
    copy.normalize();
    // A negative total leaves a borrow in the top digit; read the magnitude.
    const bool negative = copy.digits_[kDigits - 1] < 0;
    if (negative) {
        for (auto& d : copy.digits_) d = -d;
        copy.normalize();
    }
    int top = -1;
    for (int i = kDigits - 1; i >= 0; --i) {
        if (copy.digits_[i] != 0) {
            top = i;
            break;
        }
    }
    double result = 0.0;
    if (top >= 0) {
        const int low = top >= 3 ? top - 3 : 0;
        for (int i = low; i <= top; ++i)
            result += std::ldexp(static_cast<double>(copy.digits_[i]), kDigitBits * i - kBias);
    }
    return (negative ? -result : result) + copy.special_;
}

bool ExactSum::operator==(const ExactSum& other) const noexcept {
    ExactSum a = *this;
    ExactSum b = other;
    a.normalize();
    b.normalize();
    if (a.digits_ != b.digits_) return false;
    // NaN != NaN, so compare the special channel by bit pattern class.
    if (std::isnan(a.special_) || std::isnan(b.special_)) return std::isnan(a.special_) && std::isnan(b.special_);
    return a.special_ == b.special_;
}

} // namespace blockclt
