#pragma once

// Monte Carlo plumbing: estimates with standard errors, mergeable moment
// accumulators and a deterministic parallel map over path indices.

#include "blockclt/exact_sum.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace blockclt {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

/// Mean with stderr = sample sd / sqrt(n).
Estimate mean_estimate(std::span<const double> samples);

/// Proportion with stderr = sqrt(p(1 - p) / n).
Estimate probability_estimate(std::uint64_t hits, std::uint64_t total);

/// Sums of x, x^2, ..., x^P over a sample, exact under merging.
class MomentAccumulator {
public:
    explicit MomentAccumulator(int max_power = 2);

    void add(double x) noexcept;
    /// Throws ErrorKind::merge when the accumulators track different powers.
    void merge(const MomentAccumulator& other);

    int max_power() const noexcept { return static_cast<int>(sums_.size()); }
    std::uint64_t count() const noexcept { return count_; }
    double sum(int power) const;
    /// Mean of x^power with stderr from the sample variance of x^power
    /// (requires 2 * power <= max_power for the stderr; otherwise stderr = 0).
    Estimate moment(int power) const;

    bool operator==(const MomentAccumulator& other) const = default;

private:
    std::uint64_t count_ = 0;
    std::vector<ExactSum> sums_;
};

MomentAccumulator merge_partials(const MomentAccumulator& a, const MomentAccumulator& b);

/// Worker count: `requested` if nonzero, else $BLOCKCLT_THREADS, else the
/// hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Runs body(begin, end) over fixed-size chunks of [0, count). Chunking is
/// independent of the worker count; bodies must write only to
/// index-addressed output, which makes results independent of threads.
void parallel_chunks(std::size_t count, unsigned threads,
                     const std::function<void(std::size_t begin, std::size_t end)>& body,
                     std::size_t chunk = 256);

} // namespace blockclt
