#include "blockclt/engine.hpp"

#include "blockclt/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace blockclt {

Estimate mean_estimate(std::span<const double> samples) {
    if (samples.size() < 2) fail(ErrorKind::insufficient_data, "mean_estimate needs at least 2 samples");
    ExactSum sum;
    for (const double x : samples) sum.add(x);
    const double n = static_cast<double>(samples.size());
    const double mean = sum.value() / n;
    ExactSum squares;
    for (const double x : samples) squares.add((x - mean) * (x - mean));
    const double variance = squares.value() / (n - 1.0);
    return Estimate{mean, std::sqrt(variance / n), samples.size()};
}

Estimate probability_estimate(std::uint64_t hits, std::uint64_t total) {
    if (total == 0) fail(ErrorKind::insufficient_data, "probability_estimate needs a positive total");
    if (hits > total) fail(ErrorKind::domain, "hit count exceeds total");
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return Estimate{p, std::sqrt(p * (1.0 - p) / static_cast<double>(total)), total};
}

MomentAccumulator::MomentAccumulator(int max_power) {
    if (max_power < 1) fail(ErrorKind::domain, "moment accumulator needs max_power >= 1");
    sums_.resize(static_cast<std::size_t>(max_power));
}

void MomentAccumulator::add(double x) noexcept {
    ++count_;
    double power = 1.0;
    for (auto& s : sums_) {
        power *= x;
        s.add(power);
    }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.sums_.size() != sums_.size())
        fail(ErrorKind::merge, "cannot merge moment accumulators of orders " + std::to_string(sums_.size()) +
                                   " and " + std::to_string(other.sums_.size()));
    count_ += other.count_;
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].merge(other.sums_[i]);
}

double MomentAccumulator::sum(int power) const {
    if (power < 1 || power > max_power()) fail(ErrorKind::domain, "power outside accumulator range");
    return sums_[static_cast<std::size_t>(power - 1)].value();
}

Estimate MomentAccumulator::moment(int power) const {
    if (count_ == 0) fail(ErrorKind::insufficient_data, "empty accumulator");
    const double n = static_cast<double>(count_);
    const double mean = sum(power) / n;
    double se = 0.0;
    if (2 * power <= max_power() && count_ >= 2) {
        const double var = std::max(0.0, (sum(2 * power) / n - mean * mean) * n / (n - 1.0));
        se = std::sqrt(var / n);
    }
    return Estimate{mean, se, count_};
}

MomentAccumulator merge_partials(const MomentAccumulator& a, const MomentAccumulator& b) {
    MomentAccumulator out = a;
    out.merge(b);
    return out;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BLOCKCLT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t count, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& body, std::size_t chunk) {
    if (count == 0) return;
    chunk = std::max<std::size_t>(1, chunk);
    const std::size_t n_chunks = (count + chunk - 1) / chunk;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n_chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c * chunk, std::min(count, (c + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                body(c * chunk, std::min(count, (c + 1) * chunk));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n_chunks);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace blockclt
