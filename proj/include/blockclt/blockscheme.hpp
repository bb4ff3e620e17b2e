#pragma once

// Bernstein-style blocking of X_1..X_n into a left block of length u, a middle
// gap of length t and a right block of length u, with u + t + u = n.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockclt {

class PathBatch;

enum class TauKind { zero, sqrt_ceil, log_ceil, table };

/// Spacing sequence tau. Kinds other than `table` satisfy tau(1) = 0, are
/// nondecreasing and have tau(n)/n -> 0.
class TauRule {
public:
    static TauRule zero();
    /// ceil(sqrt(m)), with tau(1) forced to 0.
    static TauRule sqrt_ceil();
    /// ceil(log2(1 + m)) - 1.
    static TauRule log_ceil();
    /// Explicit values tau(1), tau(2), ... . With `validate` the invariants
    /// tau(1) = 0, monotonicity and tau(n) <= n are enforced.
    static TauRule table(std::vector<std::int64_t> values, bool validate = true);

    /// Parses "zero", "sqrt", "log" (table rules are built programmatically).
    static TauRule parse(const std::string& name);

    TauKind kind() const noexcept { return kind_; }
    const std::vector<std::int64_t>& values() const noexcept { return table_; }
    std::string name() const;

    std::int64_t operator()(std::int64_t n) const;

private:
    explicit TauRule(TauKind kind) : kind_(kind) {}

    TauKind kind_;
    std::vector<std::int64_t> table_;
};

struct BlockLayout {
    std::int64_t n = 1;
    std::int64_t u = 1;
    std::int64_t t = 0;
};

struct LayoutLevel {
    int r = 0;
    std::int64_t u = 0;  // u^r(N)
    std::int64_t t = 0;  // t(u^{r-1}(N)); zero at r = 0
};

struct IteratedLayout {
    std::int64_t n = 1;
    std::vector<LayoutLevel> levels;
};

/// Per-path normalized block sums.
struct BlockSums {
    std::vector<double> left;
    std::vector<double> mid;
    std::vector<double> right;
    double sigma_u = 1.0;
};

struct BlockPerturbations {
    std::span<const double> left;
    std::span<const double> right;
};

std::int64_t tau_eval(const TauRule& rule, std::int64_t n);

/// max{m >= 1 : 2m + tau(m) <= n} for n >= 2, and 1 for n = 1.
std::int64_t block_u(const TauRule& rule, std::int64_t n);
std::int64_t block_t(const TauRule& rule, std::int64_t n);
BlockLayout make_layout(const TauRule& rule, std::int64_t n);

IteratedLayout iterate_layout(const TauRule& rule, std::int64_t n, int h);

/// Raw (unnormalized) left, middle and right sums of one path.
struct RawBlockSums {
    double left = 0.0;
    double mid = 0.0;
    double right = 0.0;
};
RawBlockSums raw_block_sums(std::span<const double> path, const BlockLayout& layout);

BlockSums extract_block_sums(const PathBatch& batch, const BlockLayout& layout, double sigma_u,
                             std::optional<BlockPerturbations> perturbations = std::nullopt);

struct AsymptoticRow {
    std::int64_t n = 0;
    std::int64_t u = 0;
    std::int64_t t = 0;
    double n_over_u = 0.0;
    double t_over_u = 0.0;
};

struct AsymptoticReport {
    std::vector<AsymptoticRow> rows;
    /// |n/u - 2| nonincreasing over the tail of the grid.
    bool tail_nonincreasing = true;
    std::size_t tail_start = 0;
};

/// The tail is the last ceil(size/2) grid points unless `tail_start` is given.
AsymptoticReport asymptotic_check(const TauRule& rule, std::span<const std::int64_t> grid,
                                  std::optional<std::size_t> tail_start = std::nullopt);

} // namespace blockclt
