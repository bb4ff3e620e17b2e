#pragma once

// Dependence and stationarity gaps between the cell distributions of two
// statistics, moment gaps, restricted alpha-mixing and remainder tails.

#include "blockclt/engine.hpp"
#include "blockclt/partition.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace blockclt {

class PathBatch;

/// A supremum estimate together with the event attaining it.
struct GapEstimate {
    /// value: the gap; std_error: selection-aware null RMS when permutation
    /// replicates were requested, otherwise the event-level stderr.
    Estimate estimate;
    double event_stderr = 0.0;
    /// Attaining events as window slots of the margins. For stationarity
    /// gaps only event_a is used.
    std::vector<CellTable::Slot> event_a;
    std::vector<CellTable::Slot> event_b;
    bool exact = true;
    /// Out-of-window mass of each margin, reported alongside.
    double out_a = 0.0;
    double out_b = 0.0;

    double value() const noexcept { return estimate.value; }
    double std_error() const noexcept { return estimate.std_error; }
};

struct GapOptions {
    /// Random restarts for the heuristic algebra search.
    int restarts = 32;
    /// Permutation replicates for the null stderr; 0 keeps the event stderr.
    int null_replicates = 32;
    std::uint64_t seed = 0x5eed;
    /// Exhaustive search when the smaller margin support has at most this
    /// many cells, or when 2^min * max stays below exact_cost_limit.
    std::size_t exact_cells = 16;
    double exact_cost_limit = 67108864.0;  // 2^26
};

/// |P(A x B) - P(A) P(B)| for unions of window slots.
double event_gap(const CellTable& table, std::span<const CellTable::Slot> a, std::span<const CellTable::Slot> b);
/// |P(a in E) - P(b in E)| for a union of window slots.
double event_stationarity_gap(const CellTable& table, std::span<const CellTable::Slot> e);

/// Sup over single window-cell pairs (exact). The null stderr accounts for
/// the max over cells, like the algebra gap's.
GapEstimate percell_gap(const CellTable& table, const GapOptions& options = {});

/// Sup over pairs of unions of window cells.
GapEstimate algebra_gap(const CellTable& table, const GapOptions& options = {});

struct StationarityGap {
    GapEstimate percell;
    GapEstimate algebra;
};

/// Per-cell and algebra stationarity gaps; the algebra sup over window
/// unions is max(sum of positive, sum of negative) differences.
StationarityGap stationarity_gap(const CellTable& table, const GapOptions& options = {});

struct MomentGap {
    int p = 0;
    int q = 0;  // 0 for marginal entries
    Estimate gap;
};

struct MomentGapTable {
    int degree = 0;
    std::vector<MomentGap> marginal;  // |E L^p - E R^p|, p = 1..degree
    std::vector<MomentGap> cross;     // |E L^p R^q - E L^p E R^q|, p, q >= 1, p + q <= degree

    const MomentGap& cross_at(int p, int q) const;
    const MomentGap& marginal_at(int p) const;
};

inline constexpr int kMaxMomentDegree = 8;

MomentGapTable moment_gaps(std::span<const double> left, std::span<const double> right, int degree);

/// Algebra gap between the normalized sums of X_1..X_m and
/// X_{m+h+1}..X_{2m+h}; a lower bound on alpha(h). The normalizer is the
/// batch's sigma(m) if recorded, the exact sigma if known, else the sample sd.
GapEstimate alpha_restricted(const PathBatch& batch, int k, std::int64_t h, std::int64_t m,
                             const GapOptions& options = {});

struct TailGrid {
    int min_exponent = -30;
    int max_exponent = 30;
    int steps_per_octave = 1;
};

struct RemainderTail {
    double rho = 0.0;
    Estimate tail;           // P{|mid| > rho}
    bool satisfied = false;  // false when no grid point qualifies (rho = grid max)
};

/// Smallest grid rho with P{|mid| > rho} < rho.
RemainderTail remainder_tail(std::span<const double> mid, const TailGrid& grid = {});

/// Running maximum over a grid of per-point gaps (sup over n' <= n, r <= h).
GapEstimate max_gap(std::span<const GapEstimate> gaps);

} // namespace blockclt
