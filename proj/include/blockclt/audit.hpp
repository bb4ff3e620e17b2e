#pragma once

// Monte Carlo audits of the blocking inequality chain. Every record keeps
// both sides with standard errors and the components they were assembled
// from, so the pass flag can be recomputed and constants swapped.

#include "blockclt/blockscheme.hpp"
#include "blockclt/dependence.hpp"
#include "blockclt/engine.hpp"
#include "blockclt/processes.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace blockclt {

/// Multipliers of the right-hand sides; w_* multiply 4^-k, tw_* multiply |t| 4^-k.
struct AuditConstants {
    double v3_s = 2.0;
    double v4_i = 4.0;
    double v5_s = 6.0, v5_w = 4.0, v5_tw = 4.0;
    double v6_i = 16.0, v6_s = 8.0, v6_w = 16.0, v6_tw = 16.0;
    double v7_rho = 2.0, v7_i = 16.0, v7_s = 14.0, v7_w = 20.0, v7_tw = 20.0;
    double v8_w = 22.0, v8_tw = 20.0;
    double v9_w = 44.0, v9_tw = 40.0;
};

enum class AuditRule {
    one_sided,    // lhs <= rhs + tolerance * (se_lhs + se_rhs)
    equivalence,  // lhs and rhs carry growth slopes; both grow or neither does
};

inline constexpr double kAuditTolerance = 3.0;

struct AuditConfig {
    int k = 0;
    int h = 0;
    int r = 0;
    double t = 0.0;
    std::int64_t n = 0;
    std::string process;
};

struct AuditRecord {
    std::string id;
    Estimate lhs;
    Estimate rhs;
    AuditRule rule = AuditRule::one_sided;
    /// Growth threshold for the equivalence rule (log-log slope).
    double growth_slope = 0.25;
    bool pass = false;
    bool skipped = false;
    std::string reason;
    AuditConfig config;
    std::vector<std::pair<std::string, double>> components;

    double slack() const noexcept { return rhs.value - lhs.value; }
    /// Pass flag recomputed from the stored sides.
    bool evaluate() const noexcept;
    /// Counted as a failure: evaluated and not passing.
    bool failed() const noexcept { return !skipped && !pass; }
};

/// Finalizes `pass` from the stored sides.
AuditRecord& seal(AuditRecord& record);

/// Per-level normalized statistics of an iterated layout: S_r is the sum
/// of the first u^r values over sigma_r; for r >= 1, mid and right are the
/// middle and right blocks of the level r - 1 prefix over sigma_r.
struct LevelStats {
    int r = 0;
    std::int64_t u = 0;
    std::int64_t t = 0;
    double sigma = 1.0;
    std::vector<double> s;
    std::vector<double> mid;
    std::vector<double> right;
};

struct IteratedStats {
    std::int64_t n = 0;
    std::string process;
    std::vector<LevelStats> levels;
};

/// sigma(u^r) per level: exact where available, pilot batches otherwise.
std::vector<double> level_sigmas(const ProcessSpec& spec, const IteratedLayout& layout, std::uint64_t seed,
                                 std::size_t pilot_paths, unsigned threads = 1);

IteratedStats iterated_stats(const PathBatch& batch, const IteratedLayout& layout, std::span<const double> sigmas);

/// Estimated ingredients of the right-hand sides at window level k, with
/// suprema over levels 1..h.
struct AuditComponents {
    int k = 0;
    int h = 0;
    Estimate s_gap;      // stationarity algebra gap between S_r and S'_r
    Estimate i_gap;      // independence algebra gap between S_r and S'_r
    double rho = 0.0;    // remainder tail level of the middle blocks
    double varrho = 0.0; // max_r |1 - sigma_{r-1} / (sqrt 2 sigma_r)|
    double window_bound = 0.0;
};

AuditComponents audit_components(const IteratedStats& stats, int k, int h, const GapOptions& options = {});

AuditRecord audit_v2(const IteratedStats& stats, int r, const AuditComponents& c);
std::pair<AuditRecord, AuditRecord> audit_v3_v4(const IteratedStats& stats, int r, const AuditComponents& c,
                                                const AuditConstants& k = {});
std::pair<AuditRecord, AuditRecord> audit_v5_v6(const IteratedStats& stats, int r, double t, const AuditComponents& c,
                                                const AuditConstants& k = {});
AuditRecord audit_v7(const IteratedStats& stats, int r, double t, const AuditComponents& c,
                     const AuditConstants& k = {});
AuditRecord audit_v8(const IteratedStats& stats, int r, double t, const AuditComponents& c,
                     const AuditConstants& k = {});
/// `c` must be computed at window level k + h with suprema over 1..h.
AuditRecord audit_v9(const IteratedStats& stats, int k, int h, double t, const AuditComponents& c,
                     const AuditConstants& constants = {});
/// The telescoped bound with k = h = h_n; `c` at level 2 h_n over 1..h_n.
AuditRecord audit_v10(const IteratedStats& stats, int h_n, double t, const AuditComponents& c,
                      const AuditConstants& constants = {});

struct P42Options {
    std::vector<std::int64_t> n_grid{64, 256, 1024};
    std::size_t paths = 4000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double growth_slope = 0.25;
};

/// Tracks E{M_n^4} (M_n normalized by sqrt n) and n^-2 sum_{r <= n} E{G_r^4}
/// over the grid, G_r being the kernel partial sums at position r.
AuditRecord audit_p42(const ProcessSpec& spec, const P42Options& options = {});

struct P42Series {
    std::vector<std::int64_t> n;
    std::vector<Estimate> m4;
    std::vector<Estimate> g4;
};
P42Series p42_series(const ProcessSpec& spec, const P42Options& options);

/// Least-squares slope of log2 y on log2 n with propagated stderr.
Estimate log_slope(std::span<const std::int64_t> n, std::span<const Estimate> y);

/// Valid audit ids.
const std::vector<std::string>& audit_ids();

} // namespace blockclt
