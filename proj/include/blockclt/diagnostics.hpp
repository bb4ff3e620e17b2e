#pragma once

// CLT instruments: Gaussian moment targets, distances to N(0, 1),
// characteristic-function gaps, truncated second moments, variance ratios,
// joint-Gaussianity screens, the Delta_k composite and the k_n selector.

#include "blockclt/blockscheme.hpp"
#include "blockclt/engine.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace blockclt {

class PathBatch;

inline constexpr int kMaxGaussianMoment = 16;
inline constexpr int kMaxReportDegree = 8;
inline constexpr int kMaxCfPower = 10;
/// Reported in place of a z-score whose stderr is zero.
inline constexpr double kZSentinel = 1e9;

/// mu_p of N(0, 1): 0 for odd p, (p - 1)!! for even p.
double gaussian_moment(int p);

/// (value - target) / stderr, with the sentinel for zero stderr.
double z_score(double value, double target, double stderr_value);

struct MomentEntry {
    int p = 0;
    Estimate empirical;
    double target = 0.0;
    double z = 0.0;
};

struct MomentReport {
    std::vector<MomentEntry> entries;
    const MomentEntry& at(int p) const;
};

MomentReport moment_report(std::span<const double> samples, int max_degree);

/// Phi(x) = erfc(-x / sqrt 2) / 2.
double normal_cdf(double x);

/// sup |F_n - Phi| over both one-sided limits at each jump.
double ks_distance(std::span<const double> samples);

struct CfGap {
    double t = 0.0;
    std::complex<double> phi;  // empirical value at the evaluated argument
    Estimate gap;              // |phi_hat - exp(-t^2 / 2)|
};

/// Empirical characteristic function mean of exp(i t x).
std::complex<double> empirical_cf(std::span<const double> samples, double t);

std::vector<CfGap> cf_compare(std::span<const double> samples, std::span<const double> t_grid);

/// |phi_hat(sigma 2^-r t)^(2^r) - exp(-t^2 / 2)|, sigma defaulting to 2^(r/2).
std::vector<CfGap> cf_power_compare(std::span<const double> samples, int r, std::span<const double> t_grid,
                                    std::optional<double> sigma = std::nullopt);

/// Mean of S^2 1{|S| > d 2^(k/2)}.
Estimate lindeberg_functional(std::span<const double> samples, double d, int k_level);

/// E{S^2 1{|S| > K}} per threshold.
std::vector<Estimate> ui_tail_profile(std::span<const double> samples, std::span<const double> thresholds);

struct VarianceRatio {
    std::int64_t n = 0;
    std::int64_t u = 0;
    Estimate ratio;  // sd(S_n) / sd(S_u)
    double ratio_target = 1.4142135623730951;
    double n_over_u = 0.0;
    double n_over_u_target = 2.0;
};

/// Empirical sd of the first-n sums against the left block sums.
VarianceRatio variance_ratio(const PathBatch& batch, const TauRule& rule, std::int64_t n);
/// Same from per-path sums S_n and S_u of the layout.
VarianceRatio variance_ratio(std::span<const double> full, std::span<const double> left, const BlockLayout& layout);

struct JointMomentEntry {
    int p = 0;
    int q = 0;
    Estimate empirical;
    double target = 0.0;
    double z = 0.0;
};

/// z-scores of E{L^p R^q} against mu_p mu_q for 1 <= p + q <= max_degree.
std::vector<JointMomentEntry> joint_gaussian_check(std::span<const double> left, std::span<const double> right,
                                                   int max_degree = 4);

/// Delta_k = b rho + rho + 16 I + 14 S (reconstructed composite).
double delta_k(double window_bound, double rho, double i_gap, double s_gap);

struct DeltaEntry {
    int k = 0;
    std::int64_t n = 0;
    double window_bound = 0.0;
    double rho = 0.0;
    double i_gap = 0.0;
    double s_gap = 0.0;
    double composite = 0.0;
};

struct DeltaTable {
    std::vector<DeltaEntry> entries;
    /// Composite for (k, n); nullopt when absent.
    std::optional<double> at(int k, std::int64_t n) const;
};

/// For each n in `ns`, the largest k >= 1 in the grid with
/// 2^k Delta_k(n) <= epsilon(n), constrained to be nondecreasing in n
/// (chosen backwards from the largest n). nullopt marks infeasible n.
std::vector<std::optional<int>> choose_kn(const DeltaTable& grid, std::span<const std::int64_t> ns,
                                          const std::function<double(std::int64_t)>& epsilon);

} // namespace blockclt
