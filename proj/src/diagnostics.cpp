#include "blockclt/diagnostics.hpp"

#include "blockclt/error.hpp"
#include "blockclt/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace blockclt {

namespace {

double sample_se(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (const double x : v) s += x;
    const double m = s / n;
    double ss = 0.0;
    for (const double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (n - 1.0) / n);
}

Estimate mean_with_se(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return Estimate{s / static_cast<double>(v.size()), sample_se(v), v.size()};
}

// Stderr of a complex mean from the spread of exp(i t x): sqrt((1 - |phi|^2) / n).
double cf_se(std::complex<double> phi, std::size_t n) {
    return std::sqrt(std::max(0.0, 1.0 - std::norm(phi)) / static_cast<double>(n));
}

} // namespace

double gaussian_moment(int p) {
    if (p < 0 || p > kMaxGaussianMoment)
        fail(ErrorKind::domain, "gaussian moment order must lie in [0, " + std::to_string(kMaxGaussianMoment) + "]");
    if (p % 2 == 1) return 0.0;
    double mu = 1.0;
    for (int q = 2; q <= p; q += 2) mu *= q - 1;
    return mu;
}

double z_score(double value, double target, double stderr_value) {
    if (stderr_value > 0.0) return std::clamp((value - target) / stderr_value, -kZSentinel, kZSentinel);
    if (value == target) return 0.0;
    return value > target ? kZSentinel : -kZSentinel;
}

const MomentEntry& MomentReport::at(int p) const {
    for (const auto& e : entries)
        if (e.p == p) return e;
    fail(ErrorKind::out_of_range, "no moment entry for p = " + std::to_string(p));
}

MomentReport moment_report(std::span<const double> samples, int max_degree) {
    if (max_degree < 1 || max_degree > kMaxReportDegree)
        fail(ErrorKind::domain, "moment report degree must lie in [1, " + std::to_string(kMaxReportDegree) + "]");
    if (samples.size() < 100) fail(ErrorKind::insufficient_data, "moment report needs at least 100 samples");
    MomentReport report;
    std::vector<double> powers(samples.begin(), samples.end());
    for (int p = 1; p <= max_degree; ++p) {
        if (p > 1)
            for (std::size_t i = 0; i < powers.size(); ++i) powers[i] *= samples[i];
        MomentEntry e;
        e.p = p;
        e.empirical = mean_with_se(powers);
        e.target = gaussian_moment(p);
        e.z = z_score(e.empirical.value, e.target, e.empirical.std_error);
        report.entries.push_back(e);
    }
    return report;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance(std::span<const double> samples) {
    if (samples.empty()) fail(ErrorKind::insufficient_data, "ks_distance needs at least one sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

std::complex<double> empirical_cf(std::span<const double> samples, double t) {
    if (samples.empty()) fail(ErrorKind::insufficient_data, "characteristic function of an empty sample");
    double c = 0.0;
    double s = 0.0;
    for (const double x : samples) {
        c += std::cos(t * x);
        s += std::sin(t * x);
    }
    const double n = static_cast<double>(samples.size());
    return {c / n, s / n};
}

std::vector<CfGap> cf_compare(std::span<const double> samples, std::span<const double> t_grid) {
    std::vector<CfGap> out;
    for (const double t : t_grid) {
        if (!std::isfinite(t)) fail(ErrorKind::domain, "t grid must be finite");
        const auto phi = empirical_cf(samples, t);
        out.push_back({t, phi, Estimate{std::abs(phi - std::exp(-t * t / 2.0)), cf_se(phi, samples.size()), samples.size()}});
    }
    return out;
}

std::vector<CfGap> cf_power_compare(std::span<const double> samples, int r, std::span<const double> t_grid,
                                    std::optional<double> sigma) {
    if (r < 0 || r > kMaxCfPower) fail(ErrorKind::domain, "cf power level must lie in [0, " + std::to_string(kMaxCfPower) + "]");
    const double sg = sigma.value_or(std::exp2(0.5 * r));
    const double scale = sg * std::ldexp(1.0, -r);
    const double power = std::ldexp(1.0, r);
    std::vector<CfGap> out;
    for (const double t : t_grid) {
        if (!std::isfinite(t)) fail(ErrorKind::domain, "t grid must be finite");
        const auto phi = empirical_cf(samples, scale * t);
        std::complex<double> z = phi;
        for (int i = 0; i < r; ++i) z *= z;
        const double se = power * std::pow(std::abs(phi), power - 1.0) * cf_se(phi, samples.size());
        out.push_back({t, phi, Estimate{std::abs(z - std::exp(-t * t / 2.0)), se, samples.size()}});
    }
    return out;
}

Estimate lindeberg_functional(std::span<const double> samples, double d, int k_level) {
    if (!(d > 0.0)) fail(ErrorKind::domain, "lindeberg threshold d must be positive");
    if (k_level < 0) fail(ErrorKind::domain, "lindeberg level must be nonnegative");
    if (samples.empty()) fail(ErrorKind::insufficient_data, "lindeberg functional of an empty sample");
    const double threshold = d * std::exp2(0.5 * k_level);
    std::vector<double> v(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        v[i] = std::abs(samples[i]) > threshold ? samples[i] * samples[i] : 0.0;
    return mean_with_se(v);
}

std::vector<Estimate> ui_tail_profile(std::span<const double> samples, std::span<const double> thresholds) {
    if (samples.empty()) fail(ErrorKind::insufficient_data, "tail profile of an empty sample");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) fail(ErrorKind::domain, "tail thresholds must be positive");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) fail(ErrorKind::domain, "tail thresholds must increase");
    }
    std::vector<Estimate> out;
    std::vector<double> v(samples.size());
    for (const double k : thresholds) {
        for (std::size_t i = 0; i < samples.size(); ++i)
            v[i] = std::abs(samples[i]) > k ? samples[i] * samples[i] : 0.0;
        out.push_back(mean_with_se(v));
    }
    return out;
}

VarianceRatio variance_ratio(const PathBatch& batch, const TauRule& rule, std::int64_t n) {
    if (n < 2 || static_cast<std::int64_t>(batch.path_length()) < n)
        fail(ErrorKind::shape, "variance_ratio needs 2 <= n <= path_length");
    const BlockLayout layout = make_layout(rule, n);
    const std::size_t paths = batch.n_paths();
    std::vector<double> full(paths), left(paths);
    for (std::size_t i = 0; i < paths; ++i) {
        const auto path = batch.path(i);
        double s = 0.0;
        double l = 0.0;
        for (std::int64_t t = 0; t < n; ++t) {
            s += path[static_cast<std::size_t>(t)];
            if (t < layout.u) l += path[static_cast<std::size_t>(t)];
        }
        full[i] = s;
        left[i] = l;
    }
    return variance_ratio(full, left, layout);
}

VarianceRatio variance_ratio(std::span<const double> full, std::span<const double> left, const BlockLayout& layout) {
    if (full.size() != left.size()) fail(ErrorKind::shape, "variance_ratio needs one left sum per full sum");
    const std::size_t paths = full.size();
    const std::int64_t n = layout.n;
    if (paths < 3) fail(ErrorKind::insufficient_data, "variance_ratio needs at least 3 paths");
    const double np = static_cast<double>(paths);
    double mf = 0.0;
    double ml = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        mf += full[i];
        ml += left[i];
    }
    mf /= np;
    ml /= np;
    // Centered squares; their means are the variances, their
    // (co)variances drive the delta method on log sd(S_n) - log sd(S_u).
    std::vector<double> qf(paths), ql(paths);
    double vf = 0.0;
    double vl = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        qf[i] = (full[i] - mf) * (full[i] - mf);
        ql[i] = (left[i] - ml) * (left[i] - ml);
        vf += qf[i];
        vl += ql[i];
    }
    vf /= np;
    vl /= np;
    if (!(vf > 0.0) || !(vl > 0.0)) fail(ErrorKind::insufficient_data, "block sums have zero variance");
    double cff = 0.0;
    double cll = 0.0;
    double cfl = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
        cff += (qf[i] - vf) * (qf[i] - vf);
        cll += (ql[i] - vl) * (ql[i] - vl);
        cfl += (qf[i] - vf) * (ql[i] - vl);
    }
    cff /= np - 1.0;
    cll /= np - 1.0;
    cfl /= np - 1.0;
    const double var_log = 0.25 * (cff / (vf * vf) + cll / (vl * vl) - 2.0 * cfl / (vf * vl)) / np;
    VarianceRatio out;
    out.n = n;
    out.u = layout.u;
    const double ratio = std::sqrt(vf / vl);
    out.ratio = Estimate{ratio, ratio * std::sqrt(std::max(0.0, var_log)), paths};
    out.n_over_u = static_cast<double>(n) / static_cast<double>(layout.u);
    return out;
}

std::vector<JointMomentEntry> joint_gaussian_check(std::span<const double> left, std::span<const double> right,
                                                   int max_degree) {
    if (left.size() != right.size()) fail(ErrorKind::shape, "joint check needs equal sample counts");
    if (left.size() < 2) fail(ErrorKind::insufficient_data, "joint check needs at least 2 samples");
    if (max_degree < 1 || max_degree > kMaxReportDegree) fail(ErrorKind::domain, "joint check degree out of range");
    std::vector<JointMomentEntry> out;
    std::vector<double> v(left.size());
    for (int total = 1; total <= max_degree; ++total) {
        for (int p = total; p >= 0; --p) {
            const int q = total - p;
            for (std::size_t i = 0; i < left.size(); ++i) v[i] = std::pow(left[i], p) * std::pow(right[i], q);
            JointMomentEntry e;
            e.p = p;
            e.q = q;
            e.empirical = mean_with_se(v);
            e.target = gaussian_moment(p) * gaussian_moment(q);
            e.z = z_score(e.empirical.value, e.target, e.empirical.std_error);
            out.push_back(e);
        }
    }
    return out;
}

double delta_k(double window_bound, double rho, double i_gap, double s_gap) {
    if (window_bound < 0.0 || rho < 0.0 || i_gap < 0.0 || s_gap < 0.0)
        fail(ErrorKind::domain, "delta_k components must be nonnegative");
    return window_bound * rho + rho + 16.0 * i_gap + 14.0 * s_gap;
}

std::optional<double> DeltaTable::at(int k, std::int64_t n) const {
    for (const auto& e : entries)
        if (e.k == k && e.n == n) return e.composite;
    return std::nullopt;
}

std::vector<std::optional<int>> choose_kn(const DeltaTable& grid, std::span<const std::int64_t> ns,
                                          const std::function<double(std::int64_t)>& epsilon) {
    std::vector<int> ks;
    for (const auto& e : grid.entries)
        if (e.k >= 1) ks.push_back(e.k);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    std::vector<std::optional<int>> out(ns.size());
    int cap = ks.empty() ? 0 : ks.back();
    for (std::size_t idx = ns.size(); idx-- > 0;) {
        const std::int64_t n = ns[idx];
        const double eps = epsilon(n);
        for (auto it = ks.rbegin(); it != ks.rend(); ++it) {
            if (*it > cap) continue;
            const auto d = grid.at(*it, n);
            if (d && std::ldexp(*d, *it) <= eps) {
                out[idx] = *it;
                cap = *it;
                break;
            }
        }
    }
    return out;
}

} // namespace blockclt
