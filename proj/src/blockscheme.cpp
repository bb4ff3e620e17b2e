#include "blockclt/blockscheme.hpp"

#include "blockclt/error.hpp"
#include "blockclt/processes.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>

namespace blockclt {

namespace {

std::int64_t isqrt_ceil(std::int64_t m) {
    auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(m)));
    while (s * s > m) --s;
    while ((s + 1) * (s + 1) <= m) ++s;
    return s * s == m ? s : s + 1;
}

} // namespace

TauRule TauRule::zero() { return TauRule(TauKind::zero); }
TauRule TauRule::sqrt_ceil() { return TauRule(TauKind::sqrt_ceil); }
TauRule TauRule::log_ceil() { return TauRule(TauKind::log_ceil); }

TauRule TauRule::table(std::vector<std::int64_t> values, bool validate) {
    if (values.empty()) fail(ErrorKind::domain, "tau table must not be empty");
    if (validate) {
        if (values.front() != 0) fail(ErrorKind::domain, "tau table must start with tau(1) = 0");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto n = static_cast<std::int64_t>(i + 1);
            if (values[i] < 0 || values[i] > n)
                fail(ErrorKind::domain, "tau table entry " + std::to_string(n) + " outside [0, n]");
            if (i > 0 && values[i] < values[i - 1]) fail(ErrorKind::domain, "tau table must be nondecreasing");
        }
    }
    TauRule rule(TauKind::table);
    rule.table_ = std::move(values);
    return rule;
}

TauRule TauRule::parse(const std::string& name) {
    if (name == "zero") return zero();
    if (name == "sqrt" || name == "sqrt-ceil") return sqrt_ceil();
    if (name == "log" || name == "log-ceil") return log_ceil();
    fail(ErrorKind::config, "unknown tau rule '" + name + "' (expected zero, sqrt, log)");
}

std::string TauRule::name() const {
    switch (kind_) {
    case TauKind::zero: return "zero";
    case TauKind::sqrt_ceil: return "sqrt";
    case TauKind::log_ceil: return "log";
    case TauKind::table: return "table";
    }
    return "unknown";
}

std::int64_t TauRule::operator()(std::int64_t n) const {
    if (n < 1) fail(ErrorKind::domain, "tau is defined for n >= 1");
    switch (kind_) {
    case TauKind::zero: return 0;
    case TauKind::sqrt_ceil: return n == 1 ? 0 : isqrt_ceil(n);
    case TauKind::log_ceil: return std::bit_width(static_cast<std::uint64_t>(n)) - 1;
    case TauKind::table:
        if (static_cast<std::size_t>(n) > table_.size())
            fail(ErrorKind::out_of_range,
                 "tau table has " + std::to_string(table_.size()) + " entries, queried n = " + std::to_string(n));
        return table_[static_cast<std::size_t>(n - 1)];
    }
    return 0;
}

std::int64_t tau_eval(const TauRule& rule, std::int64_t n) { return rule(n); }

std::int64_t block_u(const TauRule& rule, std::int64_t n) {
    if (n < 1) fail(ErrorKind::domain, "block_u requires n >= 1");
    if (n == 1) return 1;
    auto fits = [&](std::int64_t m) { return 2 * m + rule(m) <= n; };

    std::int64_t hi = n / 2;
    if (rule.kind() == TauKind::table) {
        const auto len = static_cast<std::int64_t>(rule.values().size());
        // Unvalidated tables may be non-monotone: the definition is a plain maximum.
        bool monotone = rule.values().front() >= 0;
        for (std::size_t i = 1; i < rule.values().size() && monotone; ++i)
            monotone = rule.values()[i] >= rule.values()[i - 1];
        if (hi > len) {
            if (fits(len)) (void)rule(len + 1);  // answer would lie beyond the table
            hi = len;
        }
        if (!monotone) {
            for (std::int64_t m = hi; m >= 1; --m)
                if (fits(m)) return m;
            fail(ErrorKind::infeasible, "no m satisfies 2m + tau(m) <= " + std::to_string(n));
        }
    }
    if (!fits(1)) fail(ErrorKind::infeasible, "no m satisfies 2m + tau(m) <= " + std::to_string(n));
    // 2m + tau(m) is strictly increasing, so bisect for the last m that fits.
    std::int64_t lo = 1;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo + 1) / 2;
        if (fits(mid))
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

std::int64_t block_t(const TauRule& rule, std::int64_t n) {
    const auto u = block_u(rule, n);
    return n == 1 ? 0 : n - 2 * u;
}

BlockLayout make_layout(const TauRule& rule, std::int64_t n) {
    const auto u = block_u(rule, n);
    return BlockLayout{n, u, n == 1 ? 0 : n - 2 * u};
}

IteratedLayout iterate_layout(const TauRule& rule, std::int64_t n, int h) {
    if (n < 1) fail(ErrorKind::domain, "iterate_layout requires N >= 1");
    if (h < 0) fail(ErrorKind::domain, "iterate_layout requires h >= 0");
    IteratedLayout out;
    out.n = n;
    out.levels.push_back(LayoutLevel{0, n, 0});
    std::int64_t current = n;
    for (int r = 1; r <= h && current > 1; ++r) {
        const auto layout = make_layout(rule, current);
        out.levels.push_back(LayoutLevel{r, layout.u, layout.t});
        current = layout.u;
    }
    return out;
}

RawBlockSums raw_block_sums(std::span<const double> path, const BlockLayout& layout) {
    if (static_cast<std::int64_t>(path.size()) < layout.n)
        fail(ErrorKind::shape, "path of length " + std::to_string(path.size()) + " shorter than n = " +
                                   std::to_string(layout.n));
    RawBlockSums sums;
    const auto u = static_cast<std::size_t>(layout.u);
    const auto t = static_cast<std::size_t>(layout.t);
    for (std::size_t i = 0; i < u; ++i) sums.left += path[i];
    for (std::size_t i = u; i < u + t; ++i) sums.mid += path[i];
    // For n = 1 the layout has no right block.
    if (layout.n >= 2)
        for (std::size_t i = u + t; i < 2 * u + t; ++i) sums.right += path[i];
    return sums;
}

BlockSums extract_block_sums(const PathBatch& batch, const BlockLayout& layout, double sigma_u,
                             std::optional<BlockPerturbations> perturbations) {
    if (!(sigma_u > 0.0) || !std::isfinite(sigma_u)) fail(ErrorKind::domain, "sigma_u must be positive");
    if (batch.path_length() < static_cast<std::size_t>(layout.n))
        fail(ErrorKind::shape, "paths of length " + std::to_string(batch.path_length()) +
                                   " shorter than n = " + std::to_string(layout.n));
    const std::size_t p = batch.n_paths();
    if (perturbations && (perturbations->left.size() != p || perturbations->right.size() != p))
        fail(ErrorKind::shape, "perturbation sequences must have one entry per path");

    BlockSums out;
    out.sigma_u = sigma_u;
    out.left.resize(p);
    out.mid.resize(p);
    out.right.resize(p);
    for (std::size_t i = 0; i < p; ++i) {
        auto raw = raw_block_sums(batch.path(i), layout);
        if (perturbations) {
            raw.left += perturbations->left[i];
            raw.right += perturbations->right[i];
        }
        out.left[i] = raw.left / sigma_u;
        out.mid[i] = raw.mid / sigma_u;
        out.right[i] = raw.right / sigma_u;
    }
    return out;
}

AsymptoticReport asymptotic_check(const TauRule& rule, std::span<const std::int64_t> grid,
                                  std::optional<std::size_t> tail_start) {
    if (grid.empty()) fail(ErrorKind::domain, "asymptotic_check requires a nonempty grid");
    AsymptoticReport report;
    for (const auto n : grid) {
        const auto layout = make_layout(rule, n);
        AsymptoticRow row;
        row.n = n;
        row.u = layout.u;
        row.t = layout.t;
        row.n_over_u = static_cast<double>(n) / static_cast<double>(layout.u);
        row.t_over_u = static_cast<double>(layout.t) / static_cast<double>(layout.u);
        report.rows.push_back(row);
    }
    report.tail_start = tail_start.value_or(grid.size() / 2);
    if (report.tail_start >= grid.size()) report.tail_start = grid.size() - 1;
    for (std::size_t i = report.tail_start + 1; i < report.rows.size(); ++i) {
        const double prev = std::abs(report.rows[i - 1].n_over_u - 2.0);
        const double cur = std::abs(report.rows[i].n_over_u - 2.0);
        if (cur > prev) report.tail_nonincreasing = false;
    }
    return report;
}

} // namespace blockclt
