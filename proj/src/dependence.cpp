#include "blockclt/dependence.hpp"

#include "blockclt/error.hpp"
#include "blockclt/processes.hpp"
#include "blockclt/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace blockclt {

namespace {

using Slot = CellTable::Slot;

void require_samples(const CellTable& table) {
    if (table.total() == 0) fail(ErrorKind::insufficient_data, "cell table is empty");
}

// Probabilities restricted to window slots (the out-of-window bucket is
// dropped: every union event avoiding it is an element of the algebra).
struct Probabilities {
    std::vector<double> pa;
    std::vector<double> pb;
    struct Entry {
        Slot a;
        Slot b;
        double p;
    };
    std::vector<Entry> joint;
    double total = 0.0;
};

Probabilities probabilities(const CellTable& table) {
    Probabilities pr;
    pr.total = static_cast<double>(table.total());
    const std::size_t c = table.cells();
    pr.pa.resize(c);
    pr.pb.resize(c);
    for (std::size_t j = 0; j < c; ++j) {
        pr.pa[j] = static_cast<double>(table.counts_a()[j]) / pr.total;
        pr.pb[j] = static_cast<double>(table.counts_b()[j]) / pr.total;
    }
    for (const auto& [key, count] : table.joint()) {
        if (key.first >= c || key.second >= c) continue;
        pr.joint.push_back({key.first, key.second, static_cast<double>(count) / pr.total});
    }
    return pr;
}

std::vector<char> membership(std::span<const Slot> event, std::size_t cells) {
    std::vector<char> in(cells, 0);
    for (const Slot s : event) {
        if (s >= cells) fail(ErrorKind::out_of_range, "event slot outside the window");
        in[s] = 1;
    }
    return in;
}

// Stderr of p_ab - p_a p_b by the delta method.
double independence_event_stderr(double pab, double pa, double pb, double n) {
    const double e2 = (1.0 - pa - pb) * (1.0 - pa - pb) * pab + pb * pb * (pa - pab) + pa * pa * (pb - pab);
    const double e1 = pab - 2.0 * pa * pb;
    return std::sqrt(std::max(0.0, e2 - e1 * e1) / n);
}

double stationarity_event_stderr(double pa, double pb, double pboth, double n) {
    const double e2 = pa + pb - 2.0 * pboth;
    const double e1 = pa - pb;
    return std::sqrt(std::max(0.0, e2 - e1 * e1) / n);
}

struct EventMass {
    double pa = 0.0;
    double pb = 0.0;
    double pab = 0.0;  // P(a in A, b in B)
};

EventMass event_mass(const CellTable& table, std::span<const Slot> a, std::span<const Slot> b) {
    const std::size_t c = table.cells();
    const auto in_a = membership(a, c);
    const auto in_b = membership(b, c);
    const double n = static_cast<double>(table.total());
    EventMass m;
    for (std::size_t j = 0; j < c; ++j) {
        if (in_a[j]) m.pa += static_cast<double>(table.counts_a()[j]);
        if (in_b[j]) m.pb += static_cast<double>(table.counts_b()[j]);
    }
    for (const auto& [key, count] : table.joint())
        if (key.first < c && key.second < c && in_a[key.first] && in_b[key.second]) m.pab += static_cast<double>(count);
    m.pa /= n;
    m.pb /= n;
    m.pab /= n;
    return m;
}

void fill_out_of_window(const CellTable& table, GapEstimate& g) {
    const double n = static_cast<double>(table.total());
    g.out_a = static_cast<double>(table.out_a()) / n;
    g.out_b = static_cast<double>(table.out_b()) / n;
    g.estimate.n = table.total();
}

void finish_independence(const CellTable& table, GapEstimate& g) {
    fill_out_of_window(table, g);
    const EventMass m = event_mass(table, g.event_a, g.event_b);
    g.event_stderr = independence_event_stderr(m.pab, m.pa, m.pb, static_cast<double>(table.total()));
    g.estimate.std_error = g.event_stderr;
}

std::vector<std::size_t> support(const std::vector<double>& p) {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < p.size(); ++j)
        if (p[j] > 0.0) s.push_back(j);
    return s;
}

// Exhaustive sup over unions: rows are the smaller support, enumerated in
// Gray-code order; for each row set the best column set is closed-form.
GapEstimate exact_algebra(const Probabilities& pr, const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>& cols, bool rows_are_a) {
    const std::size_t nr = rows.size();
    const std::size_t nc = cols.size();
    std::vector<std::size_t> row_pos(pr.pa.size(), nr), col_pos(pr.pa.size(), nc);
    for (std::size_t i = 0; i < nr; ++i) row_pos[rows[i]] = i;
    for (std::size_t j = 0; j < nc; ++j) col_pos[cols[j]] = j;
    const auto& prow = rows_are_a ? pr.pa : pr.pb;
    const auto& pcol = rows_are_a ? pr.pb : pr.pa;
    std::vector<double> d(nr * nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) d[i * nc + j] = -prow[rows[i]] * pcol[cols[j]];
    for (const auto& e : pr.joint) {
        const std::size_t r = rows_are_a ? e.a : e.b;
        const std::size_t c = rows_are_a ? e.b : e.a;
        if (row_pos[r] < nr && col_pos[c] < nc) d[row_pos[r] * nc + col_pos[c]] += e.p;
    }

    std::vector<double> colsum(nc, 0.0);
    std::vector<char> in(nr, 0);
    double best = 0.0;
    std::uint64_t best_mask = 0;
    bool best_positive = true;
    std::uint64_t mask = 0;
    const std::uint64_t count = std::uint64_t{1} << nr;
    for (std::uint64_t g = 1; g < count; ++g) {
        const int bit = std::countr_zero(g);
        const double sign = in[bit] ? -1.0 : 1.0;
        in[bit] ^= 1;
        mask ^= std::uint64_t{1} << bit;
        const double* row = &d[static_cast<std::size_t>(bit) * nc];
        double pos = 0.0;
        double neg = 0.0;
        for (std::size_t j = 0; j < nc; ++j) {
            colsum[j] += sign * row[j];
            if (colsum[j] > 0.0)
                pos += colsum[j];
            else
                neg -= colsum[j];
        }
        if (pos > best) {
            best = pos;
            best_mask = mask;
            best_positive = true;
        }
        if (neg > best) {
            best = neg;
            best_mask = mask;
            best_positive = false;
        }
    }

    GapEstimate g;
    g.estimate.value = best;
    g.exact = true;
    std::vector<Slot> row_event;
    std::vector<Slot> col_event;
    if (best > 0.0) {
        std::fill(colsum.begin(), colsum.end(), 0.0);
        for (std::size_t i = 0; i < nr; ++i) {
            if (!((best_mask >> i) & 1U)) continue;
            row_event.push_back(static_cast<Slot>(rows[i]));
            for (std::size_t j = 0; j < nc; ++j) colsum[j] += d[i * nc + j];
        }
        for (std::size_t j = 0; j < nc; ++j)
            if (best_positive ? colsum[j] > 0.0 : colsum[j] < 0.0) col_event.push_back(static_cast<Slot>(cols[j]));
    }
    g.event_a = rows_are_a ? row_event : col_event;
    g.event_b = rows_are_a ? col_event : row_event;
    return g;
}

// Alternating best responses on the sparse deviation matrix
// D = P - p q^T, for both signs, from several starting row sets.
GapEstimate heuristic_algebra(const Probabilities& pr, const GapOptions& options, Slot seed_a) {
    const std::size_t c = pr.pa.size();
    std::vector<std::vector<std::pair<Slot, double>>> rows(c);
    for (const auto& e : pr.joint) rows[e.a].push_back({e.b, e.p});
    const auto rows_support = support(pr.pa);

    std::vector<double> colsum(c);
    std::vector<double> rowsum(c);
    std::vector<char> in_a(c);
    std::vector<char> in_b(c);
    double best = 0.0;
    std::vector<char> best_a(c, 0), best_b(c, 0);

    Stream rng(derive_seed(options.seed, 0xa1e7));
    const int restarts = std::max(1, options.restarts);
    for (int sgn = 0; sgn < 2; ++sgn) {
        const double sigma = sgn == 0 ? 1.0 : -1.0;
        for (int start = 0; start <= restarts; ++start) {
            std::fill(in_a.begin(), in_a.end(), 0);
            if (start == 0) {
                in_a[seed_a] = 1;
            } else {
                for (const std::size_t i : rows_support) in_a[i] = static_cast<char>(rng() >> 63);
            }
            double value = -1.0;
            for (int iter = 0; iter < 1000; ++iter) {
                // Best column set for the current rows.
                double pa_set = 0.0;
                std::fill(colsum.begin(), colsum.end(), 0.0);
                for (const std::size_t i : rows_support) {
                    if (!in_a[i]) continue;
                    pa_set += pr.pa[i];
                    for (const auto& [j, p] : rows[i]) colsum[j] += p;
                }
                double vcol = 0.0;
                for (std::size_t j = 0; j < c; ++j) {
                    const double cj = sigma * (colsum[j] - pa_set * pr.pb[j]);
                    in_b[j] = cj > 0.0;
                    if (in_b[j]) vcol += cj;
                }
                // Best row set for those columns.
                double qb_set = 0.0;
                for (std::size_t j = 0; j < c; ++j)
                    if (in_b[j]) qb_set += pr.pb[j];
                std::fill(rowsum.begin(), rowsum.end(), 0.0);
                for (const std::size_t i : rows_support)
                    for (const auto& [j, p] : rows[i])
                        if (in_b[j]) rowsum[i] += p;
                double vrow = 0.0;
                for (std::size_t i = 0; i < c; ++i) {
                    const double ri = sigma * (rowsum[i] - pr.pa[i] * qb_set);
                    in_a[i] = ri > 0.0;
                    if (in_a[i]) vrow += ri;
                }
                // (in_a, in_b) is a best response pair, so vrow >= vcol.
                (void)vcol;
                const double v = vrow;
                if (v > best) {
                    best = v;
                    best_a = in_a;
                    best_b = in_b;
                }
                if (v <= value * (1.0 + 1e-15)) break;
                value = v;
            }
        }
    }

    GapEstimate g;
    g.exact = false;
    for (std::size_t j = 0; j < c; ++j)
        if (best_b[j]) g.event_b.push_back(static_cast<Slot>(j));
    for (std::size_t i = 0; i < c; ++i)
        if (best_a[i]) g.event_a.push_back(static_cast<Slot>(i));
    g.estimate.value = best;
    return g;
}

GapEstimate algebra_point(const CellTable& table, const GapOptions& options) {
    const Probabilities pr = probabilities(table);
    const auto sa = support(pr.pa);
    const auto sb = support(pr.pb);
    GapEstimate g;
    if (sa.empty() || sb.empty()) {
        g.estimate.value = 0.0;
    } else {
        const bool a_small = sa.size() <= sb.size();
        const std::size_t small = std::min(sa.size(), sb.size());
        const std::size_t large = std::max(sa.size(), sb.size());
        const bool exact = small <= options.exact_cells ||
                           (small < 40 && std::ldexp(static_cast<double>(large), static_cast<int>(small)) <=
                                              options.exact_cost_limit);
        if (exact) {
            g = a_small ? exact_algebra(pr, sa, sb, true) : exact_algebra(pr, sb, sa, false);
        } else {
            GapOptions point = options;
            point.null_replicates = 0;
            const GapEstimate cell = percell_gap(table, point);
            const Slot seed_a = cell.event_a.empty() ? static_cast<Slot>(sa.front()) : cell.event_a.front();
            g = heuristic_algebra(pr, options, seed_a);
        }
    }
    if (!g.event_a.empty() && !g.event_b.empty())
        g.estimate.value = event_gap(table, g.event_a, g.event_b);
    finish_independence(table, g);
    return g;
}

std::vector<Slot> expand(const CellTable& table, bool first) {
    std::vector<Slot> out;
    out.reserve(table.total());
    for (const auto& [key, count] : table.joint())
        out.insert(out.end(), count, first ? key.first : key.second);
    return out;
}

CellTable independence_replicate(const CellTable& table, const std::vector<Slot>& a, std::vector<Slot> b,
                                 Stream& rng) {
    for (std::size_t i = b.size(); i > 1; --i) std::swap(b[i - 1], b[rng.below(i)]);
    CellTable out(table.level());
    for (std::size_t i = 0; i < a.size(); ++i) out.add_slots(a[i], b[i]);
    return out;
}

std::uint64_t half_binomial(std::uint64_t n, Stream& rng) {
    std::uint64_t hits = 0;
    while (n >= 64) {
        hits += static_cast<std::uint64_t>(std::popcount(rng()));
        n -= 64;
    }
    if (n > 0) hits += static_cast<std::uint64_t>(std::popcount(rng() & ((std::uint64_t{1} << n) - 1)));
    return hits;
}

CellTable stationarity_replicate(const CellTable& table, Stream& rng) {
    CellTable out(table.level());
    for (const auto& [key, count] : table.joint()) {
        const std::uint64_t swapped = half_binomial(count, rng);
        if (count > swapped) out.add_slots(key.first, key.second, count - swapped);
        if (swapped > 0) out.add_slots(key.second, key.first, swapped);
    }
    return out;
}

double rms(const std::vector<double>& xs) {
    double s = 0.0;
    for (const double x : xs) s += x * x;
    return std::sqrt(s / static_cast<double>(xs.size()));
}

// Positive/negative parts of the marginal differences over window slots.
GapEstimate stationarity_algebra_point(const CellTable& table) {
    const Probabilities pr = probabilities(table);
    double pos = 0.0;
    double neg = 0.0;
    for (std::size_t j = 0; j < pr.pa.size(); ++j) {
        const double d = pr.pa[j] - pr.pb[j];
        if (d > 0.0) pos += d;
        else neg -= d;
    }
    GapEstimate g;
    const bool positive = pos >= neg;
    for (std::size_t j = 0; j < pr.pa.size(); ++j) {
        const double d = pr.pa[j] - pr.pb[j];
        if (positive ? d > 0.0 : d < 0.0) g.event_a.push_back(static_cast<Slot>(j));
    }
    g.estimate.value = g.event_a.empty() ? 0.0 : event_stationarity_gap(table, g.event_a);
    return g;
}

void finish_stationarity(const CellTable& table, GapEstimate& g) {
    fill_out_of_window(table, g);
    const EventMass m = event_mass(table, g.event_a, g.event_a);
    g.event_stderr = stationarity_event_stderr(m.pa, m.pb, m.pab, static_cast<double>(table.total()));
    g.estimate.std_error = g.event_stderr;
}

} // namespace

double event_gap(const CellTable& table, std::span<const Slot> a, std::span<const Slot> b) {
    require_samples(table);
    const EventMass m = event_mass(table, a, b);
    return std::abs(m.pab - m.pa * m.pb);
}

double event_stationarity_gap(const CellTable& table, std::span<const Slot> e) {
    require_samples(table);
    const EventMass m = event_mass(table, e, e);
    return std::abs(m.pa - m.pb);
}

GapEstimate percell_gap(const CellTable& table, const GapOptions& options) {
    require_samples(table);
    const Probabilities pr = probabilities(table);
    const auto sa = support(pr.pa);
    const auto sb = support(pr.pb);
    std::vector<double> row(pr.pb.size(), 0.0);
    std::vector<std::vector<std::pair<Slot, double>>> rows(pr.pa.size());
    for (const auto& e : pr.joint) rows[e.a].push_back({e.b, e.p});
    double best = 0.0;
    Slot ba = 0;
    Slot bb = 0;
    bool found = false;
    for (const std::size_t i : sa) {
        for (const auto& [j, p] : rows[i]) row[j] = p;
        for (const std::size_t j : sb) {
            const double d = std::abs(row[j] - pr.pa[i] * pr.pb[j]);
            if (d > best) {
                best = d;
                ba = static_cast<Slot>(i);
                bb = static_cast<Slot>(j);
                found = true;
            }
        }
        for (const auto& [j, p] : rows[i]) row[j] = 0.0;
    }
    GapEstimate g;
    g.exact = true;
    if (found) {
        g.event_a = {ba};
        g.event_b = {bb};
        g.estimate.value = event_gap(table, g.event_a, g.event_b);
    }
    finish_independence(table, g);
    if (options.null_replicates > 0) {
        GapOptions inner = options;
        inner.null_replicates = 0;
        Stream rng(derive_seed(options.seed, 0xce11));
        const auto a = expand(table, true);
        const auto b = expand(table, false);
        std::vector<double> reps;
        for (int r = 0; r < options.null_replicates; ++r)
            reps.push_back(percell_gap(independence_replicate(table, a, b, rng), inner).value());
        g.estimate.std_error = rms(reps);
    }
    return g;
}

GapEstimate algebra_gap(const CellTable& table, const GapOptions& options) {
    require_samples(table);
    GapEstimate g = algebra_point(table, options);
    if (options.null_replicates > 0) {
        GapOptions inner = options;
        inner.null_replicates = 0;
        Stream rng(derive_seed(options.seed, 0x1d));
        const auto a = expand(table, true);
        const auto b = expand(table, false);
        std::vector<double> reps;
        for (int r = 0; r < options.null_replicates; ++r)
            reps.push_back(algebra_point(independence_replicate(table, a, b, rng), inner).value());
        g.estimate.std_error = rms(reps);
    }
    return g;
}

StationarityGap stationarity_gap(const CellTable& table, const GapOptions& options) {
    require_samples(table);
    StationarityGap out;
    const Probabilities pr = probabilities(table);
    double best = 0.0;
    Slot arg = 0;
    bool found = false;
    for (std::size_t j = 0; j < pr.pa.size(); ++j) {
        const double d = std::abs(pr.pa[j] - pr.pb[j]);
        if (d > best) {
            best = d;
            arg = static_cast<Slot>(j);
            found = true;
        }
    }
    if (found) {
        out.percell.event_a = {arg};
        out.percell.estimate.value = event_stationarity_gap(table, out.percell.event_a);
    }
    finish_stationarity(table, out.percell);
    out.algebra = stationarity_algebra_point(table);
    finish_stationarity(table, out.algebra);
    if (options.null_replicates > 0) {
        Stream rng(derive_seed(options.seed, 0x57a7));
        std::vector<double> cells;
        std::vector<double> reps;
        for (int r = 0; r < options.null_replicates; ++r) {
            const CellTable null = stationarity_replicate(table, rng);
            GapOptions inner = options;
            inner.null_replicates = 0;
            cells.push_back(stationarity_gap(null, inner).percell.value());
            reps.push_back(stationarity_algebra_point(null).value());
        }
        out.percell.estimate.std_error = rms(cells);
        out.algebra.estimate.std_error = rms(reps);
    }
    return out;
}

const MomentGap& MomentGapTable::cross_at(int p, int q) const {
    for (const auto& e : cross)
        if (e.p == p && e.q == q) return e;
    fail(ErrorKind::out_of_range, "no cross moment entry (" + std::to_string(p) + ", " + std::to_string(q) + ")");
}

const MomentGap& MomentGapTable::marginal_at(int p) const {
    for (const auto& e : marginal)
        if (e.p == p) return e;
    fail(ErrorKind::out_of_range, "no marginal moment entry " + std::to_string(p));
}

MomentGapTable moment_gaps(std::span<const double> left, std::span<const double> right, int degree) {
    if (degree < 1 || degree > kMaxMomentDegree)
        fail(ErrorKind::domain, "moment degree must lie in [1, " + std::to_string(kMaxMomentDegree) + "]");
    if (left.size() != right.size()) fail(ErrorKind::shape, "moment_gaps needs equal path counts");
    if (left.size() < 2) fail(ErrorKind::insufficient_data, "moment_gaps needs at least 2 paths");
    const std::size_t n = left.size();
    const double dn = static_cast<double>(n);
    const auto d = static_cast<std::size_t>(degree);
    // Powers, column-major per path.
    std::vector<double> lp((d + 1) * n), rp((d + 1) * n);
    for (std::size_t i = 0; i < n; ++i) {
        lp[i] = rp[i] = 1.0;
        for (std::size_t k = 1; k <= d; ++k) {
            lp[k * n + i] = lp[(k - 1) * n + i] * left[i];
            rp[k * n + i] = rp[(k - 1) * n + i] * right[i];
        }
    }
    auto mean_of = [&](const std::vector<double>& v, std::size_t k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[k * n + i];
        return s / dn;
    };
    std::vector<double> ml(d + 1), mr(d + 1);
    for (std::size_t k = 0; k <= d; ++k) {
        ml[k] = mean_of(lp, k);
        mr[k] = mean_of(rp, k);
    }
    auto sd_err = [&](auto&& psi) {
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = psi(i);
            s += v;
            s2 += v * v;
        }
        const double m = s / dn;
        return std::sqrt(std::max(0.0, (s2 / dn - m * m) * dn / (dn - 1.0)) / dn);
    };

    MomentGapTable table;
    table.degree = degree;
    for (std::size_t p = 1; p <= d; ++p) {
        const double se = sd_err([&](std::size_t i) { return lp[p * n + i] - rp[p * n + i]; });
        table.marginal.push_back({static_cast<int>(p), 0, Estimate{std::abs(ml[p] - mr[p]), se, n}});
    }
    for (std::size_t p = 1; p < d; ++p) {
        for (std::size_t q = 1; p + q <= d; ++q) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += lp[p * n + i] * rp[q * n + i];
            const double gap = s / dn - ml[p] * mr[q];
            const double se = sd_err([&](std::size_t i) {
                return lp[p * n + i] * rp[q * n + i] - mr[q] * lp[p * n + i] - ml[p] * rp[q * n + i];
            });
            table.cross.push_back({static_cast<int>(p), static_cast<int>(q), Estimate{std::abs(gap), se, n}});
        }
    }
    return table;
}

GapEstimate alpha_restricted(const PathBatch& batch, int k, std::int64_t h, std::int64_t m,
                             const GapOptions& options) {
    if (m < 1 || h < 0) fail(ErrorKind::domain, "alpha_restricted needs m >= 1 and h >= 0");
    if (static_cast<std::int64_t>(batch.path_length()) < 2 * m + h)
        fail(ErrorKind::shape, "paths are shorter than 2m + h");
    const std::size_t paths = batch.n_paths();
    std::vector<double> left(paths), right(paths);
    const auto um = static_cast<std::size_t>(m);
    const auto uh = static_cast<std::size_t>(h);
    for (std::size_t i = 0; i < paths; ++i) {
        const auto path = batch.path(i);
        double l = 0.0;
        double r = 0.0;
        for (std::size_t t = 0; t < um; ++t) l += path[t];
        for (std::size_t t = um + uh; t < 2 * um + uh; ++t) r += path[t];
        left[i] = l;
        right[i] = r;
    }
    double sigma = 0.0;
    if (const auto s = batch.sigma(m)) {
        sigma = *s;
    } else if (batch.spec().kind != ProcessKind::external) {
        if (const auto e = exact_sigma(batch.spec(), m)) sigma = *e;
    }
    if (!(sigma > 0.0)) sigma = mean_estimate(left).std_error * std::sqrt(static_cast<double>(paths));
    if (!(sigma > 0.0)) fail(ErrorKind::insufficient_data, "block sums have zero variance");
    for (std::size_t i = 0; i < paths; ++i) {
        left[i] /= sigma;
        right[i] /= sigma;
    }
    return algebra_gap(histogram_pair(left, right, k), options);
}

RemainderTail remainder_tail(std::span<const double> mid, const TailGrid& grid) {
    if (mid.size() < 100) fail(ErrorKind::insufficient_data, "remainder_tail needs at least 100 paths");
    if (grid.steps_per_octave < 1 || grid.min_exponent > grid.max_exponent)
        fail(ErrorKind::domain, "invalid tail grid");
    std::vector<double> mags(mid.size());
    std::transform(mid.begin(), mid.end(), mags.begin(), [](double x) { return std::abs(x); });
    std::sort(mags.begin(), mags.end());
    RemainderTail out;
    const int lo = grid.min_exponent * grid.steps_per_octave;
    const int hi = grid.max_exponent * grid.steps_per_octave;
    for (int j = lo; j <= hi; ++j) {
        const double rho = std::exp2(static_cast<double>(j) / grid.steps_per_octave);
        const auto above = static_cast<std::uint64_t>(mags.end() - std::upper_bound(mags.begin(), mags.end(), rho));
        const Estimate tail = probability_estimate(above, mags.size());
        out.rho = rho;
        out.tail = tail;
        if (tail.value < rho) {
            out.satisfied = true;
            return out;
        }
    }
    return out;
}

GapEstimate max_gap(std::span<const GapEstimate> gaps) {
    if (gaps.empty()) fail(ErrorKind::insufficient_data, "max_gap over an empty grid");
    const auto it = std::max_element(gaps.begin(), gaps.end(),
                                     [](const GapEstimate& a, const GapEstimate& b) { return a.value() < b.value(); });
    return *it;
}

} // namespace blockclt
