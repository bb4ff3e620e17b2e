#include "blockclt/audit.hpp"

#include "blockclt/error.hpp"
#include "blockclt/partition.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace blockclt {

namespace {

using cplx = std::complex<double>;

double w_k(int k) { return std::ldexp(1.0, -2 * k); }

// Estimate of |mean(psi)| where psi is the per-path influence of a complex
// statistic; the stderr is the RMS spread of psi over sqrt(n).
double complex_se(const std::vector<cplx>& psi) {
    const double n = static_cast<double>(psi.size());
    if (psi.size() < 2) return 0.0;
    cplx m = 0.0;
    for (const auto& z : psi) m += z;
    m /= n;
    double ss = 0.0;
    for (const auto& z : psi) ss += std::norm(z - m);
    return std::sqrt(ss / (n - 1.0) / n);
}

std::vector<cplx> phases(std::span<const double> x, double t) {
    std::vector<cplx> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = cplx(std::cos(t * x[i]), std::sin(t * x[i]));
    return out;
}

cplx mean(const std::vector<cplx>& v) {
    cplx s = 0.0;
    for (const auto& z : v) s += z;
    return s / static_cast<double>(v.size());
}

double rss(std::initializer_list<double> terms) {
    double s = 0.0;
    for (const double x : terms) s += x * x;
    return std::sqrt(s);
}

const LevelStats& level(const IteratedStats& stats, int r) {
    if (r < 0 || static_cast<std::size_t>(r) >= stats.levels.size())
        fail(ErrorKind::shape, "level " + std::to_string(r) + " not available in the iterated statistics");
    return stats.levels[static_cast<std::size_t>(r)];
}

const LevelStats& split_level(const IteratedStats& stats, int r) {
    if (r < 1) fail(ErrorKind::domain, "block audits need a level r >= 1");
    return level(stats, r);
}

AuditRecord base_record(const std::string& id, const IteratedStats& stats, const AuditComponents& c, int r, double t) {
    AuditRecord rec;
    rec.id = id;
    rec.config = AuditConfig{c.k, c.h, r, t, stats.n, stats.process};
    rec.components = {{"s_gap", c.s_gap.value},   {"s_gap_se", c.s_gap.std_error},
                      {"i_gap", c.i_gap.value},   {"i_gap_se", c.i_gap.std_error},
                      {"rho", c.rho},             {"varrho", c.varrho},
                      {"window_bound", c.window_bound}};
    return rec;
}

bool inside(const Window& w, double x) { return w.contains_cell(cell_index(w.k, x)); }

} // namespace

bool AuditRecord::evaluate() const noexcept {
    if (rule == AuditRule::equivalence) {
        auto growing = [&](const Estimate& e) {
            return e.value > growth_slope && e.value > kAuditTolerance * e.std_error;
        };
        return growing(lhs) == growing(rhs);
    }
    return lhs.value <= rhs.value + kAuditTolerance * (lhs.std_error + rhs.std_error);
}

AuditRecord& seal(AuditRecord& record) {
    record.pass = record.evaluate();
    return record;
}

std::vector<double> level_sigmas(const ProcessSpec& spec, const IteratedLayout& layout, std::uint64_t seed,
                                 std::size_t pilot_paths, unsigned threads) {
    std::vector<double> out;
    for (const auto& lv : layout.levels) out.push_back(sigma_for(spec, lv.u, seed, pilot_paths, threads));
    return out;
}

IteratedStats iterated_stats(const PathBatch& batch, const IteratedLayout& layout, std::span<const double> sigmas) {
    if (sigmas.size() != layout.levels.size()) fail(ErrorKind::shape, "one normalizer per level is required");
    if (static_cast<std::int64_t>(batch.path_length()) < layout.n) fail(ErrorKind::shape, "paths shorter than N");
    for (const double s : sigmas)
        if (!(s > 0.0)) fail(ErrorKind::domain, "level normalizers must be positive");
    IteratedStats out;
    out.n = layout.n;
    out.process = batch.spec().name();
    const std::size_t paths = batch.n_paths();
    const std::size_t n = static_cast<std::size_t>(layout.n);
    for (std::size_t r = 0; r < layout.levels.size(); ++r) {
        LevelStats lv;
        lv.r = layout.levels[r].r;
        lv.u = layout.levels[r].u;
        lv.t = layout.levels[r].t;
        lv.sigma = sigmas[r];
        lv.s.resize(paths);
        if (r > 0) {
            lv.mid.resize(paths);
            lv.right.resize(paths);
        }
        out.levels.push_back(std::move(lv));
    }
    std::vector<double> prefix(n + 1);
    for (std::size_t i = 0; i < paths; ++i) {
        const auto path = batch.path(i);
        prefix[0] = 0.0;
        for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + path[j];
        for (auto& lv : out.levels) {
            const auto u = static_cast<std::size_t>(lv.u);
            const auto t = static_cast<std::size_t>(lv.t);
            lv.s[i] = prefix[u] / lv.sigma;
            if (lv.r > 0) {
                lv.mid[i] = (prefix[u + t] - prefix[u]) / lv.sigma;
                lv.right[i] = (prefix[2 * u + t] - prefix[u + t]) / lv.sigma;
            }
        }
    }
    return out;
}

AuditComponents audit_components(const IteratedStats& stats, int k, int h, const GapOptions& options) {
    AuditComponents c;
    c.k = k;
    c.h = h;
    c.window_bound = window_cells(k).bound;
    const int top = std::min<int>(h, static_cast<int>(stats.levels.size()) - 1);
    bool first = true;
    for (int r = 1; r <= top; ++r) {
        const LevelStats& lv = stats.levels[static_cast<std::size_t>(r)];
        const CellTable table = histogram_pair(lv.s, lv.right, k);
        const auto st = stationarity_gap(table, options).algebra;
        const auto ig = algebra_gap(table, options);
        if (first || st.value() > c.s_gap.value) c.s_gap = st.estimate;
        if (first || ig.value() > c.i_gap.value) c.i_gap = ig.estimate;
        first = false;
        c.rho = std::max(c.rho, remainder_tail(lv.mid).rho);
        const double prev = stats.levels[static_cast<std::size_t>(r - 1)].sigma;
        c.varrho = std::max(c.varrho, std::abs(1.0 - prev / (std::numbers::sqrt2 * lv.sigma)));
    }
    return c;
}

AuditRecord audit_v2(const IteratedStats& stats, int r, const AuditComponents& c) {
    const LevelStats& lv = split_level(stats, r);
    const Window w = window_cells(c.k);
    std::uint64_t out_s = 0;
    std::uint64_t out_right = 0;
    for (std::size_t i = 0; i < lv.s.size(); ++i) {
        if (!inside(w, lv.s[i])) ++out_s;
        if (!inside(w, lv.right[i])) ++out_right;
    }
    AuditRecord rec = base_record("V2", stats, c, r, 0.0);
    const Estimate pre = probability_estimate(out_s, lv.s.size());
    rec.lhs = probability_estimate(out_right, lv.right.size());
    rec.rhs = Estimate{w_k(c.k) + c.s_gap.value, c.s_gap.std_error, c.s_gap.n};
    rec.components.emplace_back("escape_left", pre.value);
    if (pre.value > w_k(c.k)) {
        rec.skipped = true;
        rec.reason = "precondition P{S not in K_k} <= 4^-k fails (" + std::to_string(pre.value) + ")";
    }
    return seal(rec);
}

std::pair<AuditRecord, AuditRecord> audit_v3_v4(const IteratedStats& stats, int r, const AuditComponents& c,
                                                const AuditConstants& K) {
    const LevelStats& lv = split_level(stats, r);
    const Window w = window_cells(c.k);
    const std::size_t n = lv.s.size();
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = inside(w, lv.s[i]) ? lv.s[i] : 0.0;
        b[i] = inside(w, lv.right[i]) ? lv.right[i] : 0.0;
    }
    const double dn = static_cast<double>(n);
    double ma = 0.0;
    double mb = 0.0;
    double mab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
        mab += a[i] * b[i];
    }
    ma /= dn;
    mb /= dn;
    mab /= dn;
    auto spread = [&](auto&& psi) {
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
    const double D = c.window_bound;

    AuditRecord v3 = base_record("V3", stats, c, r, 0.0);
    v3.lhs = Estimate{std::abs(ma - mb), spread([&](std::size_t i) { return a[i] - b[i]; }), n};
    v3.rhs = Estimate{K.v3_s * D * c.s_gap.value, K.v3_s * D * c.s_gap.std_error, n};
    v3.components.emplace_back("c_s", K.v3_s);

    AuditRecord v4 = base_record("V4", stats, c, r, 0.0);
    v4.lhs = Estimate{std::abs(mab - ma * mb), spread([&](std::size_t i) { return a[i] * b[i] - mb * a[i] - ma * b[i]; }), n};
    v4.rhs = Estimate{K.v4_i * D * D * c.i_gap.value, K.v4_i * D * D * c.i_gap.std_error, n};
    v4.components.emplace_back("c_i", K.v4_i);
    return {seal(v3), seal(v4)};
}

std::pair<AuditRecord, AuditRecord> audit_v5_v6(const IteratedStats& stats, int r, double t, const AuditComponents& c,
                                                const AuditConstants& K) {
    const LevelStats& lv = split_level(stats, r);
    const std::size_t n = lv.s.size();
    const auto ea = phases(lv.s, t);
    const auto eb = phases(lv.right, t);
    std::vector<double> sum(n);
    for (std::size_t i = 0; i < n; ++i) sum[i] = lv.s[i] + lv.right[i];
    const auto eab = phases(sum, t);
    const cplx pa = mean(ea);
    const cplx pb = mean(eb);
    const cplx pab = mean(eab);
    const double at = std::abs(t);
    const double wk = w_k(c.k);

    std::vector<cplx> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = ea[i] - eb[i];
    AuditRecord v5 = base_record("V5", stats, c, r, t);
    v5.lhs = Estimate{std::abs(pa - pb), complex_se(psi), n};
    v5.rhs = Estimate{K.v5_s * c.s_gap.value + K.v5_w * wk + K.v5_tw * at * wk, K.v5_s * c.s_gap.std_error, n};

    for (std::size_t i = 0; i < n; ++i) psi[i] = eab[i] - pb * ea[i] - pa * eb[i];
    AuditRecord v6 = base_record("V6", stats, c, r, t);
    v6.lhs = Estimate{std::abs(pab - pa * pb), complex_se(psi), n};
    v6.rhs = Estimate{K.v6_i * c.i_gap.value + K.v6_s * c.s_gap.value + K.v6_w * wk + K.v6_tw * at * wk,
                      rss({K.v6_i * c.i_gap.std_error, K.v6_s * c.s_gap.std_error}), n};
    return {seal(v5), seal(v6)};
}

AuditRecord audit_v7(const IteratedStats& stats, int r, double t, const AuditComponents& c, const AuditConstants& K) {
    const LevelStats& lv = split_level(stats, r);
    const std::size_t n = lv.s.size();
    std::vector<double> total(n);
    for (std::size_t i = 0; i < n; ++i) total[i] = lv.s[i] + lv.mid[i] + lv.right[i];
    const auto es = phases(lv.s, t);
    const auto et = phases(total, t);
    const cplx ps = mean(es);
    const cplx pt = mean(et);
    std::vector<cplx> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = et[i] - 2.0 * ps * es[i];
    const double at = std::abs(t);
    const double wk = w_k(c.k);
    AuditRecord rec = base_record("V7", stats, c, r, t);
    rec.lhs = Estimate{std::abs(pt - ps * ps), complex_se(psi), n};
    rec.rhs = Estimate{(K.v7_rho + at) * c.rho + K.v7_i * c.i_gap.value + K.v7_s * c.s_gap.value + K.v7_w * wk +
                           K.v7_tw * at * wk,
                       rss({K.v7_i * c.i_gap.std_error, K.v7_s * c.s_gap.std_error}), n};
    return seal(rec);
}

AuditRecord audit_v8(const IteratedStats& stats, int r, double t, const AuditComponents& c, const AuditConstants& K) {
    const LevelStats& lv = split_level(stats, r);
    const LevelStats& up = level(stats, r - 1);
    const std::size_t n = lv.s.size();
    const double th = t / std::numbers::sqrt2;
    const auto eu = phases(up.s, t);
    const auto es = phases(lv.s, th);
    const cplx pu = mean(eu);
    const cplx ps = mean(es);
    std::vector<cplx> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = eu[i] - 2.0 * ps * es[i];
    const double at = std::abs(t);
    const double wk = w_k(c.k);
    AuditRecord rec = base_record("V8", stats, c, r, t);
    rec.lhs = Estimate{std::abs(pu - ps * ps), complex_se(psi), n};
    rec.rhs = Estimate{c.window_bound * at * c.varrho + (K.v7_rho + at / std::numbers::sqrt2) * c.rho +
                           K.v7_i * c.i_gap.value + K.v7_s * c.s_gap.value +
                           wk * (K.v8_w + K.v8_tw * at / std::numbers::sqrt2),
                       rss({K.v7_i * c.i_gap.std_error, K.v7_s * c.s_gap.std_error}), n};
    return seal(rec);
}

namespace {

AuditRecord telescoped(const std::string& id, const IteratedStats& stats, int k, int h, double t,
                       const AuditComponents& c, const AuditConstants& K) {
    const LevelStats& top = level(stats, 0);
    const LevelStats& deep = level(stats, h);
    const std::size_t n = top.s.size();
    const double th = std::exp2(-0.5 * h) * t;
    const auto e0 = phases(top.s, t);
    const auto eh = phases(deep.s, th);
    const cplx p0 = mean(e0);
    const cplx z = mean(eh);
    cplx zn = z;
    for (int i = 0; i < h; ++i) zn *= zn;
    const double power = std::ldexp(1.0, h);
    // d(z^N)/dz = N z^(N-1).
    const cplx slope = h == 0 ? cplx(1.0) : power * zn / z;
    std::vector<cplx> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = e0[i] - (z == cplx(0.0) ? cplx(0.0) : slope) * eh[i];
    const double at = std::abs(t);
    AuditRecord rec = base_record(id, stats, c, 0, t);
    rec.config.k = k;
    rec.config.h = h;
    rec.lhs = Estimate{std::abs(p0 - zn), complex_se(psi), n};
    const double inner = c.window_bound * at * c.varrho + (K.v7_rho + at) * c.rho + K.v7_i * c.i_gap.value +
                         K.v7_s * c.s_gap.value;
    rec.rhs = Estimate{power * inner + w_k(k) * (K.v9_w + K.v9_tw * at),
                       power * rss({K.v7_i * c.i_gap.std_error, K.v7_s * c.s_gap.std_error}), n};
    rec.components.emplace_back("component_level", c.k);
    return seal(rec);
}

} // namespace

AuditRecord audit_v9(const IteratedStats& stats, int k, int h, double t, const AuditComponents& c,
                     const AuditConstants& constants) {
    if (h < 0) fail(ErrorKind::domain, "telescoping depth must be nonnegative");
    if (h > 0 && c.k != k + h) fail(ErrorKind::domain, "V9 components must be estimated at level k + h");
    return telescoped("V9", stats, k, h, t, c, constants);
}

AuditRecord audit_v10(const IteratedStats& stats, int h_n, double t, const AuditComponents& c,
                      const AuditConstants& constants) {
    if (h_n < 1) fail(ErrorKind::domain, "V10 needs h_n >= 1");
    if (c.k != 2 * h_n) fail(ErrorKind::domain, "V10 components must be estimated at level 2 h_n");
    return telescoped("V10", stats, h_n, h_n, t, c, constants);
}

Estimate log_slope(std::span<const std::int64_t> n, std::span<const Estimate> y) {
    if (n.size() != y.size() || n.size() < 2) fail(ErrorKind::shape, "slope needs at least two matching points");
    const std::size_t m = n.size();
    for (const auto& e : y)
        if (!(e.value > 0.0)) return Estimate{0.0, 0.0, m};  // identically zero sequence: flat
    double xbar = 0.0;
    for (const auto v : n) xbar += std::log2(static_cast<double>(v));
    xbar /= static_cast<double>(m);
    double sxx = 0.0;
    for (const auto v : n) sxx += (std::log2(static_cast<double>(v)) - xbar) * (std::log2(static_cast<double>(v)) - xbar);
    if (!(sxx > 0.0)) fail(ErrorKind::domain, "slope grid must contain distinct n");
    double slope = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double w = (std::log2(static_cast<double>(n[i])) - xbar) / sxx;
        slope += w * std::log2(y[i].value);
        const double se_log = y[i].std_error / (y[i].value * std::numbers::ln2);
        var += w * w * se_log * se_log;
    }
    return Estimate{slope, std::sqrt(var), m};
}

P42Series p42_series(const ProcessSpec& spec, const P42Options& options) {
    if (!spec.is_functional()) fail(ErrorKind::unsupported, "P4-2 audit needs a functional process");
    if (options.n_grid.size() < 2) fail(ErrorKind::config, "P4-2 audit needs at least two grid points");
    if (options.paths < 2) fail(ErrorKind::insufficient_data, "P4-2 audit needs at least two paths");
    P42Series out;
    for (const auto n64 : options.n_grid) {
        if (n64 < 1) fail(ErrorKind::domain, "grid sizes must be positive");
        const auto n = static_cast<std::size_t>(n64);
        // The non-summable fixture is truncated at the path length.
        ProcessSpec local = spec;
        if (spec.kind == ProcessKind::kernel_functional && spec.kernel == KernelId::harmonic_half)
            local.i_max = static_cast<int>(n64);
        const int I = local.i_max;
        std::vector<double> a4(options.paths), g4(options.paths);
        parallel_chunks(options.paths, options.threads, [&](std::size_t begin, std::size_t end) {
            PathGenerator gen(local, options.seed);
            std::vector<double> buf(n);
            for (std::size_t i = begin; i < end; ++i) {
                gen.fill(i, buf);
                double m = 0.0;
                double q = 0.0;
                for (std::size_t p = 0; p < n; ++p) {
                    double g = 0.0;
                    const int top = std::min<int>(I, static_cast<int>(p) + 1);
                    for (int s = 1; s <= top; ++s) g += gen.term(p, s);
                    m += g;
                    q += g * g * g * g;
                }
                const double mn = m / std::sqrt(static_cast<double>(n));
                a4[i] = mn * mn * mn * mn;
                g4[i] = q / (static_cast<double>(n) * static_cast<double>(n));
            }
        });
        out.n.push_back(n64);
        out.m4.push_back(mean_estimate(a4));
        out.g4.push_back(mean_estimate(g4));
    }
    return out;
}

AuditRecord audit_p42(const ProcessSpec& spec, const P42Options& options) {
    const P42Series series = p42_series(spec, options);
    AuditRecord rec;
    rec.id = "P4-2";
    rec.rule = AuditRule::equivalence;
    rec.growth_slope = options.growth_slope;
    rec.lhs = log_slope(series.n, series.m4);
    rec.rhs = log_slope(series.n, series.g4);
    rec.config.n = series.n.back();
    rec.config.process = spec.name();
    for (std::size_t i = 0; i < series.n.size(); ++i) {
        const std::string tag = std::to_string(series.n[i]);
        rec.components.emplace_back("m4_" + tag, series.m4[i].value);
        rec.components.emplace_back("g4_" + tag, series.g4[i].value);
    }
    return seal(rec);
}

const std::vector<std::string>& audit_ids() {
    static const std::vector<std::string> ids{"V2", "V3", "V4", "V5", "V6", "V7", "V8", "V9", "V10", "P4-2"};
    return ids;
}

} // namespace blockclt
