// Acceptance suite: one PASS/FAIL line per criterion. `--only N` runs a
// single criterion; the exit status is nonzero when any selected one fails.

#include "blockclt/audit.hpp"
#include "blockclt/blockscheme.hpp"
#include "blockclt/config.hpp"
#include "blockclt/dependence.hpp"
#include "blockclt/diagnostics.hpp"
#include "blockclt/engine.hpp"
#include "blockclt/processes.hpp"
#include "blockclt/rng.hpp"
#include "blockclt/tasks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace blockclt;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double x) { return format_real(x); }

unsigned workers() { return resolve_threads(0); }

// Per-path partial sums X_1 + ... + X_p at each requested position p,
// streamed so that long paths are never materialized.
std::vector<std::vector<double>> stream_sums(const ProcessSpec& spec, std::vector<std::int64_t> positions,
                                             std::size_t paths, std::uint64_t seed) {
    const auto len = static_cast<std::size_t>(*std::max_element(positions.begin(), positions.end()));
    std::vector<std::vector<double>> out(positions.size(), std::vector<double>(paths));
    parallel_chunks(paths, workers(), [&](std::size_t begin, std::size_t end) {
        PathGenerator gen(spec, seed);
        std::vector<double> buf(len);
        std::vector<double> prefix(len + 1);
        for (std::size_t i = begin; i < end; ++i) {
            gen.fill(i, buf);
            prefix[0] = 0.0;
            for (std::size_t j = 0; j < len; ++j) prefix[j + 1] = prefix[j] + buf[j];
            for (std::size_t q = 0; q < positions.size(); ++q) out[q][i] = prefix[static_cast<std::size_t>(positions[q])];
        }
    });
    return out;
}

std::vector<double> scaled(std::vector<double> v, double sigma) {
    for (auto& x : v) x /= sigma;
    return v;
}

std::int64_t brute_u(const TauRule& rule, std::int64_t n) {
    if (n == 1) return 1;
    std::int64_t best = 0;
    for (std::int64_t m = 1; 2 * m <= n; ++m)
        if (2 * m + rule(m) <= n) best = m;
    return best;
}

Outcome block_law() {
    Outcome o;
    std::int64_t mismatches = 0;
    for (const auto& rule : {TauRule::zero(), TauRule::sqrt_ceil()})
        for (std::int64_t n = 1; n <= 10000; ++n)
            if (block_u(rule, n) != brute_u(rule, n)) ++mismatches;
    o.require(mismatches == 0, std::to_string(mismatches) + " block_u mismatches");
    const BlockLayout l = make_layout(TauRule::sqrt_ceil(), 1000000);
    const double nu = 1e6 / static_cast<double>(l.u);
    const double tu = static_cast<double>(l.t) / static_cast<double>(l.u);
    o.require(std::abs(nu - 2.0) <= 0.002, "n/u = " + fmt(nu));
    o.require(tu <= 0.002, "t/u = " + fmt(tu));
    o.detail = "brute force agrees for n <= 1e4; n = 1e6: n/u = " + fmt(nu) + ", t/u = " + fmt(tu) +
               (o.detail.empty() ? "" : "; " + o.detail);
    return o;
}

Outcome mclt_null() {
    Outcome o;
    const auto sums = stream_sums(ProcessSpec::iid_normal(), {1024}, 100000, 1);
    const auto s = scaled(sums[0], *exact_sigma(ProcessSpec::iid_normal(), 1024));
    const MomentReport m = moment_report(s, 4);
    const double m2 = m.at(2).empirical.value, m3 = m.at(3).empirical.value, m4 = m.at(4).empirical.value;
    o.require(std::abs(m2 - 1.0) <= 0.02, "m2");
    o.require(std::abs(m3) <= 0.05, "m3");
    o.require(std::abs(m4 - 3.0) <= 0.15, "m4");
    o.detail = "E S^2 = " + fmt(m2) + ", E S^3 = " + fmt(m3) + ", E S^4 = " + fmt(m4) + (o.detail.empty() ? "" : "; failed " + o.detail);
    return o;
}

Outcome functional_clt() {
    Outcome o;
    const std::vector<std::int64_t> grid{256, 1024, 4096};
    std::string detail;
    for (const auto& spec : {ProcessSpec::kernel_functional(KernelId::gauss_cosine, 10), ProcessSpec::sin_functional(10)}) {
        const auto sums = stream_sums(spec, grid, 20000, 1);
        std::vector<double> ks;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double sigma = sigma_for(spec, grid[i], 1, 20000, workers());
            ks.push_back(ks_distance(scaled(sums[i], sigma)));
        }
        const bool monotone = ks[1] <= ks[0] && ks[2] <= ks[1];
        o.require(monotone, spec.name() + " KS not nonincreasing");
        o.require(ks[2] <= 0.05, spec.name() + " KS(4096) > 0.05");
        detail += spec.name() + " KS = " + fmt(ks[0]) + ", " + fmt(ks[1]) + ", " + fmt(ks[2]) + "; ";
    }
    detail.resize(detail.size() - 2);
    o.detail = detail + (o.detail.empty() ? "" : "; failed: " + o.detail);
    return o;
}

CellTable table_of(const std::vector<std::vector<std::uint64_t>>& counts) {
    CellTable::JointMap joint;
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t j = 0; j < counts[i].size(); ++j)
            if (counts[i][j]) joint[{static_cast<CellTable::Slot>(i), static_cast<CellTable::Slot>(j)}] = counts[i][j];
    return CellTable::from_joint(1, joint);
}

double brute_algebra(const std::vector<std::vector<std::uint64_t>>& c) {
    double total = 0;
    for (const auto& row : c)
        for (const auto x : row) total += static_cast<double>(x);
    double best = 0;
    for (std::size_t ma = 0; ma < (std::size_t{1} << c.size()); ++ma)
        for (std::size_t mb = 0; mb < (std::size_t{1} << c[0].size()); ++mb) {
            double pab = 0, pa = 0, pb = 0;
            for (std::size_t i = 0; i < c.size(); ++i)
                for (std::size_t j = 0; j < c[i].size(); ++j) {
                    const double p = static_cast<double>(c[i][j]) / total;
                    const bool ia = (ma >> i) & 1, ib = (mb >> j) & 1;
                    pab += ia && ib ? p : 0.0;
                    pa += ia ? p : 0.0;
                    pb += ib ? p : 0.0;
                }
            best = std::max(best, std::abs(pab - pa * pb));
        }
    return best;
}

Outcome dependence_soundness() {
    Outcome o;
    const TauRule rule = TauRule::sqrt_ceil();
    const auto ma = ProcessSpec::moving_average({0.8, 0.5});

    const BlockLayout l64 = make_layout(rule, 64);
    const PathBatch mb = generate_paths(ma, 64, 100000, 1, workers());
    const BlockSums ms = extract_block_sums(mb, l64, *exact_sigma(ma, l64.u));
    const GapEstimate g = algebra_gap(histogram_pair(ms.left, ms.right, 1));
    o.require(g.value() <= 0.015, "ma(2) algebra gap (t = " + std::to_string(l64.t) + ") = " + fmt(g.value()));
    const GapEstimate a3 = alpha_restricted(mb, 1, 3, 16);
    o.require(a3.value() <= 0.015, "ma(2) alpha at t = 3 = " + fmt(a3.value()));

    const auto iid = ProcessSpec::iid_normal();
    const PathBatch ib = generate_paths(iid, 64, 20000, 2, workers());
    const BlockSums is = extract_block_sums(ib, l64, *exact_sigma(iid, l64.u));
    int null_checks = 0;
    double worst_z = 0.0;
    auto null_check = [&](const std::string& name, double value, double se) {
        ++null_checks;
        worst_z = std::max(worst_z, se > 0 ? value / se : (value > 0 ? INFINITY : 0.0));
        o.require(value <= 4.0 * se, name + " = " + fmt(value) + " > 4 se " + fmt(se));
    };
    for (const int k : {1, 2}) {
        const CellTable t = histogram_pair(is.left, is.right, k);
        const GapEstimate pc = percell_gap(t);
        null_check("percell k=" + std::to_string(k), pc.value(), pc.std_error());
        const GapEstimate al = algebra_gap(t);
        null_check("algebra k=" + std::to_string(k), al.value(), al.std_error());
        const StationarityGap st = stationarity_gap(t);
        null_check("stationarity percell k=" + std::to_string(k), st.percell.value(), st.percell.std_error());
        null_check("stationarity algebra k=" + std::to_string(k), st.algebra.value(), st.algebra.std_error());
        for (const std::int64_t lag : {0, 3}) {
            const GapEstimate ar = alpha_restricted(ib, k, lag, 16);
            null_check("alpha lag " + std::to_string(lag), ar.value(), ar.std_error());
        }
    }
    const MomentGapTable mg = moment_gaps(is.left, is.right, 4);
    for (const auto& e : mg.marginal) null_check("marginal moment " + std::to_string(e.p), e.gap.value, e.gap.std_error);
    for (const auto& e : mg.cross)
        null_check("cross moment " + std::to_string(e.p) + "," + std::to_string(e.q), e.gap.value, e.gap.std_error);

    Stream rng(4);
    auto random_counts = [&](std::size_t ra, std::size_t rb) {
        std::vector<std::vector<std::uint64_t>> c(ra, std::vector<std::uint64_t>(rb));
        for (auto& row : c)
            for (auto& x : row) x = rng.below(4) == 0 ? 0 : 1 + rng.below(50);
        c[0][0] += 1;
        return c;
    };
    GapOptions quick;
    quick.null_replicates = 0;
    int order_violations = 0;
    for (int i = 0; i < 200; ++i) {
        const CellTable t = table_of(random_counts(2 + rng.below(6), 2 + rng.below(6)));
        if (percell_gap(t).value() > algebra_gap(t, quick).value() + 1e-15) ++order_violations;
    }
    o.require(order_violations == 0, std::to_string(order_violations) + " percell > algebra");
    int exact_mismatch = 0;
    for (int i = 0; i < 400; ++i) {
        const std::size_t d = i % 2 ? 4 : 3;
        const auto c = random_counts(d, d);
        const GapEstimate e = algebra_gap(table_of(c), quick);
        if (!e.exact || std::abs(e.value() - brute_algebra(c)) > 1e-12) ++exact_mismatch;
    }
    o.require(exact_mismatch == 0, std::to_string(exact_mismatch) + " exact-mode mismatches");
    const std::string head = "ma(2) algebra gap " + fmt(g.value()) + ", alpha(t=3) " + fmt(a3.value()) + "; " +
                             std::to_string(null_checks) + " iid gaps, max value/se " + fmt(worst_z) +
                             "; 200 ordering and 400 enumeration tables checked";
    o.detail = head + (o.detail.empty() ? "" : "; failed: " + o.detail);
    return o;
}

int column(const Table& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return static_cast<int>(i);
    return -1;
}

Outcome inequality_audits() {
    Outcome o;
    int evaluated = 0, skipped = 0, nulls = 0;
    double worst_null = 0.0;
    auto run = [&](const std::string& process, int h, const std::string& tau, bool null_ids_only) {
        RunConfig cfg = parse_config("[experiment]\nprocess = " + process + "\ntau = " + tau +
                                     "\nn = 256\npaths = 40000\npilot_paths = 20000\nseed = 1\nk = 1, 2\nh = " +
                                     std::to_string(h) + "\n[audit]\nt = 0, 0.5, 1, 2\n");
        const TaskResult r = run_audit(cfg, workers());
        const Table& t = r.table("audits");
        const int id = column(t, "id"), pass = column(t, "pass"), skip = column(t, "skipped");
        const int lhs = column(t, "lhs"), lse = column(t, "lhs_stderr");
        for (const auto& row : t.rows) {
            const std::string name = std::get<std::string>(row[id]);
            const bool is_skipped = std::get<bool>(row[skip]);
            if (!null_ids_only) {
                if (is_skipped) {
                    ++skipped;
                } else {
                    ++evaluated;
                    o.require(std::get<bool>(row[pass]),
                              process + " h=" + std::to_string(h) + " " + name + " k=" +
                                  std::to_string(std::get<std::int64_t>(row[column(t, "k")])) +
                                  " t=" + fmt(std::get<double>(row[column(t, "t")])));
                }
            }
            // Population-zero left sides for independent Gaussian blocks; the
            // recursion step V7 keeps the middle block unless tau is zero.
            const bool zero_population = name != "V2" && (name != "V7" || tau == "zero");
            if (process == "iid-normal" && zero_population && !is_skipped) {
                const double v = std::get<double>(row[lhs]), se = std::get<double>(row[lse]);
                ++nulls;
                if (se > 0) worst_null = std::max(worst_null, v / se);
                o.require(v <= 4.0 * se, "null " + name + " lhs " + fmt(v) + " > 4 se");
            }
        }
    };
    for (const std::string p : {"iid-normal", "ma", "sin-functional"})
        for (const int h : {1, 2}) run(p, h, "sqrt", false);
    run("iid-normal", 2, "zero", true);
    const std::string head = std::to_string(evaluated) + " audits evaluated, " + std::to_string(skipped) +
                             " skipped; " + std::to_string(nulls) + " null lhs terms, max lhs/se " + fmt(worst_null);
    o.detail = head + (o.detail.empty() ? "" : "; failed: " + o.detail);
    return o;
}

Outcome variance_and_joint() {
    Outcome o;
    const auto ma = ProcessSpec::moving_average({0.8, 0.5});
    const BlockLayout l = make_layout(TauRule::sqrt_ceil(), 4096);
    const auto sums = stream_sums(ma, {l.u, l.u + l.t, l.n}, 100000, 1);
    const VarianceRatio v = variance_ratio(sums[2], sums[0], l);
    const double dev = std::abs(v.ratio.value - v.ratio_target);
    o.require(dev <= 4.0 * v.ratio.std_error, "ratio off by " + fmt(dev / v.ratio.std_error) + " se");
    const double su = *exact_sigma(ma, l.u);
    std::vector<double> left(sums[0].size()), right(sums[0].size());
    for (std::size_t i = 0; i < left.size(); ++i) {
        left[i] = sums[0][i] / su;
        right[i] = (sums[2][i] - sums[1][i]) / su;
    }
    double worst = 0.0;
    for (const auto& e : joint_gaussian_check(left, right, 4)) {
        worst = std::max(worst, std::abs(e.z));
        o.require(std::abs(e.z) <= 5.0, "joint moment (" + std::to_string(e.p) + "," + std::to_string(e.q) + ") z = " + fmt(e.z));
    }
    const std::string head = "ratio " + fmt(v.ratio.value) + " +- " + fmt(v.ratio.std_error) + " (" +
                             fmt(dev / v.ratio.std_error) + " se from sqrt 2); max joint |z| " + fmt(worst);
    o.detail = head + (o.detail.empty() ? "" : "; failed: " + o.detail);
    return o;
}

Outcome lindeberg_ui() {
    Outcome o;
    const auto sin = ProcessSpec::sin_functional(10);
    const double bound = *path_bound(sin);
    const PathBatch b = generate_paths(sin, 64, 2000, 1, workers());
    const std::vector<double> values(b.values().begin(), b.values().end());
    const std::int64_t n = 16;
    const double sigma = sigma_for(sin, n, 1, 20000, workers());
    std::vector<double> sums(b.n_paths());
    for (std::size_t i = 0; i < sums.size(); ++i) {
        double s = 0;
        for (std::int64_t t = 0; t < n; ++t) s += b.path(i)[static_cast<std::size_t>(t)];
        sums[i] = s / sigma;
    }
    const double sum_bound = static_cast<double>(n) * bound / sigma;
    int zero_cases = 0;
    for (const double d : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0})
        for (int k = 0; k <= 8; ++k) {
            const double thr = d * std::exp2(0.5 * k);
            if (thr > bound) {
                ++zero_cases;
                o.require(lindeberg_functional(values, d, k).value == 0.0, "values d=" + fmt(d) + " k=" + std::to_string(k));
            }
            if (thr > sum_bound) {
                ++zero_cases;
                o.require(lindeberg_functional(sums, d, k).value == 0.0, "sums d=" + fmt(d) + " k=" + std::to_string(k));
            }
        }
    o.require(lindeberg_functional(values, 0.25, 0).value > 0.0, "no mass below the bound");

    const std::vector<double> thresholds{0.25, 0.5, 1, 1.5, 2, 3, 4, 6};
    int fixtures = 0;
    for (const auto& spec : {ProcessSpec::iid_normal(), ProcessSpec::iid_uniform(), ProcessSpec::ar1(0.5),
                             ProcessSpec::moving_average({0.8, 0.5}), ProcessSpec::sin_functional(10),
                             ProcessSpec::legendre_functional(6), ProcessSpec::kernel_functional(KernelId::gauss_cosine, 10)}) {
        const auto s = scaled(stream_sums(spec, {256}, 5000, 2)[0], sigma_for(spec, 256, 2, 5000, workers()));
        const auto tail = ui_tail_profile(s, thresholds);
        for (std::size_t i = 1; i < tail.size(); ++i)
            o.require(tail[i].value <= tail[i - 1].value, spec.name() + " UI tail increases at K=" + fmt(thresholds[i]));
        ++fixtures;
    }
    const std::string head = std::to_string(zero_cases) + " above-bound Lindeberg values exactly 0 (bound " + fmt(bound) +
                             "); UI profiles nonincreasing on " + std::to_string(fixtures) + " fixtures";
    o.detail = head + (o.detail.empty() ? "" : "; failed: " + o.detail);
    return o;
}

Outcome cf_power() {
    Outcome o;
    Stream rng(1);
    std::vector<double> s(100000);
    for (auto& x : s) x = rng.normal();
    std::vector<double> grid;
    for (int i = -30; i <= 30; ++i) grid.push_back(0.1 * i);
    double worst = 0.0;
    for (const int r : {1, 2})
        for (const auto& g : cf_power_compare(s, r, grid)) worst = std::max(worst, g.gap.value);
    o.require(worst <= 0.02, "gap " + fmt(worst));
    o.detail = "max gap over r in {1, 2}, |t| <= 3: " + fmt(worst);
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto root = std::filesystem::temp_directory_path() / "blockclt_acceptance_determinism";
    std::filesystem::remove_all(root);
    const RunConfig cfg = parse_config(
        "[experiment]\nprocess = sin-functional\nn = 64, 256\npaths = 2000\npilot_paths = 2000\nseed = 9\nk = 1, 2\nh = 2\n"
        "[coeffs]\nnull_replicates = 4\nrestarts = 4\n[audit]\nids = V2, V3, V4, V5, V6, V7, V8, V9, V10, P4-2\n"
        "p42_grid = 16, 64\np42_paths = 500\n");
    int files = 0;
    for (const auto& task : task_names()) {
        const auto dir = root / task;
        const TaskResult r = run_task(task, cfg, 1);
        const auto written = write_outputs(r, dir);
        write_manifest(dir, task, cfg, 0.0, written);
        const Reproduction rep = reproduce(dir, 2);
        files += static_cast<int>(rep.files.size());
        o.require(rep.identical(), task + " not reproduced from its manifest");
        const std::string one = to_jsonl(r);
        for (const unsigned w : {2u, 8u}) o.require(to_jsonl(run_task(task, cfg, w)) == one, task + " differs at " + std::to_string(w) + " workers");
    }
    std::filesystem::remove_all(root);
    const std::string head = std::to_string(task_names().size()) + " tasks, " + std::to_string(files) +
                             " payload files byte-identical; 1/2/8 workers agree";
    o.detail = head + (o.detail.empty() ? "" : "; failed: " + o.detail);
    return o;
}

double cdf_series(double xd) {
    const long double x = xd;
    long double term = x, sum = x;
    for (int n = 1; n < 400; ++n) {
        term *= x * x / (2.0L * n + 1.0L);
        sum += term;
        if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
    }
    return static_cast<double>(0.5L + sum * std::exp(-x * x / 2.0L) / std::sqrt(2.0L * std::numbers::pi_v<long double>));
}

Outcome exact_math() {
    Outcome o;
    double worst_leg = 0.0;
    for (int i = 1; i <= 8; ++i)
        for (int j = 0; j < i; ++j) worst_leg = std::max(worst_leg, std::abs(legendre_orthogonality_check(i, j, 16)));
    o.require(worst_leg <= 1e-12, "legendre " + fmt(worst_leg));
    double worst_cdf = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = -8.0 + 16.0 * i / 999.0;
        worst_cdf = std::max(worst_cdf, std::abs(normal_cdf(x) - cdf_series(x)));
    }
    o.require(worst_cdf <= 1e-10, "normal_cdf " + fmt(worst_cdf));
    double df = 1.0;
    bool moments = gaussian_moment(0) == 1.0;
    for (int p = 1; p <= 16; ++p) {
        if (p % 2 == 0) df *= p - 1;
        moments = moments && gaussian_moment(p) == (p % 2 ? 0.0 : df);
    }
    o.require(moments, "gaussian_moment");
    o.detail = "legendre max " + fmt(worst_leg) + ", normal_cdf max error " + fmt(worst_cdf) +
               ", gaussian moments exact to p = 16" + (o.detail.empty() ? "" : "; failed: " + o.detail);
    return o;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    const std::vector<Criterion> all{
        {1, "block law", block_law},
        {2, "moment CLT null suite", mclt_null},
        {3, "functional CLT", functional_clt},
        {4, "dependence coefficient soundness", dependence_soundness},
        {5, "inequality audits", inequality_audits},
        {6, "variance ratio and joint Gaussianity", variance_and_joint},
        {7, "Lindeberg and UI instruments", lindeberg_ui},
        {8, "cf-power recursion", cf_power},
        {9, "determinism", determinism},
        {10, "exact-math oracles", exact_math},
    };
    bool ok = true;
    for (const auto& c : all) {
        if (only != 0 && c.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s): %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs);
        std::fflush(stdout);
        ok = ok && out.pass;
    }
    return ok ? 0 : 1;
}
