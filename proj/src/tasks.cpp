#include "blockclt/tasks.hpp"

#include "blockclt/audit.hpp"
#include "blockclt/blockscheme.hpp"
#include "blockclt/dependence.hpp"
#include "blockclt/diagnostics.hpp"
#include "blockclt/error.hpp"
#include "blockclt/rng.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#ifndef BLOCKCLT_VERSION
#define BLOCKCLT_VERSION "0.0.0"
#endif

namespace blockclt {

namespace {

using json = nlohmann::ordered_json;

// Source of per-path samples for one run: generated paths shared across the
// n grid, or sliding windows cut from an external series.
class Source {
public:
    Source(const RunConfig& cfg, unsigned threads) : cfg_(cfg), threads_(threads) {
        const auto& ex = cfg.experiment;
        if (!ex.series.empty()) {
            series_ = load_series(ex.series);
        } else {
            batch_ = generate_paths(ex.process, static_cast<std::size_t>(ex.n.back()), ex.paths, ex.seed, threads);
        }
    }

    bool external() const { return series_.has_value(); }

    /// Paths of length >= n.
    const PathBatch& batch(std::int64_t n) {
        if (!external()) return *batch_;
        auto it = windows_.find(n);
        if (it != windows_.end()) return it->second;
        const BlockLayout layout = make_layout(TauRule::parse(cfg_.experiment.tau), n);
        const std::int64_t stride = cfg_.experiment.stride > 0 ? cfg_.experiment.stride : std::max<std::int64_t>(1, layout.u + layout.t);
        const auto length = static_cast<std::int64_t>(series_->path_length());
        if (length < n) fail(ErrorKind::insufficient_data, "series shorter than n = " + std::to_string(n));
        const std::int64_t count = (length - n) / stride + 1;
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(count * n));
        const auto data = series_->path(0);
        for (std::int64_t w = 0; w < count; ++w)
            values.insert(values.end(), data.begin() + w * stride, data.begin() + w * stride + n);
        return windows_
            .emplace(n, PathBatch(ProcessSpec::external(), static_cast<std::size_t>(count), static_cast<std::size_t>(n), 0,
                                  std::move(values)))
            .first->second;
    }

    /// sigma(u): exact or pilot for generated paths; the sample sd of the
    /// length-u prefix sums for series windows.
    double sigma(const PathBatch& batch, std::int64_t u) {
        if (!external()) {
            auto it = sigmas_.find(u);
            if (it != sigmas_.end()) return it->second;
            const auto& ex = cfg_.experiment;
            const double s = sigma_for(ex.process, u, ex.seed, ex.pilot_paths, threads_);
            sigmas_[u] = s;
            return s;
        }
        std::vector<double> sums(batch.n_paths());
        for (std::size_t i = 0; i < sums.size(); ++i) {
            const auto p = batch.path(i);
            double s = 0.0;
            for (std::int64_t t = 0; t < u; ++t) s += p[static_cast<std::size_t>(t)];
            sums[i] = s;
        }
        const double sd = mean_estimate(sums).std_error * std::sqrt(static_cast<double>(sums.size()));
        if (!(sd > 0.0)) fail(ErrorKind::insufficient_data, "series block sums have zero variance");
        return sd;
    }

    std::string sigma_source() const {
        if (external()) return "sample";
        return exact_sigma(cfg_.experiment.process, 1) ? "exact" : "pilot";
    }

private:
    const RunConfig& cfg_;
    unsigned threads_;
    std::optional<PathBatch> batch_;
    std::optional<PathBatch> series_;
    std::map<std::int64_t, PathBatch> windows_;
    std::map<std::int64_t, double> sigmas_;
};

void require_generated(const RunConfig& cfg, const std::string& task) {
    if (!cfg.experiment.series.empty())
        fail(ErrorKind::unsupported, "task '" + task + "' needs generated paths; external series support coeffs only");
}

std::vector<double> prefix_sums(const PathBatch& batch, std::int64_t n, double sigma) {
    std::vector<double> out(batch.n_paths());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto p = batch.path(i);
        double s = 0.0;
        for (std::int64_t t = 0; t < n; ++t) s += p[static_cast<std::size_t>(t)];
        out[i] = s / sigma;
    }
    return out;
}

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

std::string components_text(const AuditRecord& rec) {
    std::string out;
    for (const auto& [name, value] : rec.components) {
        if (!out.empty()) out += ";";
        out += name + "=" + format_real(value);
    }
    return out;
}

json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return json(nullptr);
                return json(v);
            } else {
                return json(v);
            }
        },
        c);
}

std::string cell_csv(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return format_real(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (v.find_first_of(",\"\n") == std::string::npos) return v;
                std::string q = "\"";
                for (const char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                return q + "\"";
            } else {
                return std::to_string(v);
            }
        },
        c);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(ErrorKind::ingestion, "cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorKind::resource, "cannot write " + p.string());
    out << bytes;
}

} // namespace

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) fail(ErrorKind::shape, "row width does not match table '" + name + "'");
    rows.push_back(std::move(row));
}

const Table& TaskResult::table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return t;
    fail(ErrorKind::out_of_range, "no table '" + name + "' in task " + task);
}

const std::vector<std::string>& task_names() {
    static const std::vector<std::string> names{"blocks", "simulate", "coeffs", "diagnose", "audit"};
    return names;
}

const char* tool_version() { return BLOCKCLT_VERSION; }

TaskResult run_blocks(const RunConfig& cfg) {
    const TauRule rule = TauRule::parse(cfg.experiment.tau);
    TaskResult res;
    res.task = "blocks";
    Table t{"blocks", {"n", "u", "t", "n_over_u", "t_over_u"}, {}};
    for (const auto n : cfg.experiment.n) {
        const BlockLayout l = make_layout(rule, n);
        t.add({l.n, l.u, l.t, static_cast<double>(l.n) / static_cast<double>(l.u),
               static_cast<double>(l.t) / static_cast<double>(l.u)});
    }
    res.tables.push_back(std::move(t));
    return res;
}

TaskResult run_simulate(const RunConfig& cfg, unsigned threads) {
    require_generated(cfg, "simulate");
    Source src(cfg, threads);
    const TauRule rule = TauRule::parse(cfg.experiment.tau);
    TaskResult res;
    res.task = "simulate";
    Table t{"summary", {"n", "paths", "u", "t", "sigma", "sigma_source", "mean", "mean_stderr", "m2", "m3", "m4", "ks"}, {}};
    for (const auto n : cfg.experiment.n) {
        const PathBatch& batch = src.batch(n);
        const BlockLayout l = make_layout(rule, n);
        const double sigma = src.sigma(batch, n);
        const auto s = prefix_sums(batch, n, sigma);
        const MomentReport m = moment_report(s, 4);
        t.add({n, as_int(batch.n_paths()), l.u, l.t, sigma, src.sigma_source(), m.at(1).empirical.value,
               m.at(1).empirical.std_error, m.at(2).empirical.value, m.at(3).empirical.value, m.at(4).empirical.value,
               ks_distance(s)});
    }
    res.tables.push_back(std::move(t));
    return res;
}

TaskResult run_coeffs(const RunConfig& cfg, unsigned threads) {
    Source src(cfg, threads);
    const TauRule rule = TauRule::parse(cfg.experiment.tau);
    TaskResult res;
    res.task = "coeffs";
    Table gaps{"gaps",
               {"n", "k", "u", "t", "samples", "estimator", "value", "stderr", "event_stderr", "exact", "out_a", "out_b"},
               {}};
    Table moments{"moments", {"n", "kind", "p", "q", "value", "stderr"}, {}};
    Table alpha{"alpha", {"n", "k", "m", "lag", "value", "stderr", "event_stderr", "exact"}, {}};
    Table tails{"rho", {"n", "u", "t", "rho", "tail", "tail_stderr", "satisfied"}, {}};

    for (const auto n : cfg.experiment.n) {
        const PathBatch& batch = src.batch(n);
        const BlockLayout layout = make_layout(rule, n);
        const double sigma = src.sigma(batch, layout.u);
        const BlockSums sums = extract_block_sums(batch, layout, sigma);
        for (const int k : cfg.experiment.k) {
            GapOptions opt;
            opt.restarts = cfg.coeffs.restarts;
            opt.null_replicates = cfg.coeffs.null_replicates;
            opt.seed = derive_seed(cfg.experiment.seed, static_cast<std::uint64_t>(n) * 16 + static_cast<std::uint64_t>(k));
            const CellTable table = histogram_pair(sums.left, sums.right, k);
            auto row = [&](const std::string& name, const GapEstimate& g) {
                gaps.add({n, k, layout.u, layout.t, as_int(batch.n_paths()), name, g.value(), g.std_error(),
                          g.event_stderr, g.exact, g.out_a, g.out_b});
            };
            row("percell", percell_gap(table, opt));
            row("algebra", algebra_gap(table, opt));
            const StationarityGap st = stationarity_gap(table, opt);
            row("stationarity_percell", st.percell);
            row("stationarity_algebra", st.algebra);
            for (const auto lag : cfg.coeffs.lags) {
                if (2 * layout.u + lag > static_cast<std::int64_t>(batch.path_length())) continue;
                const GapEstimate a = alpha_restricted(batch, k, lag, layout.u, opt);
                alpha.add({n, k, layout.u, lag, a.value(), a.std_error(), a.event_stderr, a.exact});
            }
        }
        const MomentGapTable mg = moment_gaps(sums.left, sums.right, cfg.coeffs.moment_degree);
        for (const auto& e : mg.marginal) moments.add({n, std::string("marginal"), e.p, e.q, e.gap.value, e.gap.std_error});
        for (const auto& e : mg.cross) moments.add({n, std::string("cross"), e.p, e.q, e.gap.value, e.gap.std_error});
        if (sums.mid.size() >= 100) {
            const RemainderTail rt = remainder_tail(sums.mid);
            tails.add({n, layout.u, layout.t, rt.rho, rt.tail.value, rt.tail.std_error, rt.satisfied});
        }
    }
    res.tables = {std::move(gaps), std::move(moments), std::move(alpha), std::move(tails)};
    return res;
}

TaskResult run_diagnose(const RunConfig& cfg, unsigned threads) {
    require_generated(cfg, "diagnose");
    Source src(cfg, threads);
    const auto& ex = cfg.experiment;
    const auto& di = cfg.diagnose;
    const TauRule rule = TauRule::parse(ex.tau);
    TaskResult res;
    res.task = "diagnose";
    Table moments{"moments", {"n", "p", "value", "stderr", "target", "z"}, {}};
    Table ks{"ks", {"n", "ks"}, {}};
    Table ks_trend{"ks_trend", {"n_min", "n_max", "nonincreasing"}, {}};
    Table cf{"cf", {"n", "t", "re", "im", "gap", "stderr"}, {}};
    Table cfp{"cf_power", {"n", "r", "t", "gap", "stderr"}, {}};
    Table lind{"lindeberg", {"n", "k", "d", "value", "stderr"}, {}};
    Table ui{"ui_tails", {"n", "threshold", "value", "stderr"}, {}};
    Table vr{"variance_ratio", {"n", "u", "ratio", "stderr", "target", "n_over_u", "n_over_u_target"}, {}};
    Table jg{"joint_gaussian", {"n", "p", "q", "value", "stderr", "target", "z"}, {}};
    Table delta{"delta", {"k", "n", "window_bound", "rho", "i_gap", "s_gap", "composite", "reconstructed"}, {}};
    Table kn{"kn", {"n", "epsilon", "k_n", "feasible"}, {}};

    DeltaTable dtable;
    std::vector<double> ks_values;
    for (const auto n : ex.n) {
        const PathBatch& batch = src.batch(n);
        const double sigma_n = src.sigma(batch, n);
        const auto s = prefix_sums(batch, n, sigma_n);
        for (const auto& e : moment_report(s, di.max_degree).entries)
            moments.add({n, e.p, e.empirical.value, e.empirical.std_error, e.target, e.z});
        const double d = ks_distance(s);
        ks_values.push_back(d);
        ks.add({n, d});
        for (const auto& g : cf_compare(s, di.t)) cf.add({n, g.t, g.phi.real(), g.phi.imag(), g.gap.value, g.gap.std_error});

        const IteratedLayout layout = iterate_layout(rule, n, ex.h);
        std::vector<double> sig;
        for (const auto& lv : layout.levels) sig.push_back(src.sigma(batch, lv.u));
        const IteratedStats stats = iterated_stats(batch, layout, sig);
        for (std::size_t r = 0; r < stats.levels.size(); ++r)
            for (const auto& g : cf_power_compare(stats.levels[r].s, static_cast<int>(r), di.t))
                cfp.add({n, static_cast<std::int64_t>(r), g.t, g.gap.value, g.gap.std_error});

        for (const int k : ex.k) {
            const Estimate l = lindeberg_functional(s, di.lindeberg_d, k);
            lind.add({n, k, di.lindeberg_d, l.value, l.std_error});
        }
        const auto tails = ui_tail_profile(s, di.thresholds);
        for (std::size_t i = 0; i < tails.size(); ++i) ui.add({n, di.thresholds[i], tails[i].value, tails[i].std_error});

        const VarianceRatio v = variance_ratio(batch, rule, n);
        vr.add({n, v.u, v.ratio.value, v.ratio.std_error, v.ratio_target, v.n_over_u, v.n_over_u_target});
        if (stats.levels.size() > 1) {
            const auto& lv = stats.levels[1];
            for (const auto& e : joint_gaussian_check(lv.s, lv.right, 4))
                jg.add({n, e.p, e.q, e.empirical.value, e.empirical.std_error, e.target, e.z});
        }

        for (const int k : ex.k) {
            if (k < 1 || 2 * k > kMaxWindowLevel) continue;
            const IteratedLayout lk = iterate_layout(rule, n, k);
            std::vector<double> sk;
            for (const auto& lv : lk.levels) sk.push_back(src.sigma(batch, lv.u));
            const IteratedStats st = iterated_stats(batch, lk, sk);
            GapOptions opt;
            opt.null_replicates = 0;
            opt.seed = derive_seed(ex.seed, static_cast<std::uint64_t>(n) * 16 + static_cast<std::uint64_t>(k));
            const AuditComponents c = audit_components(st, 2 * k, k, opt);
            DeltaEntry e{k, n, c.window_bound, c.rho, c.i_gap.value, c.s_gap.value,
                         delta_k(c.window_bound, c.rho, c.i_gap.value, c.s_gap.value)};
            dtable.entries.push_back(e);
            delta.add({k, n, e.window_bound, e.rho, e.i_gap, e.s_gap, e.composite, true});
        }
    }
    bool nonincreasing = true;
    for (std::size_t i = 1; i < ks_values.size(); ++i) nonincreasing = nonincreasing && ks_values[i] <= ks_values[i - 1];
    ks_trend.add({ex.n.front(), ex.n.back(), nonincreasing});

    const double n0 = static_cast<double>(ex.n.front());
    auto epsilon = [&](std::int64_t n) { return di.epsilon * std::pow(static_cast<double>(n) / n0, -di.epsilon_decay); };
    const auto choice = choose_kn(dtable, ex.n, epsilon);
    for (std::size_t i = 0; i < ex.n.size(); ++i)
        kn.add({ex.n[i], epsilon(ex.n[i]), choice[i] ? static_cast<std::int64_t>(*choice[i]) : std::int64_t{0},
                choice[i].has_value()});

    res.tables = {std::move(moments), std::move(ks), std::move(ks_trend), std::move(cf),    std::move(cfp),
                  std::move(lind),    std::move(ui), std::move(vr),       std::move(jg),    std::move(delta),
                  std::move(kn)};
    return res;
}

TaskResult run_audit(const RunConfig& cfg, unsigned threads) {
    require_generated(cfg, "audit");
    const auto& ex = cfg.experiment;
    const auto& au = cfg.audit;
    auto wanted = [&](const std::string& id) { return std::find(au.ids.begin(), au.ids.end(), id) != au.ids.end(); };
    const TauRule rule = TauRule::parse(ex.tau);
    TaskResult res;
    res.task = "audit";
    Table t{"audits",
            {"id", "k", "h", "r", "t", "n", "process", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "slack", "pass",
             "skipped", "reason", "components"},
            {}};
    std::vector<AuditRecord> records;
    auto skip = [&](const std::string& id, int k, int h, double tt, std::int64_t n, const std::string& why) {
        AuditRecord rec;
        rec.id = id;
        rec.config = AuditConfig{k, h, 0, tt, n, ex.process.name()};
        rec.skipped = true;
        rec.reason = why;
        records.push_back(seal(rec));
    };

    const bool block_audits = std::any_of(au.ids.begin(), au.ids.end(), [](const std::string& id) { return id != "P4-2"; });
    if (block_audits) {
        Source src(cfg, threads);
        for (const auto n : ex.n) {
            const PathBatch& batch = src.batch(n);
            const IteratedLayout layout = iterate_layout(rule, n, ex.h);
            std::vector<double> sig;
            for (const auto& lv : layout.levels) sig.push_back(src.sigma(batch, lv.u));
            const IteratedStats stats = iterated_stats(batch, layout, sig);
            const int depth = static_cast<int>(stats.levels.size()) - 1;
            std::map<std::pair<int, int>, AuditComponents> cache;
            auto components = [&](int level, int h) -> const AuditComponents& {
                const auto key = std::make_pair(level, h);
                auto it = cache.find(key);
                if (it != cache.end()) return it->second;
                GapOptions opt;
                opt.null_replicates = au.null_replicates;
                opt.seed = derive_seed(ex.seed, static_cast<std::uint64_t>(n) * 256 + static_cast<std::uint64_t>(level) * 16 +
                                                    static_cast<std::uint64_t>(h));
                return cache.emplace(key, audit_components(stats, level, h, opt)).first->second;
            };
            for (const int k : ex.k) {
                const AuditComponents& c = components(k, depth);
                for (int r = 1; r <= depth; ++r) {
                    if (wanted("V2")) records.push_back(audit_v2(stats, r, c));
                    if (wanted("V3") || wanted("V4")) {
                        auto [v3, v4] = audit_v3_v4(stats, r, c);
                        if (wanted("V3")) records.push_back(v3);
                        if (wanted("V4")) records.push_back(v4);
                    }
                    for (const double tt : au.t) {
                        if (wanted("V5") || wanted("V6")) {
                            auto [v5, v6] = audit_v5_v6(stats, r, tt, c);
                            if (wanted("V5")) records.push_back(v5);
                            if (wanted("V6")) records.push_back(v6);
                        }
                        if (wanted("V7")) records.push_back(audit_v7(stats, r, tt, c));
                        if (wanted("V8")) records.push_back(audit_v8(stats, r, tt, c));
                    }
                }
                if (wanted("V9")) {
                    for (const double tt : au.t) {
                        if (k + depth > kMaxWindowLevel) {
                            skip("V9", k, depth, tt, n, "window level k + h above the cap");
                            continue;
                        }
                        records.push_back(audit_v9(stats, k, depth, tt, components(k + depth, depth)));
                    }
                }
            }
            if (wanted("V10")) {
                for (const double tt : au.t) {
                    if (depth < 1 || 2 * depth > kMaxWindowLevel) {
                        skip("V10", depth, depth, tt, n, "needs 1 <= h and 2 h within the window cap");
                        continue;
                    }
                    records.push_back(audit_v10(stats, depth, tt, components(2 * depth, depth)));
                }
            }
        }
    }
    if (wanted("P4-2")) {
        if (!ex.process.is_functional()) {
            skip("P4-2", 0, 0, 0.0, 0, "needs a functional process");
        } else {
            P42Options p;
            p.n_grid = au.p42_grid;
            p.paths = au.p42_paths;
            p.seed = derive_seed(ex.seed, 0x42);
            p.threads = threads;
            records.push_back(audit_p42(ex.process, p));
        }
    }

    for (const auto& rec : records) {
        t.add({rec.id, rec.config.k, rec.config.h, rec.config.r, rec.config.t, rec.config.n, rec.config.process,
               rec.lhs.value, rec.lhs.std_error, rec.rhs.value, rec.rhs.std_error, rec.slack(), rec.pass, rec.skipped,
               rec.reason, components_text(rec)});
        if (rec.failed()) res.exit_code = 1;
    }
    res.tables.push_back(std::move(t));
    return res;
}

TaskResult run_task(const std::string& task, const RunConfig& cfg, unsigned threads) {
    if (task == "blocks") return run_blocks(cfg);
    if (task == "simulate") return run_simulate(cfg, threads);
    if (task == "coeffs") return run_coeffs(cfg, threads);
    if (task == "diagnose") return run_diagnose(cfg, threads);
    if (task == "audit") return run_audit(cfg, threads);
    fail(ErrorKind::config, "unknown task '" + task + "'");
}

std::string to_jsonl(const TaskResult& result) {
    std::string out;
    for (const auto& table : result.tables) {
        for (const auto& row : table.rows) {
            json j;
            j["schema"] = table.schema();
            j["table"] = table.name;
            for (std::size_t c = 0; c < table.columns.size(); ++c) j[table.columns[c]] = cell_json(row[c]);
            out += j.dump();
            out += '\n';
        }
    }
    return out;
}

std::string to_csv(const Table& table) {
    std::string out = "schema";
    for (const auto& c : table.columns) out += "," + c;
    out += '\n';
    for (const auto& row : table.rows) {
        out += table.schema();
        for (const auto& cell : row) out += "," + cell_csv(cell);
        out += '\n';
    }
    return out;
}

std::vector<std::string> write_outputs(const TaskResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    const std::string jsonl = result.task + ".jsonl";
    write_file(dir / jsonl, to_jsonl(result));
    files.push_back(jsonl);
    for (const auto& table : result.tables) {
        const std::string csv = result.task + "-" + table.name + ".csv";
        write_file(dir / csv, to_csv(table));
        files.push_back(csv);
    }
    return files;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) fail(ErrorKind::resource, "cannot allocate a digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) == 1 && EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) fail(ErrorKind::resource, "sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

void write_manifest(const std::filesystem::path& dir, const std::string& task, const RunConfig& cfg,
                    double wall_seconds, const std::vector<std::string>& files) {
    const std::string text = cfg.canonical();
    json m;
    m["schema"] = "blockclt.manifest.v1";
    m["tool"] = "blockclt";
    m["version"] = tool_version();
    m["task"] = task;
    m["seed"] = cfg.experiment.seed;
    m["config_sha256"] = sha256_hex(text);
    m["config"] = text;
    json f = json::object();
    for (const auto& name : files) f[name] = sha256_hex(read_file(dir / name));
    m["files"] = f;
    m["wall_time_seconds"] = wall_seconds;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
}

bool Reproduction::identical() const {
    return !files.empty() && std::all_of(files.begin(), files.end(), [](const FileCheck& f) { return f.identical; });
}

Reproduction reproduce(const std::filesystem::path& dir, unsigned threads) {
    json m;
    try {
        m = json::parse(read_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
        fail(ErrorKind::ingestion, std::string("invalid manifest: ") + e.what());
    }
    const std::string text = m.at("config").get<std::string>();
    if (sha256_hex(text) != m.at("config_sha256").get<std::string>())
        fail(ErrorKind::ingestion, "manifest config hash mismatch");
    const RunConfig cfg = parse_config(text);
    Reproduction rep;
    rep.task = m.at("task").get<std::string>();
    const TaskResult result = run_task(rep.task, cfg, threads);
    std::map<std::string, std::string> fresh;
    fresh[result.task + ".jsonl"] = to_jsonl(result);
    for (const auto& table : result.tables) fresh[result.task + "-" + table.name + ".csv"] = to_csv(table);
    for (const auto& [name, hash] : m.at("files").items()) {
        FileCheck check{name, false};
        const auto it = fresh.find(name);
        if (it != fresh.end() && std::filesystem::exists(dir / name)) {
            check.identical = sha256_hex(it->second) == hash.get<std::string>() && read_file(dir / name) == it->second;
        }
        rep.files.push_back(check);
    }
    return rep;
}

} // namespace blockclt
