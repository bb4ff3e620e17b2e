// blockclt command line driver.

#include "blockclt/audit.hpp"
#include "blockclt/engine.hpp"
#include "blockclt/error.hpp"
#include "blockclt/tasks.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace blockclt;

constexpr int kExitOk = 0;
constexpr int kExitAudit = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<unsigned> threads;
    std::string tau;
    std::optional<std::string> n;
    std::string process;
    std::string ids;
    std::optional<int> h;
    std::string k;
    std::optional<std::size_t> paths;
    std::string series;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->set_help_flag("--help", "print help");
    sub->add_option("--config", o.config, "INI config file");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads (0 = hardware)");
    sub->add_option("--tau", o.tau, "separation rule: zero, sqrt, or a comma list of t values");
    sub->add_option("--n", o.n, "comma list of path lengths");
    sub->add_option("--process", o.process, "process name");
    sub->add_option("--k", o.k, "comma list of window levels");
    sub->add_option("--h", o.h, "iteration depth");
    sub->add_option("--paths", o.paths, "Monte Carlo paths");
}

RunConfig effective_config(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    auto& ex = cfg.experiment;
    if (o.seed) ex.seed = *o.seed;
    if (!o.out.empty()) cfg.output.dir = o.out;
    if (!o.tau.empty()) ex.tau = o.tau;
    if (o.n) ex.n = parse_int_list(*o.n);
    if (!o.process.empty()) {
        ex.process.kind = parse_process_kind(o.process);
        if (ex.process.kind == ProcessKind::ma && ex.process.ma.empty()) ex.process.ma = {0.8, 0.5};
    }
    if (!o.k.empty()) {
        ex.k.clear();
        for (const auto x : parse_int_list(o.k)) ex.k.push_back(static_cast<int>(x));
    }
    if (o.h) ex.h = *o.h;
    if (o.paths) ex.paths = *o.paths;
    if (!o.series.empty()) ex.series = o.series;
    if (!o.ids.empty()) cfg.audit.ids = parse_word_list(o.ids);
    cfg.validate();
    return cfg;
}

unsigned thread_count(const Overrides& o) {
    if (o.threads) return resolve_threads(*o.threads);
    if (const char* env = std::getenv("BLOCKCLT_THREADS")) {
        try {
            return resolve_threads(static_cast<unsigned>(std::stoul(env)));
        } catch (const std::exception&) {
            fail(ErrorKind::config, std::string("BLOCKCLT_THREADS is not a number: ") + env);
        }
    }
    return resolve_threads(1);
}

int run(const std::string& task, const Overrides& o) {
    const RunConfig cfg = effective_config(o);
    const unsigned threads = thread_count(o);
    const auto start = std::chrono::steady_clock::now();
    const TaskResult result = run_task(task, cfg, threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto files = write_outputs(result, cfg.output.dir);
    write_manifest(cfg.output.dir, task, cfg, wall, files);
    std::size_t rows = 0;
    for (const auto& t : result.tables) rows += t.rows.size();
    std::cout << task << ": " << rows << " rows in " << result.tables.size() << " tables -> " << cfg.output.dir << "\n";
    if (result.exit_code != 0) {
        for (const auto& row : result.table("audits").rows) {
            const bool pass = std::get<bool>(row[12]);
            const bool skipped = std::get<bool>(row[13]);
            if (!pass && !skipped)
                std::cout << "FAIL " << std::get<std::string>(row[0]) << " n=" << std::get<std::int64_t>(row[5])
                          << " k=" << std::get<std::int64_t>(row[1]) << " r=" << std::get<std::int64_t>(row[3])
                          << " t=" << format_real(std::get<double>(row[4])) << "\n";
        }
        return kExitAudit;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blocking-scheme limit theorem experiments"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1, 1);

    Overrides o;
    std::string from;
    std::optional<unsigned> report_threads;

    auto* blocks = app.add_subcommand("blocks", "block lengths u and t over an n grid");
    add_common(blocks, o);
    auto* simulate = app.add_subcommand("simulate", "normalized sums and summary moments");
    add_common(simulate, o);
    auto* coeffs = app.add_subcommand("coeffs", "dependence coefficient tables");
    add_common(coeffs, o);
    coeffs->add_option("--series", o.series, "external CSV series");
    auto* diagnose = app.add_subcommand("diagnose", "moment, KS, cf, Lindeberg and variance diagnostics");
    add_common(diagnose, o);
    auto* audit = app.add_subcommand("audit", "inequality audits");
    add_common(audit, o);
    audit->add_option("--ids", o.ids, "comma list of audit ids");
    auto* report = app.add_subcommand("report", "rerun a manifest and compare outputs");
    report->add_option("--from", from, "directory holding manifest.json")->required();
    report->add_option("--threads", report_threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (report->parsed()) {
            Overrides r;
            r.threads = report_threads;
            const Reproduction rep = reproduce(from, thread_count(r));
            for (const auto& f : rep.files) std::cout << (f.identical ? "same " : "DIFF ") << f.file << "\n";
            std::cout << rep.task << ": " << (rep.identical() ? "reproduced" : "not reproduced") << "\n";
            return rep.identical() ? kExitOk : kExitAudit;
        }
        for (auto* sub : app.get_subcommands()) return run(sub->get_name(), o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::config ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
