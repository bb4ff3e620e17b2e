#include "doctest.h"

#include "blockclt/config.hpp"
#include "blockclt/error.hpp"
#include "blockclt/rng.hpp"
#include "blockclt/tasks.hpp"

#include "json.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace blockclt;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(BLOCKCLT_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 512> buf{};
    while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("blockclt_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig small(const std::string& process = "iid-normal") {
    return parse_config("[experiment]\nprocess = " + process +
                        "\nn = 64, 256\npaths = 400\npilot_paths = 400\nseed = 3\nk = 1\nh = 1\n"
                        "[coeffs]\nnull_replicates = 2\nrestarts = 2\n[audit]\np42_grid = 16, 64\np42_paths = 200\n");
}

std::vector<std::string> columns(const TaskResult& r, const std::string& table) { return r.table(table).columns; }

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::domain;
}

} // namespace

TEST_CASE("config parsing") {
    const RunConfig d = parse_config("");
    CHECK(d.experiment.n == std::vector<std::int64_t>{1024});
    CHECK(kind_of([] { (void)parse_config("[experiment]\nbogus = 1\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { (void)parse_config("[nosuch]\nx = 1\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { (void)parse_config("[experiment]\nn =\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { (void)parse_config("[experiment]\nn = 100, 50\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { (void)parse_config("[experiment]\nprocess = arma\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { (void)parse_config("[audit]\nids = V2, V11\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { (void)parse_config("[experiment]\nphi = 1.5\nprocess = ar1\n"); }) == ErrorKind::config);
    const RunConfig ma = parse_config("[experiment]\nprocess = ma\n");
    CHECK(ma.experiment.process.ma == std::vector<double>{0.8, 0.5});
    const RunConfig c = small("sin-functional");
    CHECK(parse_config(c.canonical()).canonical() == c.canonical());
    CHECK(parse_int_list("1, 2,3") == std::vector<std::int64_t>{1, 2, 3});
    CHECK(format_real(0.1) == "0.1");
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("blocks golden output") {
    RunConfig cfg = parse_config("[experiment]\ntau = sqrt\nn = 10\n");
    const TaskResult r = run_blocks(cfg);
    CHECK(to_csv(r.tables[0]) == "schema,n,u,t,n_over_u,t_over_u\nblockclt.blocks.v1,10,4,2,2.5,0.5\n");
    CHECK(to_jsonl(r) ==
          "{\"schema\":\"blockclt.blocks.v1\",\"table\":\"blocks\",\"n\":10,\"u\":4,\"t\":2,\"n_over_u\":2.5,"
          "\"t_over_u\":0.5}\n");
    cfg.experiment.tau = "zero";
    const TaskResult zr = run_blocks(cfg);
    const auto& row = zr.tables[0].rows[0];
    CHECK(std::get<std::int64_t>(row[1]) == 5);
    CHECK(std::get<std::int64_t>(row[2]) == 0);
    CHECK(std::get<double>(row[3]) == 2.0);
}

TEST_CASE("table schemas are pinned") {
    const RunConfig cfg = small();
    const TaskResult s = run_simulate(cfg, 1);
    CHECK(columns(s, "summary") ==
          std::vector<std::string>{"n", "paths", "u", "t", "sigma", "sigma_source", "mean", "mean_stderr", "m2", "m3", "m4", "ks"});
    const TaskResult c = run_coeffs(cfg, 1);
    CHECK(columns(c, "gaps") == std::vector<std::string>{"n", "k", "u", "t", "samples", "estimator", "value", "stderr",
                                                         "event_stderr", "exact", "out_a", "out_b"});
    CHECK(columns(c, "moments") == std::vector<std::string>{"n", "kind", "p", "q", "value", "stderr"});
    CHECK(columns(c, "alpha") == std::vector<std::string>{"n", "k", "m", "lag", "value", "stderr", "event_stderr", "exact"});
    CHECK(columns(c, "rho") == std::vector<std::string>{"n", "u", "t", "rho", "tail", "tail_stderr", "satisfied"});
    const TaskResult d = run_diagnose(cfg, 1);
    for (const char* t : {"moments", "ks", "ks_trend", "cf", "cf_power", "lindeberg", "ui_tails", "variance_ratio",
                          "joint_gaussian", "delta", "kn"})
        CHECK_NOTHROW((void)d.table(t));
    CHECK(columns(d, "delta") ==
          std::vector<std::string>{"k", "n", "window_bound", "rho", "i_gap", "s_gap", "composite", "reconstructed"});
    for (const auto& row : d.table("delta").rows) CHECK(std::get<bool>(row[7]));
    const TaskResult a = run_audit(cfg, 1);
    CHECK(columns(a, "audits") == std::vector<std::string>{"id", "k", "h", "r", "t", "n", "process", "lhs", "lhs_stderr", "rhs",
                                                           "rhs_stderr", "slack", "pass", "skipped", "reason", "components"});
    for (const auto& line : {to_jsonl(c), to_jsonl(d)}) {
        std::istringstream in(line);
        std::string l;
        while (std::getline(in, l)) {
            const auto j = nlohmann::json::parse(l);
            REQUIRE(j.contains("schema"));
            CHECK(j["schema"].get<std::string>().rfind("blockclt.", 0) == 0);
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    const RunConfig cfg = small("ma");
    const std::string one = to_jsonl(run_coeffs(cfg, 1));
    CHECK(to_jsonl(run_coeffs(cfg, 2)) == one);
    CHECK(to_jsonl(run_coeffs(cfg, 8)) == one);
    const std::string d1 = to_jsonl(run_diagnose(cfg, 1));
    CHECK(to_jsonl(run_diagnose(cfg, 8)) == d1);
}

TEST_CASE("external series through coeffs") {
    const fs::path dir = scratch("series");
    {
        std::ofstream out(dir / "x.csv");
        out << "value\n";
        Stream rng(1);
        double prev = 0;
        for (int i = 0; i < 40000; ++i) {
            const double z = rng.normal();
            out << (z + 0.5 * prev) << "\n";
            prev = z;
        }
    }
    RunConfig cfg = small();
    cfg.experiment.series = (dir / "x.csv").string();
    cfg.experiment.process = ProcessSpec::external();
    cfg.validate();
    const TaskResult ext = run_coeffs(cfg, 1);
    const TaskResult gen = run_coeffs(small(), 1);
    REQUIRE(ext.tables.size() == gen.tables.size());
    for (std::size_t i = 0; i < ext.tables.size(); ++i) {
        CHECK(ext.tables[i].name == gen.tables[i].name);
        CHECK(ext.tables[i].columns == gen.tables[i].columns);
    }
    // n = 64: u = 29, t = 6, stride 35, floor((40000 - 64) / 35) + 1 windows.
    CHECK(std::get<std::int64_t>(ext.table("gaps").rows[0][4]) == (40000 - 64) / 35 + 1);
    CHECK(kind_of([&] { (void)run_diagnose(cfg, 1); }) == ErrorKind::unsupported);
    CHECK(kind_of([&] { (void)run_audit(cfg, 1); }) == ErrorKind::unsupported);
    cfg.experiment.stride = 100;
    CHECK(std::get<std::int64_t>(run_coeffs(cfg, 1).table("gaps").rows[0][4]) == (40000 - 64) / 100 + 1);
}

TEST_CASE("manifest round trip") {
    const fs::path dir = scratch("manifest");
    const RunConfig cfg = small("sin-functional");
    const TaskResult r = run_coeffs(cfg, 1);
    const auto files = write_outputs(r, dir);
    write_manifest(dir, "coeffs", cfg, 0.5, files);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["task"] == "coeffs");
    CHECK(m["seed"] == 3);
    CHECK(m["config_sha256"] == sha256_hex(m["config"].get<std::string>()));
    CHECK(m["files"].size() == r.tables.size() + 1);
    const Reproduction rep = reproduce(dir, 2);
    CHECK(rep.identical());
    {
        std::ofstream(dir / "coeffs-rho.csv", std::ios::app) << "tampered\n";
    }
    CHECK_FALSE(reproduce(dir, 1).identical());
}

TEST_CASE("command line") {
    const fs::path dir = scratch("cmd");
    const std::string out = " --out " + dir.string();
    Run r = cli("blocks --tau zero --n 10" + out);
    CHECK(r.code == 0);
    CHECK(slurp(dir / "blocks-blocks.csv") == "schema,n,u,t,n_over_u,t_over_u\nblockclt.blocks.v1,10,5,0,2,0\n");
    r = cli("blocks --tau sqrt --n 1000000" + out);
    CHECK(r.code == 0);
    const auto line = nlohmann::json::parse(slurp(dir / "blocks.jsonl"));
    CHECK(std::abs(line["n_over_u"].get<double>() - 2.0) <= 0.002);

    r = cli("audit --ids V5,V11" + out);
    CHECK(r.code == 2);
    CHECK(r.out.find("V10") != std::string::npos);
    CHECK(r.out.find("P4-2") != std::string::npos);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("blocks --n 10 --paths notanumber").code == 2);
    CHECK(cli("diagnose --n '' " + out).code == 2);

    {
        std::ofstream(dir / "bad.ini") << "[experiment]\ntypo = 1\n";
    }
    r = cli("simulate --config " + (dir / "bad.ini").string() + out);
    CHECK(r.code == 2);
    CHECK(r.out.find("typo") != std::string::npos);

    r = cli("audit --ids V5,V6 --process iid-normal --n 256 --paths 4000 --threads 2" + out);
    CHECK(r.code == 0);
    r = cli("report --from " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("reproduced") != std::string::npos);
    CHECK(cli("report --from " + (dir / "missing").string()).code == 3);
}
