#pragma once

// Batch tasks behind the command line: each produces named tables that are
// written as JSON lines and CSV, plus a manifest sufficient to rerun them.

#include "blockclt/config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace blockclt {

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
    /// "blockclt.<name>.v1"
    std::string schema() const { return "blockclt." + name + ".v1"; }
};

struct TaskResult {
    std::string task;
    std::vector<Table> tables;
    /// 0 ok, 1 when an audit failed.
    int exit_code = 0;

    const Table& table(const std::string& name) const;
};

const std::vector<std::string>& task_names();

TaskResult run_blocks(const RunConfig& cfg);
TaskResult run_simulate(const RunConfig& cfg, unsigned threads);
TaskResult run_coeffs(const RunConfig& cfg, unsigned threads);
TaskResult run_diagnose(const RunConfig& cfg, unsigned threads);
TaskResult run_audit(const RunConfig& cfg, unsigned threads);
TaskResult run_task(const std::string& task, const RunConfig& cfg, unsigned threads);

/// One JSON object per row: schema, table, then the columns in order.
std::string to_jsonl(const TaskResult& result);
std::string to_csv(const Table& table);

/// Writes <task>.jsonl and <task>-<table>.csv; returns the file names.
std::vector<std::string> write_outputs(const TaskResult& result, const std::filesystem::path& dir);

std::string sha256_hex(const std::string& bytes);

/// manifest.json: tool version, task, seed, config hash, config echo,
/// wall time and per-file hashes.
void write_manifest(const std::filesystem::path& dir, const std::string& task, const RunConfig& cfg,
                    double wall_seconds, const std::vector<std::string>& files);

struct FileCheck {
    std::string file;
    bool identical = false;
};

struct Reproduction {
    std::string task;
    std::vector<FileCheck> files;
    bool identical() const;
};

/// Reruns the task recorded in dir/manifest.json and byte-compares payloads.
Reproduction reproduce(const std::filesystem::path& dir, unsigned threads);

const char* tool_version();

} // namespace blockclt
