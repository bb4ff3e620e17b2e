#pragma once

// Run configuration: INI-style sections [experiment], [coeffs], [diagnose],
// [audit] and [output]. Unknown sections or keys are errors.

#include "blockclt/processes.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace blockclt {

struct ExperimentConfig {
    ProcessSpec process;
    std::string tau = "sqrt";
    std::vector<std::int64_t> n{1024};
    std::size_t paths = 20000;
    std::size_t pilot_paths = 10000;
    std::uint64_t seed = 1;
    std::vector<int> k{1};
    int h = 1;
    std::string series;      // external CSV; empty for generated paths
    std::int64_t stride = 0; // sliding-window stride for series; 0 means u + t
};

struct CoeffsConfig {
    std::vector<std::int64_t> lags{0, 3};
    int moment_degree = 4;
    int restarts = 32;
    int null_replicates = 32;
};

struct DiagnoseConfig {
    std::vector<double> t{0.5, 1.0, 2.0};
    int max_degree = 4;
    std::vector<double> thresholds{1.0, 2.0, 3.0, 4.0};
    double lindeberg_d = 2.0;
    double epsilon = 1.0;
    double epsilon_decay = 0.0;  // epsilon(n) = epsilon (n / n_min)^-decay
};

struct AuditSectionConfig {
    std::vector<std::string> ids{"V2", "V3", "V4", "V5", "V6", "V7", "V8", "V9", "V10"};
    std::vector<double> t{0.0, 0.5, 1.0, 2.0};
    int null_replicates = 0;
    std::vector<std::int64_t> p42_grid{64, 256, 1024};
    std::size_t p42_paths = 4000;
};

struct OutputConfig {
    std::string dir = "out";
};

struct RunConfig {
    ExperimentConfig experiment;
    CoeffsConfig coeffs;
    DiagnoseConfig diagnose;
    AuditSectionConfig audit;
    OutputConfig output;

    /// Throws ErrorKind::config on invalid combinations.
    void validate() const;
    /// Every effective setting in a fixed order; parsing it yields an equal config.
    std::string canonical() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& file);

std::vector<std::int64_t> parse_int_list(const std::string& text);
std::vector<double> parse_real_list(const std::string& text);
std::vector<std::string> parse_word_list(const std::string& text);

/// Shortest round-trip decimal form.
std::string format_real(double x);

} // namespace blockclt
