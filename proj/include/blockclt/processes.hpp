#pragma once

// Sample-path generators: IID/AR/MA baselines and three functional
// processes X_t = sum_{s=1}^{I} k_s(W_{t+s-1}) driven by position-wise
// innovations W_p (forward indexing; drivers are generated I - 1 positions
// past the end of the path).

#include "blockclt/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockclt {

enum class ProcessKind {
    iid_normal,
    iid_uniform,
    ar1,
    ma,
    sin_functional,
    legendre_functional,
    kernel_functional,
    external,
};

/// Frequency of the sine functional: sin(2^s x) or sin(2 s x).
enum class SinFrequency { power_of_two, linear };

/// Kernel of the kernel functional.
/// gauss_cosine: s^-3 (exp(-s d^2) cos(2^s d) - c_s), d = Y - Z, with c_s the
///               exact mean so each term is centered.
/// harmonic_half: s^-1/2 Z, a non-summable fixture whose partial kernel sums
///                grow with s.
enum class KernelId { gauss_cosine, harmonic_half };

inline constexpr int kMaxLegendreDegree = 16;

struct ProcessSpec {
    ProcessKind kind = ProcessKind::iid_normal;
    double phi = 0.0;                   // ar1 coefficient
    std::vector<double> ma;             // theta_1..theta_q (theta_0 = 1)
    int i_max = 10;                     // functional truncation I
    double sin_m = 0.0;                 // sine normalizer M; 0 means sum_{s<=I} s^-3
    SinFrequency sin_frequency = SinFrequency::power_of_two;
    KernelId kernel = KernelId::gauss_cosine;
    double driver_phi = 0.5;            // Gaussian AR(1) driver, unit marginal variance

    static ProcessSpec iid_normal();
    static ProcessSpec iid_uniform();
    static ProcessSpec ar1(double phi);
    static ProcessSpec moving_average(std::vector<double> theta);
    static ProcessSpec sin_functional(int i_max, double m = 0.0,
                                      SinFrequency frequency = SinFrequency::power_of_two);
    static ProcessSpec legendre_functional(int i_max, double driver_phi = 0.5);
    static ProcessSpec kernel_functional(KernelId kernel, int i_max, double driver_phi = 0.5);
    static ProcessSpec external();

    /// Throws ErrorKind::domain on invalid parameters.
    void validate() const;
    bool is_functional() const noexcept;
    std::string name() const;
    /// Effective sine normalizer M.
    double sin_normalizer() const;
    /// Functional truncation length (1 for non-functional kinds).
    int terms() const noexcept { return is_functional() ? i_max : 1; }
};

std::string to_string(ProcessKind kind);
ProcessKind parse_process_kind(const std::string& name);

/// Analytic bound on |X_t|, if the process is bounded.
std::optional<double> path_bound(const ProcessSpec& spec);

/// Exact autocovariance-based sigma(u) = sd(X_1 + ... + X_u) when a closed
/// form exists (iid, AR(1), MA(q)).
std::optional<double> exact_sigma(const ProcessSpec& spec, std::int64_t u);

/// Generates paths one at a time, reusing scratch buffers. Path i of seed s
/// is a pure function of (spec, s, i); shorter paths are prefixes of longer ones.
class PathGenerator {
public:
    PathGenerator(ProcessSpec spec, std::uint64_t seed);

    void fill(std::uint64_t path_index, std::span<double> out);

    /// Kernel terms of the last functional path: term(p, s) is the
    /// contribution k_s(W_p) of position p (0-based) for s = 1..I.
    double term(std::size_t p, int s) const { return terms_[p * static_cast<std::size_t>(spec_.i_max) + (s - 1)]; }
    std::size_t positions() const noexcept { return positions_; }

    const ProcessSpec& spec() const noexcept { return spec_; }

private:
    void fill_functional(std::uint64_t path_index, std::span<double> out);

    ProcessSpec spec_;
    std::uint64_t seed_;
    double sin_scale_ = 1.0;
    std::vector<double> centering_;
    std::vector<double> scratch_;
    std::vector<double> terms_;
    std::size_t positions_ = 0;
};

/// Materialized batch of sample paths, row-major.
class PathBatch {
public:
    PathBatch(ProcessSpec spec, std::size_t n_paths, std::size_t path_length, std::uint64_t seed,
              std::vector<double> values, std::uint64_t first_index = 0);

    const ProcessSpec& spec() const noexcept { return spec_; }
    std::size_t n_paths() const noexcept { return n_paths_; }
    std::size_t path_length() const noexcept { return length_; }
    std::uint64_t seed() const noexcept { return seed_; }
    /// Path i was generated with derive_stream(seed, first_index + i).
    std::uint64_t first_index() const noexcept { return first_index_; }

    std::span<const double> path(std::size_t i) const;
    std::span<const double> values() const noexcept { return values_; }

    void set_sigma(std::int64_t u, double sigma) { sigmas_[u] = sigma; }
    std::optional<double> sigma(std::int64_t u) const;

private:
    ProcessSpec spec_;
    std::size_t n_paths_;
    std::size_t length_;
    std::uint64_t seed_;
    std::uint64_t first_index_;
    std::vector<double> values_;
    std::map<std::int64_t, double> sigmas_;
};

PathBatch generate_paths(const ProcessSpec& spec, std::size_t path_length, std::size_t n_paths,
                         std::uint64_t seed, unsigned threads = 1);

/// Empirical sd of X_1 + ... + X_u over `paths` independent pilot paths.
double pilot_sigma(const ProcessSpec& spec, std::int64_t u, std::uint64_t seed, std::size_t paths,
                   unsigned threads = 1);

/// Exact sigma(u) when available, otherwise a pilot estimate.
double sigma_for(const ProcessSpec& spec, std::int64_t u, std::uint64_t seed, std::size_t pilot_paths,
                 unsigned threads = 1);

enum class CoefficientFamily { inverse_cube, inverse_three_halves_squared };

/// Smallest I whose analytic tail bound 1 / (2 I^2) is at most `tol`.
int truncate_series(CoefficientFamily family, double tol);

/// Monic orthogonal polynomial of degree i for the uniform weight on [-1, 1].
double monic_legendre(int i, double x);

/// E{L_i(U) U^j} for U uniform on [-1, 1] by `order`-point Gauss-Legendre
/// quadrature; requires order >= ceil((i + j + 1) / 2).
double legendre_orthogonality_check(int i, int j, int order);

struct FunctionalSplit {
    std::vector<double> m;      // terms whose time and position indices lie in 1..n
    std::vector<double> r;      // boundary-crossing terms
    std::vector<double> total;  // S_n from the stored path
};

FunctionalSplit functional_split(const PathBatch& batch, std::size_t n, double sigma_n);

/// Reads a single-column CSV of finite reals (optional header line).
PathBatch load_series(const std::filesystem::path& file);

} // namespace blockclt
