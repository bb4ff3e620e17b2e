#include "blockclt/processes.hpp"

#include "blockclt/error.hpp"
#include "blockclt/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string_view>

namespace blockclt {

namespace {

constexpr std::uint64_t kMainStream = 0;
constexpr std::uint64_t kDriverStream = 1;
constexpr std::uint64_t kUniformStream = 2;
constexpr std::uint64_t kPilotTag = 0x70696c6f74ULL;

bool is_finite_unit(double phi) { return std::isfinite(phi) && std::abs(phi) < 1.0; }

double kernel_frequency(int s) { return std::ldexp(1.0, s); }

// Mean of exp(-s d^2) cos(w d) for d ~ N(0, 2).
double gauss_cosine_mean(int s) {
    const double a = 1.0 + 4.0 * s;
    const double w = kernel_frequency(s);
    return std::exp(-w * w / a) / std::sqrt(a);
}

// Monic Legendre values L_0..L_deg at x.
void monic_legendre_all(int deg, double x, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(deg) + 1);
    out[0] = 1.0;
    if (deg >= 1) out[1] = x;
    for (int k = 1; k < deg; ++k) {
        const double beta = static_cast<double>(k) * k / (4.0 * k * k - 1.0);
        out[k + 1] = x * out[k] - beta * out[k - 1];
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_real(std::string_view s, double& value) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

ProcessSpec ProcessSpec::iid_normal() { return ProcessSpec{}; }

ProcessSpec ProcessSpec::iid_uniform() {
    ProcessSpec s;
    s.kind = ProcessKind::iid_uniform;
    return s;
}

ProcessSpec ProcessSpec::ar1(double phi) {
    ProcessSpec s;
    s.kind = ProcessKind::ar1;
    s.phi = phi;
    return s;
}

ProcessSpec ProcessSpec::moving_average(std::vector<double> theta) {
    ProcessSpec s;
    s.kind = ProcessKind::ma;
    s.ma = std::move(theta);
    return s;
}

ProcessSpec ProcessSpec::sin_functional(int i_max, double m, SinFrequency frequency) {
    ProcessSpec s;
    s.kind = ProcessKind::sin_functional;
    s.i_max = i_max;
    s.sin_m = m;
    s.sin_frequency = frequency;
    return s;
}

ProcessSpec ProcessSpec::legendre_functional(int i_max, double driver_phi) {
    ProcessSpec s;
    s.kind = ProcessKind::legendre_functional;
    s.i_max = i_max;
    s.driver_phi = driver_phi;
    return s;
}

ProcessSpec ProcessSpec::kernel_functional(KernelId kernel, int i_max, double driver_phi) {
    ProcessSpec s;
    s.kind = ProcessKind::kernel_functional;
    s.kernel = kernel;
    s.i_max = i_max;
    s.driver_phi = driver_phi;
    return s;
}

ProcessSpec ProcessSpec::external() {
    ProcessSpec s;
    s.kind = ProcessKind::external;
    return s;
}

bool ProcessSpec::is_functional() const noexcept {
    return kind == ProcessKind::sin_functional || kind == ProcessKind::legendre_functional ||
           kind == ProcessKind::kernel_functional;
}

void ProcessSpec::validate() const {
    switch (kind) {
    case ProcessKind::ar1:
        if (!is_finite_unit(phi)) fail(ErrorKind::domain, "ar1 requires |phi| < 1");
        break;
    case ProcessKind::ma:
        if (ma.empty()) fail(ErrorKind::domain, "ma requires at least one coefficient");
        for (const double th : ma)
            if (!std::isfinite(th)) fail(ErrorKind::domain, "ma coefficients must be finite");
        break;
    default:
        break;
    }
    if (is_functional()) {
        if (i_max < 1) fail(ErrorKind::domain, "functional processes require i_max >= 1");
        if (kind == ProcessKind::sin_functional && (!std::isfinite(sin_m) || sin_m < 0.0))
            fail(ErrorKind::domain, "sine normalizer M must be positive (0 selects the default)");
        if (kind == ProcessKind::legendre_functional && 2 * i_max > kMaxLegendreDegree)
            fail(ErrorKind::domain, "legendre functional needs 2 * i_max <= " + std::to_string(kMaxLegendreDegree));
        if (kind != ProcessKind::sin_functional && !is_finite_unit(driver_phi))
            fail(ErrorKind::domain, "driver requires |phi| < 1");
    }
}

std::string to_string(ProcessKind kind) {
    switch (kind) {
    case ProcessKind::iid_normal: return "iid-normal";
    case ProcessKind::iid_uniform: return "iid-uniform";
    case ProcessKind::ar1: return "ar1";
    case ProcessKind::ma: return "ma";
    case ProcessKind::sin_functional: return "sin-functional";
    case ProcessKind::legendre_functional: return "legendre-functional";
    case ProcessKind::kernel_functional: return "kernel-functional";
    case ProcessKind::external: return "external";
    }
    return "unknown";
}

ProcessKind parse_process_kind(const std::string& name) {
    for (const auto k : {ProcessKind::iid_normal, ProcessKind::iid_uniform, ProcessKind::ar1, ProcessKind::ma,
                         ProcessKind::sin_functional, ProcessKind::legendre_functional,
                         ProcessKind::kernel_functional, ProcessKind::external})
        if (to_string(k) == name) return k;
    fail(ErrorKind::config, "unknown process '" + name + "'");
}

std::string ProcessSpec::name() const { return to_string(kind); }

double ProcessSpec::sin_normalizer() const {
    if (sin_m > 0.0) return sin_m;
    double m = 0.0;
    for (int s = 1; s <= std::max(1, i_max); ++s) m += std::pow(s, -3.0);
    return m;
}

std::optional<double> path_bound(const ProcessSpec& spec) {
    double bound = 0.0;
    switch (spec.kind) {
    case ProcessKind::iid_uniform:
        return 1.0;
    case ProcessKind::sin_functional:
        for (int s = 1; s <= spec.i_max; ++s) bound += std::pow(s, -3.0);
        return bound / spec.sin_normalizer();
    case ProcessKind::legendre_functional: {
        std::vector<double> at_one;
        monic_legendre_all(2 * spec.i_max, 1.0, at_one);
        for (int s = 1; s <= spec.i_max; ++s) bound += std::pow(s, -1.5) * at_one[2 * s];
        return bound;
    }
    case ProcessKind::kernel_functional:
        if (spec.kernel != KernelId::gauss_cosine) return std::nullopt;
        for (int s = 1; s <= spec.i_max; ++s) bound += std::pow(s, -3.0) * (1.0 + gauss_cosine_mean(s));
        return bound;
    default:
        return std::nullopt;
    }
}

std::optional<double> exact_sigma(const ProcessSpec& spec, std::int64_t u) {
    if (u < 1) fail(ErrorKind::domain, "sigma(u) requires u >= 1");
    const double du = static_cast<double>(u);
    switch (spec.kind) {
    case ProcessKind::iid_normal:
        return std::sqrt(du);
    case ProcessKind::iid_uniform:
        return std::sqrt(du / 3.0);
    case ProcessKind::ar1: {
        // Unit innovations: gamma_h = phi^h / (1 - phi^2).
        const double phi = spec.phi;
        const double g0 = 1.0 / (1.0 - phi * phi);
        double var = du * g0;
        double ph = 1.0;
        for (std::int64_t h = 1; h < u; ++h) {
            ph *= phi;
            if (std::abs(ph) < 1e-300) break;
            var += 2.0 * static_cast<double>(u - h) * ph * g0;
        }
        return std::sqrt(var);
    }
    case ProcessKind::ma: {
        std::vector<double> theta{1.0};
        theta.insert(theta.end(), spec.ma.begin(), spec.ma.end());
        const auto q = static_cast<std::int64_t>(spec.ma.size());
        double var = 0.0;
        for (std::int64_t h = 0; h <= q && h < u; ++h) {
            double gamma = 0.0;
            for (std::int64_t j = 0; j + h <= q; ++j) gamma += theta[j] * theta[j + h];
            var += (h == 0 ? du : 2.0 * static_cast<double>(u - h)) * gamma;
        }
        return std::sqrt(var);
    }
    default:
        return std::nullopt;
    }
}

PathGenerator::PathGenerator(ProcessSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    spec_.validate();
    if (spec_.kind == ProcessKind::external) fail(ErrorKind::unsupported, "external series cannot be generated");
    if (spec_.kind == ProcessKind::sin_functional) sin_scale_ = 1.0 / spec_.sin_normalizer();
    if (spec_.kind == ProcessKind::kernel_functional && spec_.kernel == KernelId::gauss_cosine) {
        centering_.resize(static_cast<std::size_t>(spec_.i_max));
        for (int s = 1; s <= spec_.i_max; ++s) centering_[s - 1] = gauss_cosine_mean(s);
    }
}

void PathGenerator::fill(std::uint64_t path_index, std::span<double> out) {
    if (spec_.is_functional()) {
        fill_functional(path_index, out);
        return;
    }
    Stream rng = derive_stream(seed_, path_index, kMainStream);
    const std::size_t n = out.size();
    switch (spec_.kind) {
    case ProcessKind::iid_normal:
        for (auto& x : out) x = rng.normal();
        break;
    case ProcessKind::iid_uniform:
        for (auto& x : out) x = rng.uniform(-1.0, 1.0);
        break;
    case ProcessKind::ar1: {
        if (n == 0) break;
        const double phi = spec_.phi;
        out[0] = rng.normal() / std::sqrt(1.0 - phi * phi);
        for (std::size_t t = 1; t < n; ++t) out[t] = phi * out[t - 1] + rng.normal();
        break;
    }
    case ProcessKind::ma: {
        const std::size_t q = spec_.ma.size();
        scratch_.resize(n + q);
        for (auto& e : scratch_) e = rng.normal();
        for (std::size_t t = 0; t < n; ++t) {
            double x = scratch_[t + q];
            for (std::size_t j = 1; j <= q; ++j) x += spec_.ma[j - 1] * scratch_[t + q - j];
            out[t] = x;
        }
        break;
    }
    default:
        break;
    }
}

void PathGenerator::fill_functional(std::uint64_t path_index, std::span<double> out) {
    const auto I = static_cast<std::size_t>(spec_.i_max);
    const std::size_t n = out.size();
    positions_ = n == 0 ? 0 : n + I - 1;
    terms_.assign(positions_ * I, 0.0);
    Stream z = derive_stream(seed_, path_index, kMainStream);

    switch (spec_.kind) {
    case ProcessKind::sin_functional:
        for (std::size_t p = 0; p < positions_; ++p) {
            const double w = z.normal();
            for (int s = 1; s <= spec_.i_max; ++s) {
                const double freq = spec_.sin_frequency == SinFrequency::power_of_two ? std::ldexp(1.0, s) : 2.0 * s;
                terms_[p * I + (s - 1)] = sin_scale_ * std::pow(s, -3.0) * std::sin(freq * w);
            }
        }
        break;
    case ProcessKind::legendre_functional: {
        Stream drv = derive_stream(seed_, path_index, kDriverStream);
        Stream uni = derive_stream(seed_, path_index, kUniformStream);
        const double phi = spec_.driver_phi;
        const double innov = std::sqrt(1.0 - phi * phi);
        double y = 0.0;
        for (std::size_t p = 0; p < positions_; ++p) {
            y = p == 0 ? drv.normal() : phi * y + innov * drv.normal();
            const double u = uni.uniform(-1.0, 1.0);
            monic_legendre_all(2 * spec_.i_max, std::tanh(y), scratch_);
            for (int s = 1; s <= spec_.i_max; ++s) terms_[p * I + (s - 1)] = std::pow(s, -1.5) * scratch_[2 * s] * u;
        }
        break;
    }
    case ProcessKind::kernel_functional: {
        if (spec_.kernel == KernelId::harmonic_half) {
            for (std::size_t p = 0; p < positions_; ++p) {
                const double w = z.normal();
                for (int s = 1; s <= spec_.i_max; ++s) terms_[p * I + (s - 1)] = w / std::sqrt(static_cast<double>(s));
            }
            break;
        }
        Stream drv = derive_stream(seed_, path_index, kDriverStream);
        const double phi = spec_.driver_phi;
        const double innov = std::sqrt(1.0 - phi * phi);
        double y = 0.0;
        for (std::size_t p = 0; p < positions_; ++p) {
            y = p == 0 ? drv.normal() : phi * y + innov * drv.normal();
            const double d = y - z.normal();
            for (int s = 1; s <= spec_.i_max; ++s) {
                const double k = std::exp(-s * d * d) * std::cos(kernel_frequency(s) * d) - centering_[s - 1];
                terms_[p * I + (s - 1)] = std::pow(s, -3.0) * k;
            }
        }
        break;
    }
    default:
        break;
    }

    for (std::size_t t = 0; t < n; ++t) {
        double x = 0.0;
        for (std::size_t s = 1; s <= I; ++s) x += terms_[(t + s - 1) * I + (s - 1)];
        out[t] = x;
    }
}

PathBatch::PathBatch(ProcessSpec spec, std::size_t n_paths, std::size_t path_length, std::uint64_t seed,
                     std::vector<double> values, std::uint64_t first_index)
    : spec_(std::move(spec)), n_paths_(n_paths), length_(path_length), seed_(seed), first_index_(first_index),
      values_(std::move(values)) {
    if (values_.size() != n_paths_ * length_) fail(ErrorKind::shape, "path batch values do not match its shape");
}

std::span<const double> PathBatch::path(std::size_t i) const {
    if (i >= n_paths_) fail(ErrorKind::out_of_range, "path index out of range");
    return std::span<const double>(values_).subspan(i * length_, length_);
}

std::optional<double> PathBatch::sigma(std::int64_t u) const {
    const auto it = sigmas_.find(u);
    if (it == sigmas_.end()) return std::nullopt;
    return it->second;
}

PathBatch generate_paths(const ProcessSpec& spec, std::size_t path_length, std::size_t n_paths, std::uint64_t seed,
                         unsigned threads) {
    spec.validate();
    if (path_length < 1 || n_paths < 1) fail(ErrorKind::domain, "generate_paths requires n >= 1 and p >= 1");
    if (spec.kind == ProcessKind::external) fail(ErrorKind::unsupported, "external series cannot be generated");
    std::vector<double> values(n_paths * path_length);
    parallel_chunks(n_paths, threads, [&](std::size_t begin, std::size_t end) {
        PathGenerator gen(spec, seed);
        for (std::size_t i = begin; i < end; ++i)
            gen.fill(i, std::span<double>(values).subspan(i * path_length, path_length));
    });
    return PathBatch(spec, n_paths, path_length, seed, std::move(values));
}

double pilot_sigma(const ProcessSpec& spec, std::int64_t u, std::uint64_t seed, std::size_t paths,
                   unsigned threads) {
    if (u < 1) fail(ErrorKind::domain, "sigma(u) requires u >= 1");
    if (paths < 2) fail(ErrorKind::insufficient_data, "pilot batch needs at least 2 paths");
    const auto len = static_cast<std::size_t>(u);
    std::vector<double> sums(paths);
    parallel_chunks(paths, threads, [&](std::size_t begin, std::size_t end) {
        PathGenerator gen(spec, seed);
        std::vector<double> buf(len);
        for (std::size_t i = begin; i < end; ++i) {
            gen.fill(i, buf);
            ExactSum s;
            for (const double x : buf) s.add(x);
            sums[i] = s.value();
        }
    });
    const Estimate mean = mean_estimate(sums);
    return mean.std_error * std::sqrt(static_cast<double>(paths));
}

double sigma_for(const ProcessSpec& spec, std::int64_t u, std::uint64_t seed, std::size_t pilot_paths,
                 unsigned threads) {
    if (const auto exact = exact_sigma(spec, u)) return *exact;
    return pilot_sigma(spec, u, derive_seed(seed, kPilotTag + static_cast<std::uint64_t>(u)), pilot_paths, threads);
}

int truncate_series(CoefficientFamily family, double tol) {
    if (!(tol > 0.0) || !std::isfinite(tol)) fail(ErrorKind::domain, "truncation tolerance must be positive");
    // Both families have tail sum_{i > I} i^-3 <= 1 / (2 I^2): directly for the
    // cube weights, and through squared weights for i^-3/2.
    (void)family;
    auto i = static_cast<int>(std::ceil(std::sqrt(1.0 / (2.0 * tol))));
    i = std::max(i, 1);
    while (i > 1 && 1.0 / (2.0 * (i - 1.0) * (i - 1.0)) <= tol) --i;
    while (1.0 / (2.0 * static_cast<double>(i) * i) > tol) ++i;
    return i;
}

double monic_legendre(int i, double x) {
    if (i < 0 || i > kMaxLegendreDegree)
        fail(ErrorKind::domain, "legendre degree must lie in [0, " + std::to_string(kMaxLegendreDegree) + "]");
    std::vector<double> values;
    monic_legendre_all(i, x, values);
    return values[static_cast<std::size_t>(i)];
}

double legendre_orthogonality_check(int i, int j, int order) {
    if (i < 0 || i > kMaxLegendreDegree || j < 0) fail(ErrorKind::domain, "degrees out of range");
    if (order < 1 || 2 * order < i + j + 1)
        fail(ErrorKind::precision, "quadrature order " + std::to_string(order) + " is not exact for degree " +
                                       std::to_string(i + j));
    // Gauss-Legendre nodes by Newton iteration on P_order.
    const int n = order;
    double total = 0.0;
    for (int k = 1; k <= n; ++k) {
        double x = std::cos(std::numbers::pi * (k - 0.25) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int m = 2; m <= n; ++m) {
                const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int m = 2; m <= n; ++m) {
            const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        total += w * monic_legendre(i, x) * std::pow(x, j);
    }
    return 0.5 * total;
}

FunctionalSplit functional_split(const PathBatch& batch, std::size_t n, double sigma_n) {
    const ProcessSpec& spec = batch.spec();
    if (!spec.is_functional()) fail(ErrorKind::unsupported, "functional_split needs a functional process");
    if (n < 1 || n > batch.path_length()) fail(ErrorKind::domain, "split length must lie in [1, path_length]");
    if (!(sigma_n > 0.0)) fail(ErrorKind::domain, "normalizer must be positive");
    const std::size_t paths = batch.n_paths();
    FunctionalSplit out{std::vector<double>(paths), std::vector<double>(paths), std::vector<double>(paths)};
    const int I = spec.i_max;
    parallel_chunks(paths, 1, [&](std::size_t begin, std::size_t end) {
        PathGenerator gen(spec, batch.seed());
        std::vector<double> buf(n);
        for (std::size_t i = begin; i < end; ++i) {
            gen.fill(batch.first_index() + i, buf);
            // Term (p, s) belongs to time t = p - s + 1; M keeps p < n.
            double m = 0.0;
            double r = 0.0;
            for (std::size_t p = 0; p < n; ++p)
                for (int s = 1; s <= std::min<int>(I, static_cast<int>(p) + 1); ++s) m += gen.term(p, s);
            for (std::size_t p = n; p < gen.positions(); ++p)
                for (int s = static_cast<int>(p - n) + 2; s <= I; ++s) r += gen.term(p, s);
            double total = 0.0;
            for (const double x : batch.path(i).first(n)) total += x;
            out.m[i] = m / sigma_n;
            out.r[i] = r / sigma_n;
            out.total[i] = total / sigma_n;
        }
    });
    return out;
}

PathBatch load_series(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorKind::ingestion, "cannot open series file " + file.string());
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    bool seen_data = false;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view field = trim(line);
        if (field.empty()) continue;
        double v = 0.0;
        if (!parse_real(field, v)) {
            if (!seen_data && row == 1) continue;  // header
            fail(ErrorKind::ingestion, "row " + std::to_string(row) + ": cannot parse '" + std::string(field) + "'");
        }
        if (!std::isfinite(v)) fail(ErrorKind::ingestion, "row " + std::to_string(row) + ": non-finite value");
        seen_data = true;
        values.push_back(v);
    }
    if (values.empty()) fail(ErrorKind::ingestion, "series file " + file.string() + " contains no data");
    const std::size_t n = values.size();
    return PathBatch(ProcessSpec::external(), 1, n, 0, std::move(values));
}

} // namespace blockclt
