#include "blockclt/config.hpp"

#include "blockclt/audit.hpp"
#include "blockclt/blockscheme.hpp"
#include "blockclt/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace blockclt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        fail(ErrorKind::config, "invalid value '" + s + "' for " + key);
    return value;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_floating_point_v<T>)
            out += format_real(v[i]);
        else if constexpr (std::is_same_v<T, std::string>)
            out += v[i];
        else
            out += std::to_string(v[i]);
    }
    return out;
}

std::string frequency_name(SinFrequency f) { return f == SinFrequency::power_of_two ? "pow2" : "linear"; }
std::string kernel_name(KernelId k) { return k == KernelId::gauss_cosine ? "gauss-cosine" : "harmonic-half"; }

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"experiment",
         {"process", "phi", "ma_coefficients", "i_max", "sin_m", "sin_frequency", "kernel", "driver_phi", "tau", "n",
          "paths", "pilot_paths", "seed", "k", "h", "series", "stride"}},
        {"coeffs", {"lags", "moment_degree", "restarts", "null_replicates"}},
        {"diagnose", {"t", "max_degree", "thresholds", "lindeberg_d", "epsilon", "epsilon_decay"}},
        {"audit", {"ids", "t", "null_replicates", "p42_grid", "p42_paths"}},
        {"output", {"dir"}},
    };
    return keys;
}

} // namespace

std::string format_real(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    for (const auto& s : split(text)) out.push_back(parse_number<std::int64_t>(s, "integer list"));
    return out;
}

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& s : split(text)) out.push_back(parse_number<double>(s, "real list"));
    return out;
}

std::vector<std::string> parse_word_list(const std::string& text) { return split(text); }

RunConfig parse_config(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(ErrorKind::config, std::string("config parse error: ") + e.what());
    }
    const auto& known = known_keys();
    for (const auto& [section, body] : tree) {
        const auto it = known.find(section);
        if (it == known.end()) fail(ErrorKind::config, "unknown config section [" + section + "]");
        if (body.empty() && !body.data().empty())
            fail(ErrorKind::config, "key '" + section + "' outside of any section");
        for (const auto& [key, value] : body) {
            (void)value;
            if (!it->second.count(key)) fail(ErrorKind::config, "unknown config key " + section + "." + key);
        }
    }

    RunConfig cfg;
    auto get = [&](const std::string& path) { return tree.get_optional<std::string>(path); };
    auto& ex = cfg.experiment;
    if (auto v = get("experiment.process")) ex.process.kind = parse_process_kind(trim(*v));
    if (auto v = get("experiment.phi")) ex.process.phi = parse_number<double>(*v, "experiment.phi");
    if (auto v = get("experiment.ma_coefficients")) ex.process.ma = parse_real_list(*v);
    if (auto v = get("experiment.i_max")) ex.process.i_max = parse_number<int>(*v, "experiment.i_max");
    if (auto v = get("experiment.sin_m")) ex.process.sin_m = parse_number<double>(*v, "experiment.sin_m");
    if (auto v = get("experiment.sin_frequency")) {
        const auto s = trim(*v);
        if (s == "pow2") ex.process.sin_frequency = SinFrequency::power_of_two;
        else if (s == "linear") ex.process.sin_frequency = SinFrequency::linear;
        else fail(ErrorKind::config, "sin_frequency must be pow2 or linear");
    }
    if (auto v = get("experiment.kernel")) {
        const auto s = trim(*v);
        if (s == "gauss-cosine") ex.process.kernel = KernelId::gauss_cosine;
        else if (s == "harmonic-half") ex.process.kernel = KernelId::harmonic_half;
        else fail(ErrorKind::config, "kernel must be gauss-cosine or harmonic-half");
    }
    if (auto v = get("experiment.driver_phi")) ex.process.driver_phi = parse_number<double>(*v, "experiment.driver_phi");
    if (auto v = get("experiment.tau")) ex.tau = trim(*v);
    if (auto v = get("experiment.n")) ex.n = parse_int_list(*v);
    if (auto v = get("experiment.paths")) ex.paths = parse_number<std::size_t>(*v, "experiment.paths");
    if (auto v = get("experiment.pilot_paths")) ex.pilot_paths = parse_number<std::size_t>(*v, "experiment.pilot_paths");
    if (auto v = get("experiment.seed")) ex.seed = parse_number<std::uint64_t>(*v, "experiment.seed");
    if (auto v = get("experiment.k")) {
        ex.k.clear();
        for (const auto x : parse_int_list(*v)) ex.k.push_back(static_cast<int>(x));
    }
    if (auto v = get("experiment.h")) ex.h = parse_number<int>(*v, "experiment.h");
    if (auto v = get("experiment.series")) ex.series = trim(*v);
    if (auto v = get("experiment.stride")) ex.stride = parse_number<std::int64_t>(*v, "experiment.stride");
    if (ex.process.kind == ProcessKind::ma && ex.process.ma.empty()) ex.process.ma = {0.8, 0.5};

    auto& co = cfg.coeffs;
    if (auto v = get("coeffs.lags")) co.lags = parse_int_list(*v);
    if (auto v = get("coeffs.moment_degree")) co.moment_degree = parse_number<int>(*v, "coeffs.moment_degree");
    if (auto v = get("coeffs.restarts")) co.restarts = parse_number<int>(*v, "coeffs.restarts");
    if (auto v = get("coeffs.null_replicates")) co.null_replicates = parse_number<int>(*v, "coeffs.null_replicates");

    auto& di = cfg.diagnose;
    if (auto v = get("diagnose.t")) di.t = parse_real_list(*v);
    if (auto v = get("diagnose.max_degree")) di.max_degree = parse_number<int>(*v, "diagnose.max_degree");
    if (auto v = get("diagnose.thresholds")) di.thresholds = parse_real_list(*v);
    if (auto v = get("diagnose.lindeberg_d")) di.lindeberg_d = parse_number<double>(*v, "diagnose.lindeberg_d");
    if (auto v = get("diagnose.epsilon")) di.epsilon = parse_number<double>(*v, "diagnose.epsilon");
    if (auto v = get("diagnose.epsilon_decay")) di.epsilon_decay = parse_number<double>(*v, "diagnose.epsilon_decay");

    auto& au = cfg.audit;
    if (auto v = get("audit.ids")) au.ids = parse_word_list(*v);
    if (auto v = get("audit.t")) au.t = parse_real_list(*v);
    if (auto v = get("audit.null_replicates")) au.null_replicates = parse_number<int>(*v, "audit.null_replicates");
    if (auto v = get("audit.p42_grid")) au.p42_grid = parse_int_list(*v);
    if (auto v = get("audit.p42_paths")) au.p42_paths = parse_number<std::size_t>(*v, "audit.p42_paths");

    if (auto v = get("output.dir")) cfg.output.dir = trim(*v);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorKind::config, "cannot open config file " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void RunConfig::validate() const {
    const auto& ex = experiment;
    if (ex.n.empty()) fail(ErrorKind::config, "experiment.n must list at least one length");
    for (std::size_t i = 0; i < ex.n.size(); ++i) {
        if (ex.n[i] < 2) fail(ErrorKind::config, "experiment.n entries must be >= 2");
        if (i > 0 && ex.n[i] <= ex.n[i - 1]) fail(ErrorKind::config, "experiment.n must be increasing");
    }
    if (ex.series.empty() && ex.paths < 100) fail(ErrorKind::config, "experiment.paths must be >= 100");
    if (ex.k.empty()) fail(ErrorKind::config, "experiment.k must list at least one level");
    for (const int k : ex.k)
        if (k < 0 || k > kMaxWindowLevel) fail(ErrorKind::config, "experiment.k entries must lie in [0, 4]");
    if (ex.h < 0 || ex.h > 10) fail(ErrorKind::config, "experiment.h must lie in [0, 10]");
    if (ex.stride < 0) fail(ErrorKind::config, "experiment.stride must be nonnegative");
    if (ex.pilot_paths < 2) fail(ErrorKind::config, "experiment.pilot_paths must be >= 2");
    try {
        (void)TauRule::parse(ex.tau);
        if (ex.series.empty()) ex.process.validate();
    } catch (const Error& e) {
        fail(ErrorKind::config, e.what());
    }
    if (ex.process.kind == ProcessKind::external && ex.series.empty())
        fail(ErrorKind::config, "process 'external' requires experiment.series");
    for (const auto lag : coeffs.lags)
        if (lag < 0) fail(ErrorKind::config, "coeffs.lags must be nonnegative");
    if (coeffs.moment_degree < 1 || coeffs.moment_degree > 8) fail(ErrorKind::config, "coeffs.moment_degree must lie in [1, 8]");
    if (coeffs.restarts < 1) fail(ErrorKind::config, "coeffs.restarts must be >= 1");
    if (coeffs.null_replicates < 0 || audit.null_replicates < 0) fail(ErrorKind::config, "null_replicates must be >= 0");
    if (diagnose.max_degree < 1 || diagnose.max_degree > 8) fail(ErrorKind::config, "diagnose.max_degree must lie in [1, 8]");
    if (!(diagnose.lindeberg_d > 0.0)) fail(ErrorKind::config, "diagnose.lindeberg_d must be positive");
    if (!(diagnose.epsilon > 0.0)) fail(ErrorKind::config, "diagnose.epsilon must be positive");
    for (std::size_t i = 0; i < diagnose.thresholds.size(); ++i)
        if (!(diagnose.thresholds[i] > 0.0) || (i > 0 && diagnose.thresholds[i] <= diagnose.thresholds[i - 1]))
            fail(ErrorKind::config, "diagnose.thresholds must be positive and increasing");
    const auto& valid = audit_ids();
    for (const auto& id : audit.ids)
        if (std::find(valid.begin(), valid.end(), id) == valid.end()) {
            std::string list;
            for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
            fail(ErrorKind::config, "unknown audit id '" + id + "' (valid: " + list + ")");
        }
    if (audit.p42_grid.size() < 2) fail(ErrorKind::config, "audit.p42_grid needs at least two sizes");
    if (output.dir.empty()) fail(ErrorKind::config, "output.dir must not be empty");
}

std::string RunConfig::canonical() const {
    const auto& ex = experiment;
    std::ostringstream o;
    o << "[experiment]\n"
      << "process = " << ex.process.name() << "\n"
      << "phi = " << format_real(ex.process.phi) << "\n"
      << "ma_coefficients = " << join(ex.process.ma) << "\n"
      << "i_max = " << ex.process.i_max << "\n"
      << "sin_m = " << format_real(ex.process.sin_m) << "\n"
      << "sin_frequency = " << frequency_name(ex.process.sin_frequency) << "\n"
      << "kernel = " << kernel_name(ex.process.kernel) << "\n"
      << "driver_phi = " << format_real(ex.process.driver_phi) << "\n"
      << "tau = " << ex.tau << "\n"
      << "n = " << join(ex.n) << "\n"
      << "paths = " << ex.paths << "\n"
      << "pilot_paths = " << ex.pilot_paths << "\n"
      << "seed = " << ex.seed << "\n"
      << "k = " << join(ex.k) << "\n"
      << "h = " << ex.h << "\n"
      << "series = " << ex.series << "\n"
      << "stride = " << ex.stride << "\n\n"
      << "[coeffs]\n"
      << "lags = " << join(coeffs.lags) << "\n"
      << "moment_degree = " << coeffs.moment_degree << "\n"
      << "restarts = " << coeffs.restarts << "\n"
      << "null_replicates = " << coeffs.null_replicates << "\n\n"
      << "[diagnose]\n"
      << "t = " << join(diagnose.t) << "\n"
      << "max_degree = " << diagnose.max_degree << "\n"
      << "thresholds = " << join(diagnose.thresholds) << "\n"
      << "lindeberg_d = " << format_real(diagnose.lindeberg_d) << "\n"
      << "epsilon = " << format_real(diagnose.epsilon) << "\n"
      << "epsilon_decay = " << format_real(diagnose.epsilon_decay) << "\n\n"
      << "[audit]\n"
      << "ids = " << join(audit.ids) << "\n"
      << "t = " << join(audit.t) << "\n"
      << "null_replicates = " << audit.null_replicates << "\n"
      << "p42_grid = " << join(audit.p42_grid) << "\n"
      << "p42_paths = " << audit.p42_paths << "\n\n"
      << "[output]\n"
      << "dir = " << output.dir << "\n";
    return o.str();
}

} // namespace blockclt
