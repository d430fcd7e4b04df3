#include "cechlab/experiments.hpp"

#include "cechlab/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace cechlab {

// Statistics ---------------------------------------------------------------

void RunningMoments::push(double x) {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double term1 = delta * dn * n1;
    mean_ += dn;
    m4_ += term1 * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * m2_ - 4 * dn * m3_;
    m3_ += term1 * dn * (n - 2) - 3 * dn * m2_;
    m2_ += term1;
}

double RunningMoments::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningMoments::skewness() const {
    if (n_ < 2 || m2_ <= 0) return 0.0;
    return std::sqrt(static_cast<double>(n_)) * m3_ / std::pow(m2_, 1.5);
}

double RunningMoments::excess_kurtosis() const {
    if (n_ < 2 || m2_ <= 0) return 0.0;
    return static_cast<double>(n_) * m4_ / (m2_ * m2_) - 3.0;
}

double RunningMoments::std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

double RunningMoments::variance_std_error() const {
    if (n_ < 4) return 0.0;
    const double n = static_cast<double>(n_);
    const double mu4 = m4_ / n;
    const double s2 = variance();
    return std::sqrt(std::max(0.0, (mu4 - s2 * s2 * (n - 3) / (n - 1)) / n));
}

MomentSummary summarize(const RunningMoments& m) {
    return {m.count(), m.mean(), m.variance(), m.skewness(), m.excess_kurtosis()};
}

MomentSummary summarize_offline(std::span<const double> values) {
    MomentSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : values) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    s.variance = values.size() > 1 ? m2 / (n - 1) : 0.0;
    if (values.size() > 1 && m2 > 0) {
        s.skewness = std::sqrt(n) * m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = n * m4 / (m2 * m2) - 3.0;
    }
    return s;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_distance(std::span<const double> values, bool integer_correction) {
    if (values.size() < 2) return 0.0;
    const auto m = summarize_offline(values);
    const double sd = std::sqrt(m.variance);
    if (sd <= 0) return 1.0;
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        const double below = static_cast<double>(i) / n, upto = static_cast<double>(j) / n;
        if (integer_correction) {
            d = std::max(d, std::abs(upto - normal_cdf((v[i] + 0.5 - m.mean) / sd)));
            d = std::max(d, std::abs(below - normal_cdf((v[i] - 0.5 - m.mean) / sd)));
        } else {
            const double f = normal_cdf((v[i] - m.mean) / sd);
            d = std::max({d, std::abs(upto - f), std::abs(below - f)});
        }
        i = j;
    }
    return d;
}

double tail_frequency(std::span<const double> values, double mean, double threshold) {
    if (values.empty()) return 0.0;
    std::size_t hits = 0;
    for (double v : values) hits += std::abs(v - mean) >= threshold;
    return static_cast<double>(hits) / static_cast<double>(values.size());
}

double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

GaussianCalibration calibrate_gaussian(std::size_t sample_size, std::size_t trials, double skew_threshold,
                                       double kurtosis_threshold, std::uint64_t seed) {
    GaussianCalibration c;
    c.sample_size = sample_size;
    c.trials = trials;
    c.skew_threshold = skew_threshold;
    c.kurtosis_threshold = kurtosis_threshold;
    std::size_t ks = 0, sk = 0, ku = 0;
    std::vector<double> x(sample_size);
    for (std::size_t t = 0; t < trials; ++t) {
        auto rng = make_rng(seed, "gaussian-calibration", t);
        std::normal_distribution<double> g;
        RunningMoments m;
        for (auto& v : x) {
            v = g(rng);
            m.push(v);
        }
        ks += ks_distance(x) >= ks_critical_1pct(sample_size);
        sk += std::abs(m.skewness()) >= skew_threshold;
        ku += std::abs(m.excess_kurtosis()) >= kurtosis_threshold;
    }
    const double n = static_cast<double>(std::max<std::size_t>(trials, 1));
    c.ks_rate = static_cast<double>(ks) / n;
    c.skew_rate = static_cast<double>(sk) / n;
    c.kurtosis_rate = static_cast<double>(ku) / n;
    return c;
}

// Configuration ------------------------------------------------------------

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::strong_law, "strong_law"},
    {ExperimentKind::simplex_law, "simplex_law"},
    {ExperimentKind::variance_scaling, "variance_scaling"},
    {ExperimentKind::clt, "clt"},
    {ExperimentKind::concentration, "concentration"},
    {ExperimentKind::coupling, "coupling"},
    {ExperimentKind::dpp_concentration, "dpp_concentration"},
    {ExperimentKind::duality_audit, "duality_audit"},
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& s, std::size_t line) {
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(line, "expected a number, got '" + s + "'");
    return v;
}

std::int64_t to_int(const std::string& s, std::size_t line) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(line, "expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t to_uint(const std::string& s, std::size_t line) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError(line, "expected a nonnegative integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& s, std::size_t line) {
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError(line, "expected true or false, got '" + s + "'");
}

std::vector<std::string_view> allowed_processes(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::strong_law:
        case ExperimentKind::simplex_law:
        case ExperimentKind::duality_audit: return {"poisson"};
        case ExperimentKind::variance_scaling:
        case ExperimentKind::concentration: return {"poisson", "binomial"};
        case ExperimentKind::clt: return {"poisson", "extended_binomial"};
        case ExperimentKind::coupling: return {"coupled"};
        case ExperimentKind::dpp_concentration: return {"ginibre", "poisson"};
    }
    return {};
}

}  // namespace

std::string_view kind_name(ExperimentKind k) {
    for (const auto& [kind, name] : kKinds)
        if (kind == k) return name;
    return "unknown";
}

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

int ExperimentConfig::k_max() const { return ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end()); }

std::string config_hash(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    cfg.source = std::string(text);
    cfg.hash = config_hash(text);
    std::map<std::string, std::size_t> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::size_t kind_line = 0, process_line = 0;
    bool have_kind = false, have_processes = false, have_thermo = false;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "missing key");
        if (value.empty()) throw ConfigError(line_no, "missing value for '" + key + "'");
        if (seen.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
        seen[key] = line_no;

        if (key == "experiment") {
            bool found = false;
            for (const auto& [kind, name] : kKinds)
                if (name == value) {
                    cfg.kind = kind;
                    found = true;
                }
            if (!found) throw ConfigError(line_no, "unknown experiment kind '" + value + "'");
            have_kind = true;
            kind_line = line_no;
        } else if (key == "name") {
            cfg.name = value;
        } else if (key == "dim") {
            const auto d = to_int(value, line_no);
            if (d < 1 || d > 3) throw ConfigError(line_no, "dim must be 1, 2 or 3");
            cfg.dim = static_cast<int>(d);
        } else if (key == "process") {
            cfg.processes = split_list(value);
            have_processes = true;
            process_line = line_no;
        } else if (key == "intensity") {
            cfg.intensity = to_double(value, line_no);
            if (!(cfg.intensity > 0)) throw ConfigError(line_no, "intensity must be positive");
        } else if (key == "radius") {
            cfg.radius = to_double(value, line_no);
            if (!(cfg.radius > 0)) throw ConfigError(line_no, "radius must be positive");
        } else if (key == "thermodynamic") {
            cfg.thermodynamic = to_bool(value, line_no);
            have_thermo = true;
        } else if (key == "grid") {
            for (const auto& item : split_list(value)) cfg.grid.push_back(to_double(item, line_no));
            if (cfg.grid.empty()) throw ConfigError(line_no, "empty grid");
            for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
                if (!(cfg.grid[i] > 0)) throw ConfigError(line_no, "grid values must be positive");
                if (i > 0 && !(cfg.grid[i] > cfg.grid[i - 1]))
                    throw ConfigError(line_no, "grid must be strictly increasing");
            }
        } else if (key == "k") {
            for (const auto& item : split_list(value)) {
                const auto k = to_int(item, line_no);
                if (k < 0 || k > 3) throw ConfigError(line_no, "k must be in 0..3");
                cfg.ks.push_back(static_cast<int>(k));
            }
        } else if (key == "replications") {
            cfg.replications = static_cast<std::size_t>(to_uint(value, line_no));
            if (cfg.replications < 2) throw ConfigError(line_no, "replications must be at least 2");
        } else if (key == "seed") {
            cfg.seed = to_uint(value, line_no);
        } else if (key == "field") {
            cfg.field = static_cast<std::uint32_t>(to_uint(value, line_no));
            try {
                FieldSpec{cfg.field}.validate();
            } catch (const std::exception& e) {
                throw ConfigError(line_no, e.what());
            }
        } else if (key == "thresholds") {
            for (const auto& item : split_list(value)) {
                cfg.thresholds.push_back(to_double(item, line_no));
                if (!(cfg.thresholds.back() > 0)) throw ConfigError(line_no, "thresholds must be positive");
            }
        } else if (key == "exponent") {
            cfg.exponent = to_double(value, line_no);
        } else if (key == "window") {
            if (value != "cube" && value != "ball") throw ConfigError(line_no, "window must be cube or ball");
            cfg.window = value;
        } else if (key == "resolution") {
            cfg.resolution = to_double(value, line_no);
            if (cfg.resolution < 8) throw ConfigError(line_no, "resolution must be at least 8 cells per radius");
        } else {
            throw ConfigError(line_no, "unknown key '" + key + "'");
        }
        if (end == text.size()) break;
    }

    if (!have_kind) throw ConfigError(line_no, "missing required key 'experiment'");
    for (const char* req : {"grid", "replications", "seed"})
        if (!seen.count(req)) throw ConfigError(line_no, std::string("missing required key '") + req + "'");
    if (cfg.ks.empty()) {
        if (cfg.kind != ExperimentKind::duality_audit && cfg.kind != ExperimentKind::dpp_concentration)
            throw ConfigError(line_no, "missing required key 'k'");
        cfg.ks = {cfg.kind == ExperimentKind::duality_audit ? 1 : 0};
    }
    const auto allowed = allowed_processes(cfg.kind);
    if (!have_processes) cfg.processes = {std::string(allowed.front())};
    if (cfg.kind == ExperimentKind::dpp_concentration && !have_processes) cfg.processes = {"ginibre", "poisson"};
    for (const auto& p : cfg.processes)
        if (std::find(allowed.begin(), allowed.end(), p) == allowed.end())
            throw ConfigError(process_line, "process '" + p + "' is not valid for " + std::string(kind_name(cfg.kind)));
    std::set<std::string> uniq(cfg.processes.begin(), cfg.processes.end());
    if (uniq.size() != cfg.processes.size()) throw ConfigError(process_line, "duplicate process");

    const bool needs_thermo = cfg.kind == ExperimentKind::variance_scaling ||
                              cfg.kind == ExperimentKind::concentration || cfg.kind == ExperimentKind::coupling;
    if (needs_thermo) {
        if (have_thermo && !cfg.thermodynamic)
            throw ConfigError(seen["thermodynamic"], std::string(kind_name(cfg.kind)) + " requires thermodynamic = true");
        cfg.thermodynamic = true;
    } else if (cfg.thermodynamic) {
        throw ConfigError(seen["thermodynamic"], std::string(kind_name(cfg.kind)) + " uses a fixed radius");
    }
    if (cfg.thermodynamic || cfg.kind == ExperimentKind::clt)
        for (double n : cfg.grid)
            if (n != std::floor(n)) throw ConfigError(seen["grid"], "grid values must be integers for this experiment");
    if ((cfg.kind == ExperimentKind::dpp_concentration || cfg.kind == ExperimentKind::duality_audit) && cfg.dim != 2)
        throw ConfigError(seen.count("dim") ? seen["dim"] : kind_line, std::string(kind_name(cfg.kind)) + " requires dim = 2");
    if (cfg.kind == ExperimentKind::duality_audit && (cfg.ks.size() != 1 || cfg.ks[0] != cfg.dim - 1))
        throw ConfigError(seen.count("k") ? seen["k"] : kind_line, "duality_audit compares beta_{d-1} only");
    if (cfg.kind == ExperimentKind::dpp_concentration && (cfg.ks.size() != 1 || cfg.ks[0] != 0))
        throw ConfigError(seen.count("k") ? seen["k"] : kind_line, "dpp_concentration studies beta_0 only");
    if ((cfg.kind == ExperimentKind::concentration || cfg.kind == ExperimentKind::dpp_concentration) &&
        cfg.thresholds.empty())
        throw ConfigError(line_no, "missing required key 'thresholds'");
    if (cfg.name.empty()) cfg.name = std::string(kind_name(cfg.kind));
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace cechlab
