#pragma once

#include "cechlab/homology.hpp"
#include "cechlab/point_process.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cechlab {

// Statistics ---------------------------------------------------------------

/// One-pass mean and central moments up to order four (Welford's update
/// extended to M3 and M4 by Pebay's pairwise formulas).
class RunningMoments {
public:
    void push(double x);

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    /// Unbiased sample variance.
    double variance() const;
    /// g1 = sqrt(n) M3 / M2^1.5.
    double skewness() const;
    /// g2 = n M4 / M2^2 - 3.
    double excess_kurtosis() const;
    double std_error() const;
    /// Approximate standard error of the sample variance.
    double variance_std_error() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

struct MomentSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

MomentSummary summarize(const RunningMoments& m);
/// Two-pass recomputation of the same quantities.
MomentSummary summarize_offline(std::span<const double> values);

double normal_cdf(double z);

/// Kolmogorov-Smirnov distance of the standardized sample (sample mean and
/// sample standard deviation) to the standard normal. With
/// `integer_correction`, each atom v of integer-valued data is compared
/// with the normal mass below v + 1/2.
double ks_distance(std::span<const double> values, bool integer_correction = false);

/// Fraction of values with |x - mean| >= threshold.
double tail_frequency(std::span<const double> values, double mean, double threshold);

/// Asymptotic 1% critical value 1.63 / sqrt(n).
double ks_critical_1pct(std::size_t n);

struct GaussianCalibration {
    std::size_t sample_size = 0;
    std::size_t trials = 0;
    double skew_threshold = 0.0, kurtosis_threshold = 0.0;
    /// False-failure rates on true normal samples of the same size.
    double ks_rate = 0.0, skew_rate = 0.0, kurtosis_rate = 0.0;
};

GaussianCalibration calibrate_gaussian(std::size_t sample_size, std::size_t trials, double skew_threshold,
                                       double kurtosis_threshold, std::uint64_t seed);

// Configuration ------------------------------------------------------------

enum class ExperimentKind {
    strong_law,
    simplex_law,
    variance_scaling,
    clt,
    concentration,
    coupling,
    dpp_concentration,
    duality_audit
};

std::string_view kind_name(ExperimentKind k);

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::strong_law;
    std::string name;
    int dim = 2;
    std::vector<std::string> processes;
    double intensity = 1.0;
    double radius = 1.0;
    bool thermodynamic = false;
    /// Window sides l, or point counts n.
    std::vector<double> grid;
    std::vector<int> ks;
    std::size_t replications = 2;
    std::uint64_t seed = 0;
    std::uint32_t field = 2;
    std::vector<double> thresholds;
    double exponent = 1.0;
    std::string window = "cube";
    double resolution = 32.0;
    /// 16 hex digits of FNV-1a over the config bytes.
    std::string hash;
    std::string source;

    /// Largest k requested.
    int k_max() const;
};

/// Parses `key = value` lines; `#` starts a comment, lists are comma
/// separated. Throws ConfigError with the offending line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

std::string config_hash(std::string_view bytes);

// Results ------------------------------------------------------------------

struct ReplicationRecord {
    std::string variant;
    double grid = 0.0;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    int k = 0;
    /// The integer functional of the experiment (beta_k, S_j, |diff|).
    std::int64_t value = 0;
    /// Experiment-specific columns, in a fixed order per kind.
    std::vector<double> extras;
};

struct SummaryRow {
    std::string variant;
    double grid = 0.0;
    int k = 0;
    MomentSummary moments;
    double std_error = 0.0;
    double variance_std_error = 0.0;
    /// mean and variance divided by the grid volume or n.
    double scaled_mean = 0.0;
    double scaled_variance = 0.0;
    double scaled_mean_se = 0.0;
    double scaled_variance_se = 0.0;
    double ks = 0.0;
    double ks_raw = 0.0;
    std::vector<double> tails;
    /// Means of the extras columns.
    std::vector<double> extra_means;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    /// Informational checks never fail a run.
    bool informational = false;
    std::string detail;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<std::string> extra_names;
    std::vector<ReplicationRecord> records;
    std::vector<SummaryRow> summary;
    std::vector<CheckResult> checks;
    std::vector<GaussianCalibration> calibration;

    bool passed() const;
    const SummaryRow* find(std::string_view variant, double grid, int k) const;
    /// Values of one (variant, grid, k) cell in replication order.
    std::vector<double> values(std::string_view variant, double grid, int k) const;
    std::vector<double> extra(std::string_view variant, double grid, int k, std::string_view name) const;
};

/// Runs the configured experiment with the given worker count; the result
/// does not depend on `workers`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers = 1);

ExperimentResult run_strong_law(const ExperimentConfig& cfg, unsigned workers = 1);
ExperimentResult run_simplex_law(const ExperimentConfig& cfg, unsigned workers = 1);
ExperimentResult run_variance_scaling(const ExperimentConfig& cfg, unsigned workers = 1);
ExperimentResult run_clt(const ExperimentConfig& cfg, unsigned workers = 1);
ExperimentResult run_concentration(const ExperimentConfig& cfg, unsigned workers = 1);
ExperimentResult run_coupling(const ExperimentConfig& cfg, unsigned workers = 1);
ExperimentResult run_dpp_concentration(const ExperimentConfig& cfg, unsigned workers = 1);
ExperimentResult run_duality_audit(const ExperimentConfig& cfg, unsigned workers = 1);

// Output -------------------------------------------------------------------

std::string records_csv(const ExperimentResult& r);
std::string summary_csv(const ExperimentResult& r);
std::string checks_csv(const ExperimentResult& r);
/// File name -> SVG document.
std::map<std::string, std::string> plots_svg(const ExperimentResult& r);

/// Writes records.csv, summary.csv, checks.csv and plots/ under `dir`.
void write_outputs(const ExperimentResult& r, const std::string& dir);

}  // namespace cechlab
