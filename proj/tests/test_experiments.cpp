#include "doctest.h"

#include "cechlab/experiments.hpp"
#include "cechlab/rng.hpp"

#include <cmath>
#include <filesystem>
#include <random>

using namespace cechlab;

namespace {

std::size_t error_line(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return 0;
}

bool has_check(const ExperimentResult& r, std::string_view prefix) {
    for (const auto& c : r.checks)
        if (c.name.rfind(prefix, 0) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("streaming moments match the two-pass values") {
    auto rng = make_rng(3, "moments");
    // Integer counts of the size the experiments store.
    std::poisson_distribution<int> counts(800);
    std::vector<double> v;
    RunningMoments m;
    for (int i = 0; i < 5000; ++i) {
        v.push_back(counts(rng));
        m.push(v.back());
    }
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    auto a = summarize(m), b = summarize_offline(v);
    CHECK(a.count == b.count);
    CHECK(rel(a.mean, b.mean) <= 1e-9);
    CHECK(rel(a.variance, b.variance) <= 1e-9);
    CHECK(rel(a.skewness, b.skewness) <= 1e-9);
    CHECK(rel(a.excess_kurtosis, b.excess_kurtosis) <= 1e-9);

    std::gamma_distribution<double> g(2.0, 3.0);
    RunningMoments mg;
    v.clear();
    for (int i = 0; i < 5000; ++i) {
        v.push_back(g(rng));
        mg.push(v.back());
    }
    a = summarize(mg);
    b = summarize_offline(v);
    CHECK(rel(a.variance, b.variance) <= 1e-9);
    CHECK(rel(a.skewness, b.skewness) <= 1e-9);
    CHECK(rel(a.excess_kurtosis, b.excess_kurtosis) <= 1e-9);
    // Gamma(2) has skewness sqrt(2) and excess kurtosis 3.
    CHECK(a.skewness == doctest::Approx(std::sqrt(2.0)).epsilon(0.15));
    CHECK(a.excess_kurtosis == doctest::Approx(3.0).epsilon(0.4));
}

TEST_CASE("normal cdf, ks and tails") {
    CHECK(normal_cdf(0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
    auto rng = make_rng(5, "ks");
    std::normal_distribution<double> n(3, 2);
    std::vector<double> v;
    for (int i = 0; i < 2000; ++i) v.push_back(n(rng));
    CHECK(ks_distance(v) < ks_critical_1pct(v.size()));
    std::vector<double> skewed;
    std::exponential_distribution<double> e(1.0);
    for (int i = 0; i < 2000; ++i) skewed.push_back(e(rng));
    CHECK(ks_distance(skewed) > ks_critical_1pct(skewed.size()));
    // Integer data: the corrected distance is smaller on Poisson counts.
    std::poisson_distribution<int> p(30);
    std::vector<double> counts;
    for (int i = 0; i < 2000; ++i) counts.push_back(p(rng));
    CHECK(ks_distance(counts, true) < ks_distance(counts, false));
    const std::vector<double> t{0, 1, 2, 3, 4};
    CHECK(tail_frequency(t, 2, 2) == doctest::Approx(0.4));
    CHECK(tail_frequency(t, 2, 0.5) == doctest::Approx(0.8));
    CHECK(ks_critical_1pct(100) == doctest::Approx(0.163));
}

TEST_CASE("gaussian calibration is deterministic") {
    const auto a = calibrate_gaussian(200, 300, 0.25, 0.5, 9);
    const auto b = calibrate_gaussian(200, 300, 0.25, 0.5, 9);
    CHECK(a.ks_rate == b.ks_rate);
    CHECK(a.skew_rate == b.skew_rate);
    CHECK(a.ks_rate < 0.05);
}

TEST_CASE("config parsing") {
    const auto cfg = parse_config("# a comment\n"
                                  "experiment = clt\n"
                                  "dim = 2\n"
                                  "process = poisson, extended_binomial\n"
                                  "radius = 0.6   # trailing\n"
                                  "grid = 50, 100\n"
                                  "k = 0, 1\n"
                                  "replications = 20\n"
                                  "seed = 7\n");
    CHECK(cfg.kind == ExperimentKind::clt);
    CHECK(cfg.processes.size() == 2);
    CHECK(cfg.grid == std::vector<double>{50, 100});
    CHECK(cfg.ks == std::vector<int>{0, 1});
    CHECK(cfg.radius == 0.6);
    CHECK(cfg.k_max() == 1);
    CHECK(cfg.hash.size() == 16);
    CHECK(cfg.hash == config_hash(cfg.source));

    const std::string base = "experiment = strong_law\ngrid = 4, 8\nk = 0\nreplications = 4\nseed = 1\n";
    CHECK_NOTHROW(parse_config(base));
    CHECK(error_line(base + "colour = red\n") == 6);
    CHECK(error_line(base + "seed = 2\n") == 6);
    CHECK(error_line(base + "radius = abc\n") == 6);
    CHECK(error_line(base + "just words\n") == 6);
    CHECK(error_line("experiment = magic\n") == 1);
    CHECK(error_line("experiment = strong_law\n\ngrid = 8, 4\nk = 0\nreplications = 4\nseed = 1\n") == 3);
    CHECK(error_line("experiment = strong_law\nk = 0\nreplications = 4\nseed = 1\n") > 0);
    CHECK(error_line(base + "process = binomial\n") == 6);
    CHECK(error_line(base + "thermodynamic = true\n") == 6);
    CHECK(error_line(base + "field = 4\n") == 6);
    CHECK(error_line("experiment = variance_scaling\nthermodynamic = false\ngrid = 100\nk = 1\nreplications = 4\nseed = 1\n") == 2);
    CHECK(error_line("experiment = variance_scaling\ngrid = 100.5\nk = 1\nreplications = 4\nseed = 1\n") == 2);
    CHECK(error_line("experiment = duality_audit\ndim = 3\ngrid = 12\nreplications = 4\nseed = 1\n") == 2);
    CHECK(error_line("experiment = concentration\ngrid = 100\nk = 1\nreplications = 4\nseed = 1\n") > 0);
    const auto thermo = parse_config("experiment = coupling\ngrid = 100, 200\nk = 1\nreplications = 4\nseed = 1\n");
    CHECK(thermo.thermodynamic);
    CHECK(thermo.processes == std::vector<std::string>{"coupled"});
    CHECK(parse_config("experiment = dpp_concentration\ndim = 2\ngrid = 6\nreplications = 4\nseed = 1\nthresholds = 0.5\n")
              .processes.size() == 2);
}

TEST_CASE("results do not depend on the worker count") {
    const auto cfg = parse_config("experiment = strong_law\nradius = 0.4\ngrid = 4, 6\nk = 0, 1\nreplications = 12\nseed = 11\n");
    const auto one = run_experiment(cfg, 1);
    const auto eight = run_experiment(cfg, 8);
    CHECK(records_csv(one) == records_csv(eight));
    CHECK(summary_csv(one) == summary_csv(eight));
    CHECK(checks_csv(one) == checks_csv(eight));
    CHECK(one.records.size() == 2 * 2 * 12);
    CHECK(records_csv(one).rfind("config_hash,experiment,variant,grid,replication,seed,k,value,scaled,euler_ok\n", 0) == 0);
    CHECK(has_check(one, "euler_consistency"));
    // Distinct replications use distinct seeds.
    CHECK(one.records[0].seed != one.records[2].seed);
}

TEST_CASE("small runs of every experiment") {
    SUBCASE("simplex law") {
        const auto r = run_experiment(
            parse_config("experiment = simplex_law\nradius = 0.5\ngrid = 4, 6\nk = 0, 1, 2\nreplications = 10\nseed = 2\n"), 4);
        CHECK(has_check(r, "sandwich"));
        CHECK(r.find("poisson", 6, 1) != nullptr);
        for (const auto& rec : r.records) CHECK(rec.extras[4] == 1.0);
    }
    SUBCASE("variance scaling") {
        const auto r = run_experiment(parse_config("experiment = variance_scaling\nprocess = poisson, binomial\nradius = 1\n"
                                                   "grid = 100, 200\nk = 1\nreplications = 30\nseed = 3\n"),
                                      4);
        CHECK(has_check(r, "poisson_dominates_binomial"));
        CHECK(has_check(r, "variance_lower_bound"));
    }
    SUBCASE("clt") {
        const auto r = run_experiment(parse_config("experiment = clt\nprocess = poisson, extended_binomial\nradius = 0.6\n"
                                                   "grid = 50, 100\nk = 0\nreplications = 40\nseed = 4\n"),
                                      4);
        CHECK(r.calibration.size() == 1);
        CHECK(plots_svg(r).count("qq_poisson_n100_k0.svg") == 1);
        // Extended binomial samples have exactly n points.
        for (double x : r.extra("extended_binomial", 100, 0, "points")) CHECK(x == 100);
    }
    SUBCASE("concentration") {
        const auto r = run_experiment(parse_config("experiment = concentration\nprocess = binomial\nradius = 1\n"
                                                   "grid = 100, 200\nk = 1\nreplications = 20\nseed = 5\n"
                                                   "thresholds = 0.2, 1\nexponent = 0.75\n"),
                                      4);
        CHECK(r.find("binomial", 200, 1)->tails.size() == 2);
        CHECK(plots_svg(r).count("tails.svg") == 1);
    }
    SUBCASE("coupling") {
        const auto r = run_experiment(
            parse_config("experiment = coupling\nradius = 1\ngrid = 100, 400\nk = 0, 1\nreplications = 20\nseed = 6\n"), 4);
        for (const auto& rec : r.records) {
            CHECK(rec.extras[6] == 1.0);
            CHECK(static_cast<double>(rec.value) <= rec.extras[3]);
        }
    }
    SUBCASE("dpp concentration") {
        const auto r = run_experiment(parse_config("experiment = dpp_concentration\ndim = 2\nradius = 0.6\ngrid = 4, 6\n"
                                                   "replications = 10\nseed = 7\nthresholds = 0.5\nexponent = 1\n"),
                                      4);
        for (const auto& rec : r.records) CHECK(rec.extras[2] == 1.0);
        // The Ginibre process has unit intensity.
        const double pts = r.find("ginibre", 6, 0)->extra_means[0];
        CHECK(pts == doctest::Approx(36).epsilon(0.15));
    }
    SUBCASE("duality audit") {
        const auto r = run_experiment(parse_config("experiment = duality_audit\ndim = 2\nradius = 0.5\ngrid = 8\n"
                                                   "replications = 6\nseed = 8\nresolution = 16\n"),
                                      4);
        for (const auto& c : r.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
    }
}

TEST_CASE("outputs are written") {
    const auto cfg = parse_config("experiment = strong_law\nradius = 0.3\ngrid = 3, 4\nk = 0\nreplications = 4\nseed = 1\n");
    const auto r = run_experiment(cfg, 2);
    const auto dir = std::filesystem::temp_directory_path() / "cechlab_test_outputs";
    std::filesystem::remove_all(dir);
    write_outputs(r, dir.string());
    CHECK(std::filesystem::exists(dir / "records.csv"));
    CHECK(std::filesystem::exists(dir / "summary.csv"));
    CHECK(std::filesystem::exists(dir / "checks.csv"));
    CHECK(std::filesystem::exists(dir / "plots" / "mean_trajectory.svg"));
    std::filesystem::remove_all(dir);
}
