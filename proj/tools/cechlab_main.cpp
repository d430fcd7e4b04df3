#include "CLI11.hpp"
#include "json.hpp"

#include "cechlab/complex.hpp"
#include "cechlab/experiments.hpp"
#include "cechlab/homology.hpp"
#include "cechlab/point_process.hpp"
#include "cechlab/stabilization.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#ifndef CECHLAB_VERSION
#define CECHLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace cechlab;

namespace {

constexpr int kExitOk = 0, kExitRuntime = 1, kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path output_root() {
    if (const char* env = std::getenv("CECHLAB_OUTPUT_ROOT"); env && *env) return env;
    return "cechlab-out";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

/// Collects the files a command writes and emits manifest.json once.
class Run {
public:
    Run(std::string command, fs::path dir, std::string config_hash, std::uint64_t seed)
        : command_(std::move(command)), dir_(std::move(dir)), hash_(std::move(config_hash)), seed_(seed),
          started_(timestamp()) {
        fs::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        fs::create_directories(p.parent_path());
        write_file(p, text);
        files_.push_back(name);
    }

    void finish(json extra = json::object()) {
        json m;
        m["tool"] = "cechlab";
        m["version"] = CECHLAB_VERSION;
        m["command"] = command_;
        m["config_hash"] = hash_;
        m["seed"] = seed_;
        m["started"] = started_;
        m["finished"] = timestamp();
        m["output_dir"] = dir_.string();
        auto files = files_;
        files.push_back("manifest.json");
        std::sort(files.begin(), files.end());
        m["files"] = files;
        for (auto& [k, v] : extra.items()) m[k] = v;
        write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }

private:
    std::string command_;
    fs::path dir_;
    std::string hash_;
    std::uint64_t seed_;
    std::string started_;
    std::vector<std::string> files_;
};

fs::path pick_dir(const std::string& out, const std::string& fallback) {
    return out.empty() ? output_root() / fallback : fs::path(out);
}

// sample ---------------------------------------------------------------------

struct SampleOpts {
    std::string process = "poisson";
    double lambda = 1.0;
    std::int64_t n = 100;
    int dim = 2;
    std::string window = "cube:10";
    std::uint64_t seed = 0;
    std::size_t ginibre_cap = kDefaultGinibreCap;
    std::string out;
};

int cmd_sample(const SampleOpts& o) {
    Window w = Window::cube(o.dim, 1);
    try {
        w = Window::parse(o.dim, o.window);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--window: ") + e.what());
    }
    if (!(o.lambda >= 0)) throw UsageError("--lambda must be >= 0");
    if (o.n < 0) throw UsageError("--n must be >= 0");
    PointSample s(o.dim, w);
    if (o.process == "poisson") {
        s = sample_homogeneous_poisson(o.lambda, w, o.seed);
    } else if (o.process == "binomial") {
        s = sample_binomial(o.n, DensitySpec::uniform(w), o.seed);
    } else if (o.process == "extended_binomial") {
        s = sample_extended_binomial(o.n, w.kind() == Window::Kind::ball ? WindowSequence::balls(o.dim) : WindowSequence::cubes(o.dim),
                                     o.seed);
    } else if (o.process == "ginibre") {
        if (o.dim != 2) throw UsageError("ginibre needs --dim 2");
        s = restrict_to(sample_ginibre(static_cast<std::size_t>(o.n), o.seed, std::max<std::size_t>(o.ginibre_cap, static_cast<std::size_t>(o.n))), w);
    } else {
        throw UsageError("unknown process " + o.process);
    }
    const std::string canon = "sample " + o.process + " " + std::to_string(o.lambda) + " " + std::to_string(o.n) + " " +
                              std::to_string(o.dim) + " " + o.window + " " + std::to_string(o.seed);
    const auto hash = config_hash(canon);
    Run run("sample", pick_dir(o.out, "sample-" + hash), hash, o.seed);
    run.write("sample.csv", to_csv(s));
    run.write("sample.json", to_json_envelope(s));
    run.finish({{"points", s.size()}});
    std::cout << s.size() << " points -> " << run.dir().string() << "\n";
    return kExitOk;
}

// betti ----------------------------------------------------------------------

struct BettiOpts {
    std::string input;
    double radius = 1.0;
    int k_cap = 2;
    std::uint32_t field = 2;
    int dim = 2;
    bool dump = false;
    std::string out;
};

int cmd_betti(const BettiOpts& o) {
    const auto text = read_file(o.input);
    PointSample s(o.dim, Window::cube(o.dim, 1));
    try {
        s = read_csv(text, o.dim);
    } catch (const std::exception& e) {
        throw UsageError(o.input + ": " + e.what());
    }
    if (!(o.radius >= 0)) throw UsageError("--radius must be >= 0");
    FieldSpec field{o.field};
    const auto c = build_cech(s, o.radius, o.k_cap);
    const auto b = betti_numbers(c, field);
    const auto counts = count_simplices(c);
    std::ostringstream row;
    row << "r,k_cap,field,points";
    for (int j = 0; j <= o.k_cap; ++j) row << ",S_" << j;
    for (int j = 0; j < o.k_cap; ++j) row << ",beta_" << j;
    row << ",euler\n" << o.radius << ',' << o.k_cap << ',' << o.field << ',' << s.size();
    for (int j = 0; j <= o.k_cap; ++j) row << ',' << counts[static_cast<std::size_t>(j)];
    for (int j = 0; j < o.k_cap; ++j) row << ',' << b.at(static_cast<std::size_t>(j));
    row << ',' << b.euler << '\n';
    const auto hash = config_hash(text + "\n" + std::to_string(o.radius) + " " + std::to_string(o.k_cap) + " " +
                                  std::to_string(o.field));
    Run run("betti", pick_dir(o.out, "betti-" + hash), hash, 0);
    run.write("betti.csv", row.str());
    if (o.dump) run.write("complex.txt", to_text(c));
    run.finish();
    std::cout << row.str();
    return kExitOk;
}

// experiment -----------------------------------------------------------------

struct ExperimentOpts {
    std::string config;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string out;
    bool strict = false;
};

int cmd_experiment(const ExperimentOpts& o) {
    const auto text = read_file(o.config);
    const auto cfg = parse_config(text);
    Run run("experiment", pick_dir(o.out, cfg.name + "-" + cfg.hash), cfg.hash, cfg.seed);
    const auto result = run_experiment(cfg, o.workers);
    run.write("config.cfg", text);
    run.write("records.csv", records_csv(result));
    run.write("summary.csv", summary_csv(result));
    run.write("checks.csv", checks_csv(result));
    for (const auto& [name, svg] : plots_svg(result)) run.write("plots/" + name, svg);
    json checks = json::array();
    std::size_t failed = 0;
    for (const auto& c : result.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"informational", c.informational}});
        if (!c.passed && !c.informational) ++failed;
        std::cout << (c.passed ? "PASS " : c.informational ? "INFO " : "FAIL ") << c.name << ": " << c.detail << "\n";
    }
    run.finish({{"experiment", std::string(kind_name(cfg.kind))}, {"replications", cfg.replications}, {"checks", checks}});
    std::cout << "outputs -> " << run.dir().string() << "\n";
    return (o.strict && failed) ? kExitRuntime : kExitOk;
}

// sphere ---------------------------------------------------------------------

struct SphereOpts {
    int k = 1, dim = 2;
    double radius = 1.0;
    std::string out;
};

int cmd_sphere(const SphereOpts& o) {
    if (o.k < 1 || o.k >= o.dim) throw UsageError("need 1 <= k < dim");
    const auto c = build_sphere_configuration(o.k, o.dim, o.radius);
    const auto hash = config_hash("sphere " + std::to_string(o.k) + " " + std::to_string(o.dim) + " " + std::to_string(o.radius));
    Run run("sphere", pick_dir(o.out, "sphere-" + hash), hash, 0);
    run.write("sphere.csv", c.to_csv());
    run.write("sphere.json", c.manifest_json());
    run.finish({{"m", c.m()}, {"ok", c.check.ok()}});
    std::cout << "m=" << c.m() << " epsilon=" << c.epsilon << " c_star=" << c.c_star << " ok=" << c.check.ok() << "\n";
    return c.check.ok() ? kExitOk : kExitRuntime;
}

// trace ----------------------------------------------------------------------

struct TraceOpts {
    std::uint64_t seed = 0;
    std::size_t seeds = 1;
    double lambda = 1.0, radius = 0.5;
    int dim = 2, k = 1;
    double rho_max = 5.0, rho_step = 0.5;
    std::string out;
};

int cmd_trace(const TraceOpts& o) {
    if (!(o.rho_step > 0) || !(o.rho_max >= 2 * o.radius)) throw UsageError("need --rho-step > 0 and --rho-max >= 2r");
    // Radii 2r, 2r + step, ...
    std::vector<double> rhos;
    for (std::size_t i = 0;; ++i) {
        const double rho = 2 * o.radius + static_cast<double>(i) * o.rho_step;
        if (rho > o.rho_max + 1e-12) break;
        rhos.push_back(rho);
    }
    std::ostringstream canon;
    canon << "trace " << o.seed << ' ' << o.seeds << ' ' << o.lambda << ' ' << o.radius << ' ' << o.dim << ' ' << o.k << ' '
          << o.rho_max << ' ' << o.rho_step;
    const auto hash = config_hash(canon.str());
    Run run("trace", pick_dir(o.out, "trace-" + hash), hash, o.seed);
    std::string csv;
    std::size_t stabilized = 0;
    for (std::size_t i = 0; i < o.seeds; ++i) {
        const auto t = weak_stabilization_trace(o.seed + i, o.lambda, o.dim, o.radius, o.k, rhos);
        csv += t.to_csv(i == 0);
        stabilized += t.stabilized();
    }
    run.write("trace.csv", csv);
    run.finish({{"stabilized", stabilized}, {"seeds", o.seeds}});
    std::cout << stabilized << "/" << o.seeds << " traces stabilized\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random Cech complexes: sampling, homology and Monte Carlo experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CECHLAB_VERSION);

    SampleOpts so;
    auto* sample = app.add_subcommand("sample", "Sample a point process");
    sample->add_option("--process", so.process, "poisson | binomial | extended_binomial | ginibre");
    sample->add_option("--lambda", so.lambda, "Intensity (poisson)");
    sample->add_option("--n", so.n, "Point count (binomial, extended_binomial, ginibre)");
    sample->add_option("--dim", so.dim, "Dimension")->check(CLI::Range(1, 3));
    sample->add_option("--window", so.window, "cube:L, ball:R or box:lo0,hi0,...");
    sample->add_option("--seed", so.seed, "Seed");
    sample->add_option("--ginibre-cap", so.ginibre_cap, "Largest Ginibre size without an explicit cap");
    sample->add_option("--out", so.out, "Output directory");

    BettiOpts bo;
    auto* betti = app.add_subcommand("betti", "Betti numbers of the Cech complex of a sample CSV");
    betti->add_option("--input", bo.input, "Sample CSV")->required();
    betti->add_option("--radius,-r", bo.radius, "Ball radius")->required();
    betti->add_option("--k-cap", bo.k_cap, "Top simplex dimension")->check(CLI::Range(1, 6));
    betti->add_option("--field", bo.field, "Prime field");
    betti->add_option("--dim", bo.dim, "Dimension of an empty input")->check(CLI::Range(1, 6));
    betti->add_flag("--dump-complex", bo.dump, "Also write complex.txt");
    betti->add_option("--out", bo.out, "Output directory");

    ExperimentOpts eo;
    auto* experiment = app.add_subcommand("experiment", "Run an experiment config");
    experiment->add_option("config", eo.config, "Config file")->required();
    experiment->add_option("--workers", eo.workers, "Worker threads; outputs do not depend on it")->check(CLI::Range(1, 1024));
    experiment->add_option("--out", eo.out, "Output directory");
    experiment->add_flag("--strict", eo.strict, "Exit 1 when a check fails");

    SphereOpts sp;
    auto* sphere = app.add_subcommand("sphere", "Build a sphere configuration");
    sphere->add_option("--k", sp.k, "Homology degree");
    sphere->add_option("--dim", sp.dim, "Dimension")->check(CLI::Range(2, 3));
    sphere->add_option("--radius,-r", sp.radius, "Ball radius")->check(CLI::PositiveNumber);
    sphere->add_option("--out", sp.out, "Output directory");

    TraceOpts to;
    auto* trace = app.add_subcommand("trace", "Weak stabilization traces of the add-one cost at the origin");
    trace->add_option("--seed", to.seed, "First seed");
    trace->add_option("--seeds", to.seeds, "Number of seeds")->check(CLI::PositiveNumber);
    trace->add_option("--lambda", to.lambda, "Intensity")->check(CLI::PositiveNumber);
    trace->add_option("--radius,-r", to.radius, "Ball radius")->check(CLI::PositiveNumber);
    trace->add_option("--dim", to.dim, "Dimension")->check(CLI::Range(1, 3));
    trace->add_option("--k", to.k, "Homology degree")->check(CLI::Range(0, 3));
    trace->add_option("--rho-max", to.rho_max, "Largest radius");
    trace->add_option("--rho-step", to.rho_step, "Radius step from 2r");
    trace->add_option("--out", to.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sample) return cmd_sample(so);
        if (*betti) return cmd_betti(bo);
        if (*experiment) return cmd_experiment(eo);
        if (*sphere) return cmd_sphere(sp);
        if (*trace) return cmd_trace(to);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << eo.config << ":" << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
