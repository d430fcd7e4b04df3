#include "cechlab/experiments.hpp"

#include "cechlab/complex.hpp"
#include "cechlab/geometry.hpp"
#include "cechlab/rng.hpp"
#include "cechlab/stabilization.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace cechlab {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double ball_volume(int d) { return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1); }

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

std::uint64_t replication_seed(const ExperimentConfig& cfg, const std::string& variant, std::size_t grid_index,
                               std::size_t rep) {
    return derive_seed(derive_seed(cfg.seed, variant, grid_index), "replication", rep);
}

DensitySpec unit_density(int d) { return DensitySpec::uniform(Window::cube(d, 1.0)); }

double thermodynamic_radius(const ExperimentConfig& cfg, double n) { return std::pow(cfg.radius / n, 1.0 / cfg.dim); }

using Replicate = std::function<std::vector<ReplicationRecord>(const std::string& variant, std::size_t grid_index,
                                                               std::uint64_t seed)>;

// Runs every (variant, grid point, replication) task and stores the rows in
// task order, so the output is independent of scheduling.
std::vector<ReplicationRecord> replicate_all(const ExperimentConfig& cfg, unsigned workers, const Replicate& fn) {
    const std::size_t per_variant = cfg.grid.size() * cfg.replications;
    const std::size_t tasks = cfg.processes.size() * per_variant;
    std::vector<std::vector<ReplicationRecord>> slots(tasks);
    parallel_for(tasks, workers, [&](std::size_t t) {
        const std::size_t v = t / per_variant;
        const std::size_t g = (t % per_variant) / cfg.replications;
        const std::size_t rep = t % cfg.replications;
        const auto& variant = cfg.processes[v];
        const auto seed = replication_seed(cfg, variant, g, rep);
        auto rows = fn(variant, g, seed);
        for (auto& row : rows) {
            row.variant = variant;
            row.grid = cfg.grid[g];
            row.replication = rep;
            row.seed = seed;
        }
        slots[t] = std::move(rows);
    });
    std::vector<ReplicationRecord> out;
    for (auto& s : slots)
        for (auto& row : s) out.push_back(std::move(row));
    return out;
}

double grid_scale(const ExperimentConfig& cfg, double g) {
    switch (cfg.kind) {
        case ExperimentKind::strong_law:
        case ExperimentKind::simplex_law:
        case ExperimentKind::dpp_concentration: return std::pow(g, cfg.dim);
        case ExperimentKind::duality_audit: return 1.0;
        default: return g;
    }
}

double tail_threshold(const ExperimentConfig& cfg, double eps, double g) { return eps * std::pow(g, cfg.exponent); }

void summarize_all(ExperimentResult& res) {
    const auto& cfg = res.config;
    for (const auto& variant : cfg.processes)
        for (double g : cfg.grid)
            for (int k : cfg.ks) {
                SummaryRow row;
                row.variant = variant;
                row.grid = g;
                row.k = k;
                RunningMoments m;
                std::vector<double> vals;
                std::vector<RunningMoments> extras(res.extra_names.size());
                for (const auto& rec : res.records) {
                    if (rec.variant != variant || rec.grid != g || rec.k != k) continue;
                    m.push(static_cast<double>(rec.value));
                    vals.push_back(static_cast<double>(rec.value));
                    for (std::size_t e = 0; e < extras.size(); ++e) extras[e].push(rec.extras[e]);
                }
                row.moments = summarize(m);
                row.std_error = m.std_error();
                row.variance_std_error = m.variance_std_error();
                const double scale = grid_scale(cfg, g);
                row.scaled_mean = row.moments.mean / scale;
                row.scaled_mean_se = row.std_error / scale;
                row.scaled_variance = row.moments.variance / scale;
                row.scaled_variance_se = row.variance_std_error / scale;
                row.ks = ks_distance(vals, true);
                row.ks_raw = ks_distance(vals, false);
                for (double eps : cfg.thresholds)
                    row.tails.push_back(tail_frequency(vals, row.moments.mean, tail_threshold(cfg, eps, g)));
                for (const auto& e : extras) row.extra_means.push_back(e.mean());
                res.summary.push_back(std::move(row));
            }
}

void add_check(ExperimentResult& res, std::string name, bool passed, std::string detail, bool informational = false) {
    res.checks.push_back({std::move(name), passed, informational, std::move(detail)});
}

std::string cell(const std::string& variant, int k) { return variant + " k=" + std::to_string(k); }

std::vector<Vertex> vertices_inside(const PointSample& s, const Window& w) {
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (w.contains(s.point(i))) out.push_back(static_cast<Vertex>(i));
    return out;
}

std::vector<ReplicationRecord> betti_rows(const SimplicialComplex& c, const ExperimentConfig& cfg,
                                          const std::function<std::vector<double>(const BettiVector&, int)>& extras) {
    const auto b = betti_numbers(c, FieldSpec{cfg.field});
    std::vector<ReplicationRecord> rows;
    for (int k : cfg.ks) {
        ReplicationRecord r;
        r.k = k;
        r.value = b.at(static_cast<std::size_t>(k));
        r.extras = extras(b, k);
        rows.push_back(std::move(r));
    }
    return rows;
}

void batch_consistency(ExperimentResult& res, const std::string& variant, double g, int k) {
    const auto v = res.values(variant, g, k);
    const std::size_t half = v.size() / 2;
    if (half < 2) return;
    const auto a = summarize_offline(std::span(v).subspan(0, half));
    const auto b = summarize_offline(std::span(v).subspan(half));
    const double se = std::sqrt(a.variance / static_cast<double>(a.count) + b.variance / static_cast<double>(b.count));
    const bool ok = std::abs(a.mean - b.mean) <= 3 * se || a.mean == b.mean;
    add_check(res, "batch_consistency " + cell(variant, k) + " grid=" + fmt(g), ok,
              "means " + fmt(a.mean, 6) + " vs " + fmt(b.mean, 6) + ", 3 pooled SE = " + fmt(3 * se));
}

}  // namespace

// Result helpers -------------------------------------------------------------

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || c.informational; });
}

const SummaryRow* ExperimentResult::find(std::string_view variant, double grid, int k) const {
    for (const auto& row : summary)
        if (row.variant == variant && row.grid == grid && row.k == k) return &row;
    return nullptr;
}

std::vector<double> ExperimentResult::values(std::string_view variant, double grid, int k) const {
    std::vector<double> out;
    for (const auto& rec : records)
        if (rec.variant == variant && rec.grid == grid && rec.k == k) out.push_back(static_cast<double>(rec.value));
    return out;
}

std::vector<double> ExperimentResult::extra(std::string_view variant, double grid, int k, std::string_view name) const {
    const auto it = std::find(extra_names.begin(), extra_names.end(), name);
    if (it == extra_names.end()) throw std::invalid_argument("unknown column " + std::string(name));
    const auto e = static_cast<std::size_t>(it - extra_names.begin());
    std::vector<double> out;
    for (const auto& rec : records)
        if (rec.variant == variant && rec.grid == grid && rec.k == k) out.push_back(rec.extras[e]);
    return out;
}

// Strong law ---------------------------------------------------------------

ExperimentResult run_strong_law(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"scaled", "euler_ok"};
    res.records = replicate_all(cfg, workers, [&](const std::string&, std::size_t g, std::uint64_t seed) {
        const double l = cfg.grid[g];
        const auto s = sample_homogeneous_poisson(cfg.intensity, Window::cube(cfg.dim, l), seed);
        const auto c = build_cech(s, cfg.radius, cfg.k_max() + 1);
        return betti_rows(c, cfg, [&](const BettiVector& b, int k) {
            return std::vector<double>{static_cast<double>(b.at(static_cast<std::size_t>(k))) / std::pow(l, cfg.dim),
                                       b.euler == b.euler_from_betti() ? 1.0 : 0.0};
        });
    });
    summarize_all(res);

    for (const auto& variant : cfg.processes)
        for (int k : cfg.ks) {
            // Coefficient of variation of beta_k / l^d, with its standard error.
            bool ok = true;
            std::string detail;
            double max_step = 0;
            for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
                const auto* row = res.find(variant, cfg.grid[i], k);
                const double n = static_cast<double>(row->moments.count);
                const double cv = row->moments.mean != 0 ? std::sqrt(row->moments.variance) / row->moments.mean : 0;
                detail += (i ? ", " : "") + std::string("cv(") + fmt(cfg.grid[i]) + ")=" + fmt(cv);
                if (i > 0) {
                    const auto* prev = res.find(variant, cfg.grid[i - 1], k);
                    const double pcv = prev->moments.mean != 0 ? std::sqrt(prev->moments.variance) / prev->moments.mean : 0;
                    const double se = std::hypot(pcv * std::sqrt(1 / (2 * (n - 1)) + pcv * pcv / n),
                                                 cv * std::sqrt(1 / (2 * (n - 1)) + cv * cv / n));
                    ok = ok && cv <= pcv + se;
                    max_step = std::max(max_step, std::abs(row->scaled_mean - prev->scaled_mean));
                }
            }
            // A vanishing limit (beta_0 above percolation) has no concentration to show.
            const bool vanishing = res.find(variant, cfg.grid.back(), k)->scaled_mean < 0.01;
            if (vanishing) detail += " (limit near 0)";
            add_check(res, "cv_decreasing " + cell(variant, k), ok, detail, vanishing);
            add_check(res, "mean_trajectory " + cell(variant, k), true,
                      "max |consecutive mean difference| = " + fmt(max_step), true);
            batch_consistency(res, variant, cfg.grid.back(), k);
            if (k == 0 && cfg.radius * std::pow(cfg.intensity, 1.0 / cfg.dim) <= 0.05) {
                for (double l : cfg.grid) {
                    const auto* row = res.find(variant, l, k);
                    add_check(res, "dust_regime " + cell(variant, k) + " l=" + fmt(l),
                              std::abs(row->scaled_mean - cfg.intensity) <= 2 * row->scaled_mean_se,
                              "beta_0/l^d = " + fmt(row->scaled_mean, 6) + " +- " + fmt(row->scaled_mean_se));
                }
            }
        }
    const auto euler = std::count_if(res.records.begin(), res.records.end(), [](const auto& r) { return r.extras[1] == 1.0; });
    add_check(res, "euler_consistency", euler == static_cast<long>(res.records.size()),
              std::to_string(euler) + "/" + std::to_string(res.records.size()));
    return res;
}

// Simplex law --------------------------------------------------------------

ExperimentResult run_simplex_law(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"in_region", "upper", "local_estimate", "local_scaled", "sandwich_ok"};
    const double r = cfg.radius;
    res.records = replicate_all(cfg, workers, [&](const std::string&, std::size_t g, std::uint64_t seed) {
        const double l = cfg.grid[g];
        // Large enough that every simplex with a vertex in W_l is present.
        const auto big = sample_homogeneous_poisson(cfg.intensity, Window::cube(cfg.dim, l + 4 * r + 1), seed);
        const auto c = build_cech(big, r, cfg.k_max());
        const Window wl = Window::cube(cfg.dim, l);
        const auto inner = restrict_to_vertices(c, vertices_inside(big, wl));
        const auto upper = restrict_to_vertices(c, vertices_inside(big, Window::cube(cfg.dim, l + 2 * r + 1)));
        const auto region = count_simplices_in_region(c, big, wl);
        std::vector<std::uint8_t> in_l(big.size());
        for (std::size_t i = 0; i < big.size(); ++i) in_l[i] = wl.contains(big.point(i));
        std::vector<ReplicationRecord> rows;
        for (int j : cfg.ks) {
            // Each simplex contributes the fraction of its vertices in W_l.
            double local = 0;
            for (std::size_t i = 0; i < c.count(j); ++i) {
                int hits = 0;
                for (auto v : c.simplex(j, i)) hits += in_l[v];
                local += static_cast<double>(hits) / (j + 1);
            }
            ReplicationRecord rec;
            rec.k = j;
            rec.value = static_cast<std::int64_t>(inner.count(j));
            const auto lo = inner.count(j), mid = region[static_cast<std::size_t>(j)], hi = upper.count(j);
            rec.extras = {static_cast<double>(mid), static_cast<double>(hi), local, local / std::pow(l, cfg.dim),
                          (lo <= mid && mid <= hi) ? 1.0 : 0.0};
            rows.push_back(std::move(rec));
        }
        return rows;
    });
    summarize_all(res);

    std::size_t violations = 0;
    for (const auto& rec : res.records) violations += rec.extras[4] == 0.0;
    add_check(res, "sandwich", violations == 0, std::to_string(violations) + " violations");
    const double lam = cfg.intensity;
    for (const auto& variant : cfg.processes)
        for (int j : cfg.ks)
            for (double l : cfg.grid) {
                const auto* row = res.find(variant, l, j);
                if (j == 0)
                    add_check(res, "vertex_density " + cell(variant, j) + " l=" + fmt(l),
                              std::abs(row->scaled_mean - lam) <= 2 * row->scaled_mean_se,
                              "S_0/l^d = " + fmt(row->scaled_mean, 6) + " +- " + fmt(row->scaled_mean_se));
                if (j == 1) {
                    const auto v = res.extra(variant, l, j, "local_scaled");
                    const auto m = summarize_offline(v);
                    const double se = std::sqrt(m.variance / static_cast<double>(m.count));
                    const double expect = lam * lam * ball_volume(cfg.dim) * std::pow(2 * r, cfg.dim) / 2;
                    add_check(res, "edge_density " + cell(variant, j) + " l=" + fmt(l), std::abs(m.mean - expect) <= 3 * se,
                              "local estimate " + fmt(m.mean, 6) + " +- " + fmt(se) + ", expected " + fmt(expect, 6));
                }
            }
    return res;
}

// Variance scaling -----------------------------------------------------------

ExperimentResult run_variance_scaling(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"points"};
    const auto f = unit_density(cfg.dim);
    res.records = replicate_all(cfg, workers, [&](const std::string& variant, std::size_t g, std::uint64_t seed) {
        const double n = cfg.grid[g];
        const auto s = variant == "poisson" ? sample_inhomogeneous_poisson(n, f, seed)
                                            : sample_binomial(static_cast<std::int64_t>(n), f, seed);
        const auto c = build_cech(s, thermodynamic_radius(cfg, n), cfg.k_max() + 1);
        const double pts = static_cast<double>(s.size());
        return betti_rows(c, cfg, [&](const BettiVector&, int) { return std::vector<double>{pts}; });
    });
    summarize_all(res);

    for (const auto& variant : cfg.processes)
        for (int k : cfg.ks) {
            double lo = INFINITY, hi = 0;
            std::string detail;
            for (double n : cfg.grid) {
                const auto* row = res.find(variant, n, k);
                lo = std::min(lo, row->scaled_variance);
                hi = std::max(hi, row->scaled_variance);
                detail += "Var/n(" + fmt(n) + ")=" + fmt(row->scaled_variance) + "+-" + fmt(row->scaled_variance_se) + " ";
                if (k == cfg.dim - 1)
                    add_check(res, "variance_lower_bound " + cell(variant, k) + " n=" + fmt(n),
                              row->scaled_variance - 3 * row->scaled_variance_se > 0,
                              "Var/n - 3 SE = " + fmt(row->scaled_variance - 3 * row->scaled_variance_se));
            }
            add_check(res, "variance_factor2 " + cell(variant, k), lo > 0 && hi / lo < 2.0,
                      detail + "ratio=" + fmt(lo > 0 ? hi / lo : INFINITY));
        }
    const bool both = std::find(cfg.processes.begin(), cfg.processes.end(), "poisson") != cfg.processes.end() &&
                      std::find(cfg.processes.begin(), cfg.processes.end(), "binomial") != cfg.processes.end();
    if (both)
        for (int k : cfg.ks)
            for (double n : cfg.grid) {
                const auto* p = res.find("poisson", n, k);
                const auto* b = res.find("binomial", n, k);
                const double se = std::hypot(p->variance_std_error, b->variance_std_error);
                add_check(res, "poisson_dominates_binomial k=" + std::to_string(k) + " n=" + fmt(n),
                          p->moments.variance >= b->moments.variance - 3 * se,
                          "Var " + fmt(p->moments.variance) + " vs " + fmt(b->moments.variance) + ", 3 SE = " + fmt(3 * se));
            }
    return res;
}

// CLT ------------------------------------------------------------------------

ExperimentResult run_clt(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"points"};
    const auto seq = cfg.window == "ball" ? WindowSequence::balls(cfg.dim) : WindowSequence::cubes(cfg.dim);
    res.records = replicate_all(cfg, workers, [&](const std::string& variant, std::size_t g, std::uint64_t seed) {
        const auto n = static_cast<std::int64_t>(cfg.grid[g]);
        const auto s = variant == "poisson" ? sample_homogeneous_poisson(cfg.intensity, seq.at(n), seed)
                                            : sample_extended_binomial(n, seq, seed);
        const auto c = build_cech(s, cfg.radius, cfg.k_max() + 1);
        const double pts = static_cast<double>(s.size());
        return betti_rows(c, cfg, [&](const BettiVector&, int) { return std::vector<double>{pts}; });
    });
    summarize_all(res);

    constexpr double skew_band = 0.25, kurt_band = 0.5;
    res.calibration.push_back(calibrate_gaussian(cfg.replications, 2000, skew_band, kurt_band, cfg.seed));
    const auto& cal = res.calibration.back();
    add_check(res, "gaussian_calibration", true,
              "false-failure rates on normal samples of size " + std::to_string(cal.sample_size) + ": ks " +
                  fmt(cal.ks_rate) + ", skew " + fmt(cal.skew_rate) + ", kurtosis " + fmt(cal.kurtosis_rate),
              true);
    const double crit = ks_critical_1pct(cfg.replications);
    for (const auto& variant : cfg.processes) {
        const std::string tag = (variant == "extended_binomial" && cfg.dim >= 3) ? " (conditional)" : "";
        for (int k : cfg.ks) {
            for (double n : cfg.grid) {
                const auto* row = res.find(variant, n, k);
                add_check(res, "ks " + cell(variant, k) + " n=" + fmt(n) + tag, row->ks < crit,
                          "ks=" + fmt(row->ks) + " (uncorrected " + fmt(row->ks_raw) + "), critical " + fmt(crit));
            }
            const auto* top = res.find(variant, cfg.grid.back(), k);
            add_check(res, "skewness " + cell(variant, k) + " n=" + fmt(cfg.grid.back()) + tag,
                      std::abs(top->moments.skewness) < skew_band, "skew=" + fmt(top->moments.skewness));
            add_check(res, "kurtosis " + cell(variant, k) + " n=" + fmt(cfg.grid.back()) + tag,
                      std::abs(top->moments.excess_kurtosis) < kurt_band,
                      "excess kurtosis=" + fmt(top->moments.excess_kurtosis));
        }
    }
    return res;
}

// Concentration ----------------------------------------------------------------

ExperimentResult run_concentration(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"points"};
    const auto f = unit_density(cfg.dim);
    res.records = replicate_all(cfg, workers, [&](const std::string& variant, std::size_t g, std::uint64_t seed) {
        const double n = cfg.grid[g];
        const auto s = variant == "poisson" ? sample_inhomogeneous_poisson(n, f, seed)
                                            : sample_binomial(static_cast<std::int64_t>(n), f, seed);
        const auto c = build_cech(s, thermodynamic_radius(cfg, n), cfg.k_max() + 1);
        const double pts = static_cast<double>(s.size());
        return betti_rows(c, cfg, [&](const BettiVector&, int) { return std::vector<double>{pts}; });
    });
    summarize_all(res);

    const double a = cfg.exponent;
    for (const auto& variant : cfg.processes)
        for (int k : cfg.ks)
            for (std::size_t e = 0; e < cfg.thresholds.size(); ++e) {
                const double eps = cfg.thresholds[e];
                bool mono = true;
                std::string detail;
                for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
                    const double t = res.find(variant, cfg.grid[i], k)->tails[e];
                    detail += (i ? ", " : "") + std::string("P(") + fmt(cfg.grid[i]) + ")=" + fmt(t);
                    if (i > 0) mono = mono && t <= res.find(variant, cfg.grid[i - 1], k)->tails[e];
                }
                const std::string name = cell(variant, k) + " eps=" + fmt(eps) + " a=" + fmt(a);
                add_check(res, "tail_nonincreasing " + name, mono, detail);

                // Envelope (C / eps) n^(2k+2-a) exp(-n^gamma) with C fit at the smallest n.
                if (k >= 1) {
                    const double gamma = (2 * a - 1) / (4 * k);
                    auto shape = [&](double n) { return std::pow(n, 2 * k + 2 - a) * std::exp(-std::pow(n, gamma)) / eps; };
                    const double c = res.find(variant, cfg.grid.front(), k)->tails[e] / shape(cfg.grid.front());
                    bool dominated = true;
                    std::string env;
                    for (double n : cfg.grid) {
                        const double bound = c * shape(n);
                        dominated = dominated && res.find(variant, n, k)->tails[e] <= bound + 1e-12;
                        env += "env(" + fmt(n) + ")=" + fmt(bound) + " ";
                    }
                    add_check(res, "envelope " + name, dominated, env + "C=" + fmt(c), true);
                }
            }
    return res;
}

// Coupling ---------------------------------------------------------------------

ExperimentResult run_coupling(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"poisson_points", "beta_poisson", "beta_binomial", "majorant", "scaled_difference",
                       "scaled_majorant", "dominated"};
    const auto f = unit_density(cfg.dim);
    const FieldSpec field{cfg.field};
    res.records = replicate_all(cfg, workers, [&](const std::string&, std::size_t g, std::uint64_t seed) {
        const double n = cfg.grid[g];
        const double rn = thermodynamic_radius(cfg, n);
        const auto [p, x] = sample_coupled_poisson_binomial(static_cast<std::int64_t>(n), f, seed);
        const bool poisson_larger = p.size() >= x.size();
        const PointSample& outer_s = poisson_larger ? p : x;
        const PointSample& inner_s = poisson_larger ? x : p;
        // Both are prefixes of one iid stream.
        if (!std::equal(inner_s.coords().begin(), inner_s.coords().end(), outer_s.coords().begin()))
            throw std::logic_error("coupled samples do not share a prefix");
        const auto outer = build_cech(outer_s, rn, cfg.k_max() + 1);
        std::vector<Vertex> keep(inner_s.size());
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = static_cast<Vertex>(i);
        const auto inner = restrict_to_vertices(outer, keep);
        std::vector<ReplicationRecord> rows;
        for (int k : cfg.ks) {
            const auto chk = betti_difference_bound_check(inner, outer, k, field);
            const auto bo = betti_number(outer, k, field), bi = bo - chk.difference;
            ReplicationRecord rec;
            rec.k = k;
            rec.value = std::abs(chk.difference);
            const double bp = static_cast<double>(poisson_larger ? bo : bi);
            const double bx = static_cast<double>(poisson_larger ? bi : bo);
            rec.extras = {static_cast<double>(p.size()), bp, bx, static_cast<double>(chk.bound),
                          static_cast<double>(rec.value) / n, static_cast<double>(chk.bound) / n, chk.holds ? 1.0 : 0.0};
            rows.push_back(std::move(rec));
        }
        return rows;
    });
    summarize_all(res);

    std::size_t violations = 0, equal_counts = 0, equal_nonzero = 0;
    for (const auto& rec : res.records) {
        violations += rec.extras[6] == 0.0;
        if (rec.extras[0] == rec.grid) {
            ++equal_counts;
            equal_nonzero += rec.value != 0;
        }
    }
    add_check(res, "majorant_dominates", violations == 0, std::to_string(violations) + " violations");
    add_check(res, "identical_when_counts_match", equal_nonzero == 0,
              std::to_string(equal_counts) + " replications with N = n, " + std::to_string(equal_nonzero) + " nonzero");
    for (const auto& variant : cfg.processes)
        for (int k : cfg.ks) {
            const auto* first = res.find(variant, cfg.grid.front(), k);
            const auto* last = res.find(variant, cfg.grid.back(), k);
            const double se = std::hypot(first->scaled_mean_se, last->scaled_mean_se);
            const bool ok = first->scaled_mean - last->scaled_mean > 3 * se ||
                            (first->scaled_mean < 1e-3 && last->scaled_mean < 1e-3);
            add_check(res, "difference_shrinks k=" + std::to_string(k), ok,
                      "mean |d|/n " + fmt(first->scaled_mean) + " -> " + fmt(last->scaled_mean) + ", 3 SE = " + fmt(3 * se));
            bool shrink = true;
            std::string detail;
            for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
                const double m = summarize_offline(res.extra(variant, cfg.grid[i], k, "scaled_majorant")).mean;
                detail += (i ? ", " : "") + fmt(m);
                if (i > 0)
                    shrink = shrink && m <= summarize_offline(res.extra(variant, cfg.grid[i - 1], k, "scaled_majorant")).mean;
            }
            add_check(res, "majorant_shrinks k=" + std::to_string(k), shrink, "mean majorant/n: " + detail);
        }
    return res;
}

// DPP concentration ----------------------------------------------------------

ExperimentResult run_dpp_concentration(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"points", "removal_cost", "lipschitz_ok"};
    const int packing = static_cast<int>(packing_lower_bound(2).count());
    res.records = replicate_all(cfg, workers, [&](const std::string& variant, std::size_t g, std::uint64_t seed) {
        const double l = cfg.grid[g];
        const Window w = Window::cube(2, l);
        PointSample s(2, w);
        if (variant == "ginibre") {
            // The disc of radius sqrt(N/pi) covers the window with a margin of 3.
            const double reach = l / std::sqrt(2.0) + 3.0;
            const auto n = static_cast<std::size_t>(std::ceil(std::numbers::pi * reach * reach));
            s = restrict_to(sample_ginibre(n, seed, std::max(n, kDefaultGinibreCap)), w);
        } else {
            s = sample_homogeneous_poisson(cfg.intensity, w, seed);
        }
        const auto c = build_cech(s, cfg.radius, 1);
        ReplicationRecord rec;
        rec.k = 0;
        rec.value = betti_number(c, 0, FieldSpec{cfg.field});
        double cost = 0;
        bool ok = true;
        if (!s.empty()) {
            const std::size_t pick = static_cast<std::size_t>(seed % s.size());
            PointSample rest(2, w);
            for (std::size_t i = 0; i < s.size(); ++i)
                if (i != pick) rest.push_back(s.point(i));
            cost = static_cast<double>(add_one_cost(rest, s.point(pick), cfg.radius, 0).cost);
            ok = cost >= -packing && cost <= 1;
        }
        rec.extras = {static_cast<double>(s.size()), cost, ok ? 1.0 : 0.0};
        return std::vector<ReplicationRecord>{rec};
    });
    summarize_all(res);

    std::size_t bad = 0;
    for (const auto& rec : res.records) bad += rec.extras[2] == 0.0;
    add_check(res, "lipschitz", bad == 0,
              std::to_string(bad) + " single-point changes outside [-" + std::to_string(packing) + ", 1]");
    for (const auto& variant : cfg.processes)
        for (std::size_t e = 0; e < cfg.thresholds.size(); ++e) {
            bool mono = true;
            std::string detail;
            for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
                const double t = res.find(variant, cfg.grid[i], 0)->tails[e];
                detail += (i ? ", " : "") + fmt(t);
                if (i > 0) mono = mono && t <= res.find(variant, cfg.grid[i - 1], 0)->tails[e];
            }
            add_check(res, "tail_nonincreasing " + variant + " eps=" + fmt(cfg.thresholds[e]), mono, detail,
                      variant != "ginibre");
        }
    const bool both = cfg.processes.size() == 2;
    if (both)
        for (double l : cfg.grid) {
            const auto* g = res.find("ginibre", l, 0);
            const auto* p = res.find("poisson", l, 0);
            const double se = std::hypot(g->variance_std_error, p->variance_std_error);
            add_check(res, "ginibre_tighter l=" + fmt(l), g->moments.variance < p->moments.variance - 3 * se,
                      "Var " + fmt(g->moments.variance) + " vs " + fmt(p->moments.variance) + ", 3 SE = " + fmt(3 * se),
                      true);
        }
    return res;
}

// Duality audit ------------------------------------------------------------------

ExperimentResult run_duality_audit(const ExperimentConfig& cfg, unsigned workers) {
    ExperimentResult res;
    res.config = cfg;
    res.extra_names = {"bounded", "bounded_fine", "agree", "agree_fine"};
    const double r = cfg.radius;
    res.records = replicate_all(cfg, workers, [&](const std::string&, std::size_t g, std::uint64_t seed) {
        const double l = cfg.grid[g];
        const Window w = Window::cube(2, l);
        // Keep only points farther than 2r from the window boundary.
        PointSample s = restrict_to(sample_homogeneous_poisson(cfg.intensity, w, seed), Window::cube(2, l - 4 * r));
        s.set_window(w);
        ReplicationRecord rec;
        rec.k = 1;
        rec.value = betti_number(build_cech(s, r, 2), 1, FieldSpec{cfg.field});
        const auto coarse = vacant_component_count(s, r, w, cfg.resolution);
        double fine = static_cast<double>(coarse.bounded);
        const bool agree = static_cast<std::int64_t>(coarse.bounded) == rec.value;
        if (!agree) fine = static_cast<double>(vacant_component_count(s, r, w, 2 * cfg.resolution).bounded);
        rec.extras = {static_cast<double>(coarse.bounded), fine, agree ? 1.0 : 0.0,
                      static_cast<double>(fine) == static_cast<double>(rec.value) ? 1.0 : 0.0};
        return std::vector<ReplicationRecord>{rec};
    });
    summarize_all(res);

    for (double l : cfg.grid) {
        const auto agree = res.extra("poisson", l, 1, "agree");
        const auto fine = res.extra("poisson", l, 1, "agree_fine");
        const double frac = summarize_offline(agree).mean;
        const auto unresolved = std::count(fine.begin(), fine.end(), 0.0);
        add_check(res, "duality_agreement l=" + fmt(l), frac >= 0.98,
                  fmt(frac * static_cast<double>(agree.size())) + "/" + std::to_string(agree.size()) + " agree");
        add_check(res, "duality_refinement l=" + fmt(l), unresolved == 0,
                  std::to_string(unresolved) + " discrepancies remain at doubled resolution");
    }
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers) {
    switch (cfg.kind) {
        case ExperimentKind::strong_law: return run_strong_law(cfg, workers);
        case ExperimentKind::simplex_law: return run_simplex_law(cfg, workers);
        case ExperimentKind::variance_scaling: return run_variance_scaling(cfg, workers);
        case ExperimentKind::clt: return run_clt(cfg, workers);
        case ExperimentKind::concentration: return run_concentration(cfg, workers);
        case ExperimentKind::coupling: return run_coupling(cfg, workers);
        case ExperimentKind::dpp_concentration: return run_dpp_concentration(cfg, workers);
        case ExperimentKind::duality_audit: return run_duality_audit(cfg, workers);
    }
    throw std::invalid_argument("unknown experiment kind");
}

// Output -------------------------------------------------------------------

std::string records_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "config_hash,experiment,variant,grid,replication,seed,k,value";
    for (const auto& e : r.extra_names) out << ',' << e;
    out << '\n';
    const auto kind = kind_name(r.config.kind);
    for (const auto& rec : r.records) {
        out << r.config.hash << ',' << kind << ',' << rec.variant << ',' << num(rec.grid) << ',' << rec.replication
            << ',' << rec.seed << ',' << rec.k << ',' << rec.value;
        for (double e : rec.extras) out << ',' << num(e);
        out << '\n';
    }
    return out.str();
}

std::string summary_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "config_hash,experiment,variant,grid,k,count,mean,variance,std_error,variance_std_error,scaled_mean,"
           "scaled_mean_se,scaled_variance,scaled_variance_se,skewness,excess_kurtosis,ks,ks_raw";
    for (double eps : r.config.thresholds) out << ",tail_" << num(eps);
    for (const auto& e : r.extra_names) out << ",mean_" << e;
    out << '\n';
    const auto kind = kind_name(r.config.kind);
    for (const auto& row : r.summary) {
        const auto& m = row.moments;
        out << r.config.hash << ',' << kind << ',' << row.variant << ',' << num(row.grid) << ',' << row.k << ','
            << m.count << ',' << num(m.mean) << ',' << num(m.variance) << ',' << num(row.std_error) << ','
            << num(row.variance_std_error) << ',' << num(row.scaled_mean) << ',' << num(row.scaled_mean_se) << ','
            << num(row.scaled_variance) << ',' << num(row.scaled_variance_se) << ',' << num(m.skewness) << ','
            << num(m.excess_kurtosis) << ',' << num(row.ks) << ',' << num(row.ks_raw);
        for (double t : row.tails) out << ',' << num(t);
        for (double e : row.extra_means) out << ',' << num(e);
        out << '\n';
    }
    return out.str();
}

std::string checks_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "config_hash,check,passed,informational,detail\n";
    for (const auto& c : r.checks) {
        std::string detail = c.detail;
        std::replace(detail.begin(), detail.end(), '"', '\'');
        out << r.config.hash << ',' << c.name << ',' << (c.passed ? 1 : 0) << ',' << (c.informational ? 1 : 0) << ",\""
            << detail << "\"\n";
    }
    return out.str();
}

// SVG ----------------------------------------------------------------------

namespace {

struct Series {
    std::string label;
    std::vector<double> x, y, err;
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool lines, bool diagonal = false) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double e = s.err.empty() ? 0 : s.err[i];
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i] - e);
            y1 = std::max(y1, s.y[i] + e);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 1, x1 += 1;
    if (y1 == y0) y0 -= 1, y1 += 1;
    const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.08;
    x0 -= px, x1 += px, y0 -= py, y1 += py;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        o << "<text x=\"" << sx(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(xv, 3) << "</text>\n";
        o << "<text x=\"" << L - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv, 3) << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
    if (diagonal) {
        const double a = std::max(x0, y0), b = std::min(x1, y1);
        o << "<line x1=\"" << sx(a) << "\" y1=\"" << sy(a) << "\" x2=\"" << sx(b) << "\" y2=\"" << sy(b)
          << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* col = kColors[si % std::size(kColors)];
        if (lines && s.x.size() > 1) {
            o << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) o << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
            o << "\"/>\n";
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!s.err.empty() && s.err[i] > 0)
                o << "<line x1=\"" << sx(s.x[i]) << "\" y1=\"" << sy(s.y[i] - s.err[i]) << "\" x2=\"" << sx(s.x[i])
                  << "\" y2=\"" << sy(s.y[i] + s.err[i]) << "\" stroke=\"" << col << "\"/>\n";
            o << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"" << (lines ? 3 : 1.5)
              << "\" fill=\"" << col << "\"/>\n";
        }
        o << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 14 * (si + 1) << "\" fill=\"" << col << "\">" << s.label
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

double normal_quantile(double p) {
    double lo = -10, hi = 10;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::map<std::string, std::string> plots_svg(const ExperimentResult& r) {
    std::map<std::string, std::string> out;
    const auto& cfg = r.config;
    const std::string xlabel = cfg.thermodynamic || cfg.kind == ExperimentKind::clt ? "n" : "l";
    std::vector<Series> means;
    for (const auto& variant : cfg.processes)
        for (int k : cfg.ks) {
            Series s;
            s.label = cell(variant, k);
            for (double g : cfg.grid)
                if (const auto* row = r.find(variant, g, k)) {
                    s.x.push_back(g);
                    s.y.push_back(row->scaled_mean);
                    s.err.push_back(2 * row->scaled_mean_se);
                }
            means.push_back(std::move(s));
        }
    out["mean_trajectory.svg"] =
        svg_plot(std::string(kind_name(cfg.kind)) + ": scaled mean +- 2 SE", xlabel, "mean / scale", means, true);

    if (cfg.kind == ExperimentKind::clt)
        for (const auto& variant : cfg.processes)
            for (int k : cfg.ks)
                for (double g : cfg.grid) {
                    auto v = r.values(variant, g, k);
                    const auto m = summarize_offline(v);
                    const double sd = std::sqrt(m.variance);
                    std::sort(v.begin(), v.end());
                    Series s;
                    s.label = cell(variant, k);
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        s.x.push_back(normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(v.size())));
                        s.y.push_back(sd > 0 ? (v[i] - m.mean) / sd : 0);
                    }
                    out["qq_" + variant + "_n" + fmt(g, 10) + "_k" + std::to_string(k) + ".svg"] =
                        svg_plot("QQ " + cell(variant, k) + " n=" + fmt(g), "normal quantile", "standardized", {s}, false, true);
                }

    if (!cfg.thresholds.empty()) {
        std::vector<Series> tails;
        const double floor = 1.0 / static_cast<double>(cfg.replications);
        for (const auto& variant : cfg.processes)
            for (int k : cfg.ks)
                for (std::size_t e = 0; e < cfg.thresholds.size(); ++e) {
                    Series s;
                    s.label = cell(variant, k) + " eps=" + fmt(cfg.thresholds[e]);
                    for (double g : cfg.grid)
                        if (const auto* row = r.find(variant, g, k)) {
                            s.x.push_back(g);
                            s.y.push_back(std::log10(std::max(row->tails[e], floor / 2)));
                        }
                    tails.push_back(std::move(s));
                }
        out["tails.svg"] = svg_plot("tail frequency (log10, zeros at half the resolution)", xlabel, "log10 P", tails, true);
    }
    return out;
}

void write_outputs(const ExperimentResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "plots");
    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out << text;
    };
    write(fs::path(dir) / "records.csv", records_csv(r));
    write(fs::path(dir) / "summary.csv", summary_csv(r));
    write(fs::path(dir) / "checks.csv", checks_csv(r));
    for (const auto& [name, svg] : plots_svg(r)) write(fs::path(dir) / "plots" / name, svg);
}

}  // namespace cechlab
