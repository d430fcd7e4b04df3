// Acceptance suite: one PASS/FAIL line per criterion.

#include "cechlab/complex.hpp"
#include "cechlab/experiments.hpp"
#include "cechlab/homology.hpp"
#include "cechlab/rng.hpp"
#include "cechlab/stabilization.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cechlab;

namespace {

const std::string kConfigDir = CECHLAB_CONFIG_DIR;

struct Euler {
    long checked = 0, failed = 0;
    void add(const BettiVector& b) {
        ++checked;
        failed += b.euler != b.euler_from_betti();
    }
} euler;

BettiVector tracked_betti(const SimplicialComplex& c, std::uint32_t p = 2) {
    auto b = betti_numbers(c, {p});
    euler.add(b);
    return b;
}

SimplicialComplex random_abstract(std::size_t n, int k_cap, int simplices, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<int> size(1, k_cap + 1);
    std::vector<Simplex> top;
    for (int i = 0; i < simplices; ++i) {
        Simplex s;
        const int m = std::min(size(rng), static_cast<int>(n));
        while (static_cast<int>(s.size()) < m) {
            const auto v = static_cast<Vertex>(pick(rng));
            if (std::find(s.begin(), s.end(), v) == s.end()) s.push_back(v);
        }
        std::sort(s.begin(), s.end());
        top.push_back(s);
    }
    return SimplicialComplex::closure(n, k_cap, top);
}

PointSample random_points(std::size_t max_points, int d, double side, Rng& rng) {
    std::uniform_int_distribution<std::size_t> nn(1, max_points);
    return sample_binomial(static_cast<std::int64_t>(nn(rng)), DensitySpec::uniform(Window::cube(d, side)), rng());
}

int failures = 0;

void report(int id, const std::string& title, bool passed, const std::string& detail) {
    std::cout << (passed ? "PASS" : "FAIL") << " criterion " << id << " " << title << ": " << detail << std::endl;
    failures += !passed;
}

// Runs `body` and reports it with the elapsed time against `limit` seconds.
void criterion(int id, const std::string& title, double limit, const std::function<bool(std::string&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream out;
    out << detail;
    if (limit > 0) out << "; " << static_cast<int>(secs * 10) / 10.0 << " s (limit " << limit << " s)";
    report(id, title, ok && (limit <= 0 || secs < limit), out.str());
}

ExperimentResult run_config(const std::string& name, unsigned workers = 1) {
    return run_experiment(load_config(kConfigDir + "/" + name), workers);
}

// All non-informational checks whose name starts with one of `prefixes`.
bool checks_pass(const ExperimentResult& r, std::initializer_list<std::string> prefixes, std::string& detail) {
    std::size_t seen = 0, failed = 0;
    std::string first;
    for (const auto& c : r.checks) {
        if (c.informational) continue;
        bool match = false;
        for (const auto& p : prefixes) match = match || c.name.rfind(p, 0) == 0;
        if (!match) continue;
        ++seen;
        if (!c.passed) {
            ++failed;
            if (first.empty()) first = c.name + " (" + c.detail + ")";
        }
    }
    detail = std::to_string(seen - failed) + "/" + std::to_string(seen) + " checks";
    if (!first.empty()) detail += ", first failure: " + first;
    return seen > 0 && failed == 0;
}

std::string check_detail(const ExperimentResult& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c.detail;
    return "missing";
}

}  // namespace

int main() {
    criterion(1, "homology oracle equivalence", 60, [](std::string& detail) {
        auto rng = make_rng(1, "acceptance-oracle");
        std::uniform_real_distribution<double> rr(0.05, 1.2);
        int agree = 0;
        for (int t = 0; t < 500; ++t) {
            const auto c = build_cech(random_points(14, 2, 3.0, rng), rr(rng), 2);
            const std::uint32_t p = t % 2 ? 3 : 2;
            const auto b = tracked_betti(c, p);
            agree += std::vector<long>(b.betti.begin(), b.betti.end()) == oracle::dense_betti(c, p);
        }
        detail = std::to_string(agree) + "/500 complexes agree";
        return agree == 500;
    });

    criterion(2, "betti difference bound on nested pairs", 30, [](std::string& detail) {
        auto rng = make_rng(2, "acceptance-nested");
        std::uniform_int_distribution<std::size_t> nv(3, 12);
        std::uniform_real_distribution<double> rr(0.1, 0.9);
        int ok = 0;
        for (int t = 0; t < 300; ++t) {
            SimplicialComplex inner(1, 0), outer(1, 0);
            if (t % 2 == 0) {
                const std::size_t n = nv(rng);
                inner = random_abstract(n, 3, 4, rng);
                outer = complex_union(inner, random_abstract(n, 3, 3, rng));
            } else {
                // Growing radius on a fixed planar sample.
                const auto s = random_points(12, 2, 3.0, rng);
                const double r = rr(rng);
                inner = build_cech(s, r, 3);
                outer = build_cech(s, r + rr(rng), 3);
            }
            bool all = true;
            for (int k = 0; k <= 2; ++k) all = all && betti_difference_bound_check(inner, outer, k).holds;
            tracked_betti(inner);
            tracked_betti(outer);
            ok += all;
        }
        detail = std::to_string(ok) + "/300 pairs within the bound for k = 0, 1, 2";
        return ok == 300;
    });

    criterion(3, "Mayer-Vietoris rank identity", 120, [](std::string& detail) {
        auto rng = make_rng(3, "acceptance-mv");
        std::uniform_int_distribution<std::size_t> nv(2, 12);
        int ok = 0;
        for (int t = 0; t < 500; ++t) {
            const std::size_t n = nv(rng);
            const auto k1 = random_abstract(n, 3, 5, rng), k2 = random_abstract(n, 3, 5, rng);
            bool all = true;
            for (int k = 0; k <= 2; ++k) all = all && mayer_vietoris_terms(k1, k2, k).holds();
            for (const auto* c : {&k1, &k2}) tracked_betti(*c);
            tracked_betti(complex_union(k1, k2));
            tracked_betti(complex_intersection(k1, k2));
            ok += all;
        }
        detail = std::to_string(ok) + "/500 decompositions satisfy the identity for k = 0, 1, 2";
        return ok == 500;
    });

    ExperimentResult duality;
    criterion(5, "duality audit", 300, [&](std::string& detail) {
        duality = run_config("duality_d2.cfg");
        const bool ok = checks_pass(duality, {"duality_agreement", "duality_refinement"}, detail);
        detail += "; " + check_detail(duality, "duality_agreement l=12") + "; " +
                  check_detail(duality, "duality_refinement l=12");
        return ok;
    });

    criterion(6, "sphere configurations", 60, [](std::string& detail) {
        int ok = 0, total = 0;
        for (auto [k, d] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}})
            for (double r : {0.5, 1.0, 2.0}) {
                ++total;
                const auto c = build_sphere_configuration(k, d, r);
                if (c.check.ok()) ++ok;
                else detail += " failed (k=" + std::to_string(k) + ", d=" + std::to_string(d) + ", r=" + std::to_string(r) + ")";
            }
        detail = std::to_string(ok) + "/" + std::to_string(total) + " configurations pass" + detail;
        return ok == total;
    });

    criterion(7, "weak stabilization", 600, [](std::string& detail) {
        const double r = 0.5;
        // Radii 2r .. 20r; a trace counts when its cost is constant from some rho <= 10r onward.
        std::vector<double> rhos;
        for (double rho = 2 * r; rho <= 20 * r + 1e-9; rho += 0.25) rhos.push_back(rho);
        int stable = 0;
        std::size_t steps = 0, violations = 0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto t = weak_stabilization_trace(derive_seed(7, "acceptance-trace", seed), 1.0, 2, r, 1, rhos);
            stable += t.stabilization_radius() <= 10 * r;
            steps += t.steps.size() - 1;
            violations += t.kernel_monotonicity_violations();
        }
        detail = std::to_string(stable) + "/200 seeds stabilize by rho = 10r; " + std::to_string(violations) + "/" +
                 std::to_string(steps) + " step pairs break kernel monotonicity";
        return stable >= 190 && violations == 0;
    });

    criterion(8, "add-one cost bound", 120, [](std::string& detail) {
        auto rng = make_rng(8, "acceptance-addone");
        std::uniform_int_distribution<int> npts(0, 40), dim(2, 3);
        std::uniform_real_distribution<double> rad(0.2, 1.2), u(-2.5, 2.5);
        int ok = 0;
        for (int t = 0; t < 500; ++t) {
            const int d = dim(rng);
            const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1));
            const auto s = sample_binomial(npts(rng), DensitySpec::uniform(Window::cube(d, 5)), rng());
            std::vector<double> x(static_cast<std::size_t>(d));
            for (auto& v : x) v = u(rng);
            const auto rec = add_one_cost(s, x, rad(rng), k, {}, true);
            ok += rec.verified && rec.within_bound();
        }
        detail = std::to_string(ok) + "/500 probes within 2 N(B_x(2r))^(k+1), 1 <= k <= d - 1";
        return ok == 500;
    });

    criterion(9, "variance scaling", 1800, [](std::string& detail) {
        const auto r = run_config("variance_d2.cfg");
        return checks_pass(r, {"variance_factor2", "variance_lower_bound"}, detail);
    });

    ExperimentResult clt;
    criterion(10, "central limit theorem", 2700, [&](std::string& detail) {
        clt = run_config("clt_d2.cfg");
        const bool ok = checks_pass(clt, {"ks ", "skewness ", "kurtosis "}, detail);
        detail += "; " + check_detail(clt, "gaussian_calibration");
        return ok;
    });

    criterion(11, "concentration tails", 1800, [](std::string& detail) {
        const auto r = run_config("concentration_d2.cfg");
        const bool ok = checks_pass(r, {"tail_nonincreasing"}, detail);
        detail += "; tails " + check_detail(r, "tail_nonincreasing binomial k=1 eps=0.1 a=1");
        return ok;
    });

    criterion(12, "coupling", 900, [](std::string& detail) {
        const auto r = run_config("coupling_d2.cfg");
        const bool ok = checks_pass(r, {"majorant_dominates", "difference_shrinks k=1"}, detail);
        detail += "; " + check_detail(r, "difference_shrinks k=1");
        return ok;
    });

    criterion(13, "determinism across reruns and worker counts", 0, [&](std::string& detail) {
        int same = 0, total = 0;
        auto compare = [&](const ExperimentResult& a, const ExperimentResult& b) {
            ++total;
            same += records_csv(a) == records_csv(b);
        };
        for (const char* name : {"strong_law_d2.cfg", "simplex_law_d2.cfg"}) {
            const auto one = run_config(name, 1);
            compare(one, run_config(name, 1));
            compare(one, run_config(name, 8));
        }
        compare(duality, run_config("duality_d2.cfg", 8));
        compare(clt, run_config("clt_d2.cfg", 8));
        detail = std::to_string(same) + "/" + std::to_string(total) + " reruns give byte-identical records.csv";
        return same == total;
    });

    // Criterion 4 covers every complex whose homology the suite computed directly,
    // plus the per-replication Euler check of the strong-law run.
    criterion(4, "Euler consistency", 0, [](std::string& detail) {
        const auto r = run_config("strong_law_d2.cfg");
        const auto* c = &r.checks.front();
        for (const auto& x : r.checks)
            if (x.name == "euler_consistency") c = &x;
        detail = std::to_string(euler.checked - euler.failed) + "/" + std::to_string(euler.checked) +
                 " complexes; strong-law replications " + c->detail;
        return euler.failed == 0 && c->name == "euler_consistency" && c->passed;
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
