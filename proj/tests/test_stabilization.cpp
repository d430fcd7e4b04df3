#include "doctest.h"

#include "cechlab/stabilization.hpp"
#include "cechlab/rng.hpp"
#include "json.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace cechlab;

namespace {

PointSample manual(int d, const std::vector<std::vector<double>>& pts) {
    PointSample s(d, Window::cube(d, 1000));
    for (const auto& p : pts) s.push_back(p);
    return s;
}

std::vector<double> circle_point(double radius, int i, int m) {
    const double a = 2 * std::numbers::pi * i / m;
    return {radius * std::cos(a), radius * std::sin(a)};
}

std::vector<double> linspace(double step, int count) {
    std::vector<double> out;
    for (int i = 1; i <= count; ++i) out.push_back(step * i);
    return out;
}

}  // namespace

TEST_CASE("add-one cost examples") {
    const PointSample empty(2, Window::cube(2, 10));
    const std::vector<double> x{0.3, -0.2};
    CHECK(add_one_cost(empty, x, 1.0, 0, {}, true).cost == 1);
    CHECK(add_one_cost(empty, x, 1.0, 1, {}, true).cost == 0);

    // Seven of the eight circle points; the eighth closes the loop.
    std::vector<std::vector<double>> ring;
    for (int i = 0; i < 7; ++i) ring.push_back(circle_point(1.5, i, 8));
    const auto closing = add_one_cost(manual(2, ring), circle_point(1.5, 7, 8), 1.0, 1, {}, true);
    CHECK(closing.cost == 1);
    CHECK(closing.local_count == 2);

    // A hollow triangle coned off by its centre.
    const double side = 1.9;
    const auto tri = manual(2, {{0, 0}, {side, 0}, {side / 2, side * std::sqrt(3.0) / 2}});
    const std::vector<double> centre{side / 2, side / (2 * std::sqrt(3.0))};
    CHECK(betti_number(build_cech(tri, 1.0, 2), 1) == 1);
    const auto fill = add_one_cost(tri, centre, 1.0, 1, {}, true);
    CHECK(fill.cost == -1);
    CHECK(fill.within_bound());
    CHECK(add_one_cost(tri, centre, 1.0, 1, FieldSpec{5}, true).cost == -1);
}

TEST_CASE("duplicate points are rejected") {
    const auto s = manual(2, {{0, 0}, {1, 1}});
    CHECK_THROWS_AS(add_one_cost(s, std::vector<double>{1, 1}, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(add_one_cost(s, std::vector<double>{1, 1, 0}, 1.0, 1), std::invalid_argument);
}

TEST_CASE("incremental add-one cost matches recomputation and the local bound") {
    auto rng = make_rng(21, "addone");
    std::uniform_int_distribution<int> npts(0, 40), dim(2, 3);
    std::uniform_real_distribution<double> rad(0.2, 1.2), u(-2.5, 2.5);
    int checked = 0, bounded = 0;
    for (int t = 0; t < 500; ++t) {
        const int d = dim(rng);
        const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1));
        const auto s = sample_binomial(npts(rng), DensitySpec::uniform(Window::cube(d, 5)), 500 + t);
        std::vector<double> x(static_cast<std::size_t>(d));
        for (auto& v : x) v = u(rng);
        const FieldSpec f{t % 3 == 0 ? 3u : 2u};
        const auto rec = add_one_cost(s, x, rad(rng), k, f, true);
        checked += rec.verified;
        bounded += rec.within_bound();
    }
    CHECK(checked == 500);
    CHECK(bounded == 500);
}

TEST_CASE("one context serves many queries") {
    const auto s = sample_homogeneous_poisson(1, Window::cube(2, 8), 4);
    const AddOneCostContext ctx(s, 0.6, 1);
    CHECK(ctx.base_betti() == betti_number(build_cech(s, 0.6, 2), 1));
    auto rng = make_rng(4, "queries");
    std::uniform_real_distribution<double> u(-4, 4);
    for (int t = 0; t < 50; ++t) {
        const std::vector<double> x{u(rng), u(rng)};
        CHECK(ctx.cost(x, true).verified);
    }
}

TEST_CASE("weak stabilization trace with an empty neighbourhood") {
    // Points far from the origin still form a cycle of their own.
    std::vector<std::vector<double>> far;
    for (int i = 0; i < 8; ++i) {
        auto p = circle_point(1.5, i, 8);
        p[0] += 6;
        far.push_back(p);
    }
    const auto s = manual(2, far);
    const auto rhos = linspace(1.0, 10);
    const auto t0 = weak_stabilization_trace(s, 0.5, 0, rhos);
    const auto t1 = weak_stabilization_trace(s, 0.5, 1, rhos);
    for (const auto& st : t0.steps) CHECK(st.cost == 1);
    for (const auto& st : t1.steps) CHECK(st.cost == 0);
    CHECK(t0.stabilization_radius() == 1.0);
    CHECK(t1.stabilized());
    CHECK(t1.decomposition_holds());
}

TEST_CASE("trace invariants on Poisson samples") {
    const double r = 0.5;
    const auto rhos = linspace(2 * r, 10);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        for (int k : {0, 1}) {
            const auto t = weak_stabilization_trace(seed, 1.0, 2, r, k, rhos);
            CHECK(t.decomposition_holds());
            CHECK(t.kernels_monotone());
            CHECK(t.stabilization_radius() <= rhos.back());
            // Each step agrees with a direct add-one cost on the restriction.
            const auto s = sample_homogeneous_poisson(1.0, Window::ball(2, rhos.back()), seed);
            for (std::size_t i = 0; i < t.steps.size(); i += 3) {
                const auto part = restrict_to(s, Window::ball(2, t.steps[i].rho));
                CHECK(add_one_cost(part, std::vector<double>{0, 0}, r, k).cost == t.steps[i].cost);
            }
        }
    }
    const auto t = weak_stabilization_trace(3, 1.0, 2, r, 1, rhos);
    CHECK(t.to_csv().rfind("seed,rho,cost,kernel_k,kernel_k_minus_1\n", 0) == 0);
    CHECK_THROWS(weak_stabilization_trace(3, 1.0, 2, r, 1, std::vector<double>{2.0, 1.0}));
}

TEST_CASE("strong stabilization probe") {
    const double r = 0.3;
    int agree = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const StrongStabilizationProbe probe(seed, 1.0, 2, r, 1);
        CHECK(probe.base_cost() == probe.cluster_cost());
        const std::vector<std::vector<std::vector<double>>> none{{}};
        CHECK(probe.check(none));
        std::vector<std::vector<std::vector<double>>> rings;
        for (int i = 0; i < 5; ++i) {
            const double rad = probe.radius() + 0.05 + 0.7 * r * i;
            const auto m = static_cast<std::size_t>(std::ceil(2 * std::numbers::pi * rad / (1.5 * r)));
            rings.push_back(adversarial_ring(2, rad, m, 0.1 * i));
        }
        agree += probe.check(rings);
        if (seed == 0) {
            auto bad = rings[0];
            bad.push_back({probe.radius() * 0.5, 0.0});
            CHECK_THROWS_AS(probe.cost_with(bad), std::invalid_argument);
        }
    }
    CHECK(agree == 50);
}

TEST_CASE("sphere configurations") {
    auto c = build_sphere_configuration(1, 2, 1.0);
    CHECK(c.m() == 8);
    CHECK(c.check.betti == std::vector<std::int64_t>{1, 1});
    for (const auto& z : c.points) CHECK(std::hypot(z[0], z[1]) == doctest::Approx(1.5));
    CHECK(c.check.min_norm - 1.0 > 0.25);
    CHECK(c.c_star > 0);
    CHECK(c.epsilon > 0);

    c = build_sphere_configuration(1, 3, 1.0);
    CHECK(c.check.betti == std::vector<std::int64_t>{1, 1, 0});
    c = build_sphere_configuration(2, 3, 1.0);
    CHECK(c.check.betti == std::vector<std::int64_t>{1, 0, 1});

    for (const auto [k, d] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}})
        for (double r : {0.5, 1.0, 2.0}) {
            const auto cfg = build_sphere_configuration(k, d, r);
            CHECK(cfg.check.ok());
            // Independent dense-rank Betti numbers.
            PointSample s(d, Window::ball(d, 10 * r));
            for (const auto& p : cfg.points) s.push_back(p);
            const auto dense = oracle::dense_betti(build_cech(s, r, d), 2);
            for (int j = 0; j < d; ++j) CHECK(dense[static_cast<std::size_t>(j)] == ((j == 0 || j == k) ? 1 : 0));
            for (const auto& p : cfg.points) {
                double n2 = 0;
                for (double v : p) n2 += v * v;
                CHECK(std::sqrt(n2) > 1.25 * r);
                CHECK(std::sqrt(n2) <= 2 * r);
            }
        }

    const auto j = nlohmann::json::parse(c.manifest_json());
    CHECK(j["m"] == c.m());
    CHECK(j["k"] == 2);
    CHECK(c.to_csv().rfind("i,x0,x1,x2\n", 0) == 0);
    CHECK_THROWS(build_sphere_configuration(2, 2, 1.0));
    CHECK_THROWS(build_sphere_configuration(0, 2, 1.0));
}

TEST_CASE("variance lower-bound hypothesis") {
    const auto f = DensitySpec::uniform(Window::cube(2, 1));
    const auto rep = variance_lowerbound_hypothesis_check(500, f, 1, 1.0, 300, 17);
    CHECK(rep.samples == 300);
    CHECK(rep.sign_violations == 0);
    CHECK(rep.void_r_violations == 0);
    CHECK(rep.void_2r_violations == 0);
    CHECK(rep.mean_cost < 0);
    CHECK(std::abs(rep.mean_cost) > 3 * rep.std_error);
    const double se = std::sqrt(rep.void_bound * (1 - rep.void_bound) / rep.samples);
    CHECK(rep.void_r_frequency() >= rep.void_bound - 3 * se);
    CHECK_THROWS(variance_lowerbound_hypothesis_check(5, f, 1, 1.0, 1, 1));
}

TEST_CASE("packing lower bounds") {
    CHECK(packing_lower_bound(1).count() == 2);
    const auto p2 = packing_lower_bound(2);
    CHECK(p2.count() == 5);
    CHECK(p2.min_distance > 2);
    CHECK(packing_lower_bound(3).count() == 12);
}
