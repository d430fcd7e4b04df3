#include "doctest.h"

#include "cechlab/point_process.hpp"
#include "cechlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace cechlab;

namespace {

struct Moments {
    double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(v.size() - 1);
    return m;
}

double poisson_log_pmf(double mean, long k) { return k * std::log(mean) - mean - std::lgamma(k + 1.0); }

// Regularized upper incomplete gamma Q(a, x) by series / continued fraction.
double gamma_q(double a, double x) {
    if (x <= 0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1) {
        double sum = 1.0 / a, term = sum;
        for (int n = 1; n < 1000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (term < sum * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1 - a, c = 1e300, d = 1 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

// Kolmogorov distribution tail P(sqrt(n) D > t).
double ks_pvalue(double d, std::size_t n) {
    const double t = d * (std::sqrt(static_cast<double>(n)) + 0.12 + 0.11 / std::sqrt(static_cast<double>(n)));
    double p = 0;
    for (int k = 1; k < 100; ++k) p += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * t * t);
    return std::clamp(p, 0.0, 1.0);
}

double ks_uniform(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
    return d;
}

DensitySpec triangle_density() {
    // f(x, y) = 2x on the unit square [0,1)^2.
    return DensitySpec::tabulate(Window::box({0, 0}, {1, 1}), 3, [](std::span<const double> x) { return 2 * x[0]; },
                                 "triangle");
}

}  // namespace

TEST_CASE("window construction and membership") {
    CHECK_THROWS_AS(Window::cube(2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Window::ball(2, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(Window::box({0, 0}, {1, 0}), std::invalid_argument);
    const Window w = Window::cube(2, 10);
    CHECK(w.volume() == doctest::Approx(100));
    const double lo[] = {-5, -5}, hi[] = {5, 0};
    CHECK(w.contains(lo));
    CHECK_FALSE(w.contains(hi));
    CHECK(Window::parse(2, "cube:10") == w);
    CHECK(Window::parse(3, "ball:2").volume() == doctest::Approx(4.0 / 3 * std::numbers::pi * 8));
    CHECK(Window::parse(2, "box:0,1,0,2").volume() == doctest::Approx(2));
    CHECK_THROWS(Window::parse(2, "torus:3"));
    CHECK_THROWS(sample_homogeneous_poisson(1.0, Window::parse(2, "cube:0"), 1));
}

TEST_CASE("homogeneous Poisson count moments") {
    const Window w2 = Window::cube(2, 10);
    std::vector<double> counts;
    for (std::uint64_t s = 0; s < 10000; ++s) counts.push_back(static_cast<double>(sample_homogeneous_poisson(1, w2, s).size()));
    const auto m = moments(counts);
    CHECK(std::abs(m.mean - 100) < 3 * std::sqrt(100.0 / counts.size()));

    const Window w3 = Window::cube(3, 5);
    counts.clear();
    for (std::uint64_t s = 0; s < 10000; ++s) counts.push_back(static_cast<double>(sample_homogeneous_poisson(2, w3, s).size()));
    CHECK(std::abs(moments(counts).var - 250) < 0.05 * 250);
    CHECK_THROWS(sample_homogeneous_poisson(-1, w2, 0));
    CHECK_THROWS(sample_homogeneous_poisson(0, w2, 0));
}

TEST_CASE("Poisson samples are deterministic, simple and inside the window") {
    const Window w = Window::cube(2, 10);
    const auto a = sample_homogeneous_poisson(1.5, w, 42);
    const auto b = sample_homogeneous_poisson(1.5, w, 42);
    CHECK(a == b);
    CHECK(a.is_simple());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(w.contains(a.point(i)));
    CHECK_FALSE(a == sample_homogeneous_poisson(1.5, w, 43));
}

TEST_CASE("counts on disjoint halves are uncorrelated") {
    const Window w = Window::cube(2, 6);
    const Window left = Window::box({-3, -3}, {0, 3});
    const Window right = Window::box({0, -3}, {3, 3});
    std::vector<double> a, b;
    for (std::uint64_t s = 0; s < 10000; ++s) {
        const auto p = sample_homogeneous_poisson(1, w, s);
        a.push_back(static_cast<double>(restrict_to(p, left).size()));
        b.push_back(static_cast<double>(restrict_to(p, right).size()));
    }
    const auto ma = moments(a), mb = moments(b);
    double cov = 0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
    cov /= static_cast<double>(a.size() - 1);
    CHECK(std::abs(cov / std::sqrt(ma.var * mb.var)) < 0.05);
}

TEST_CASE("binomial samples") {
    const auto unit = DensitySpec::uniform(Window::box({0, 0}, {1, 1}));
    CHECK(sample_binomial(0, unit, 3).size() == 0);
    const auto s = sample_binomial(1000, unit, 3);
    REQUIRE(s.size() == 1000);
    std::size_t left = 0;
    for (std::size_t i = 0; i < s.size(); ++i) left += s.point(i)[0] < 0.5;
    CHECK(std::abs(static_cast<double>(left) - 500) <= 3 * std::sqrt(250.0));

    const auto tri = triangle_density();
    CHECK_FALSE(tri.bounded_below());
    CHECK(tri.integral() == doctest::Approx(1.0).epsilon(1e-9));
    const auto t = sample_binomial(500, tri, 11);
    std::vector<double> xs;
    for (std::size_t i = 0; i < t.size(); ++i) xs.push_back(t.point(i)[0]);
    // Var X = E X^2 - (E X)^2 = 1/2 - 4/9.
    CHECK(std::abs(moments(xs).mean - 2.0 / 3) < 3 * std::sqrt((0.5 - 4.0 / 9) / 500));
}

TEST_CASE("density validation") {
    const Window sq = Window::box({0, 0}, {1, 1});
    CHECK_THROWS(DensitySpec::tabulated(sq, 2, {1, 1, 1, 3}));    // integrates to 1.5
    CHECK_THROWS(DensitySpec::tabulated(sq, 2, {1, 1, 1}));       // wrong node count
    CHECK_THROWS(DensitySpec::tabulated(sq, 2, {2, -0.5, 1.5, 1})); // negative
    const auto f = DensitySpec::tabulated(sq, 2, {0.5, 0.5, 1.5, 1.5});
    CHECK(f.bounded_below());
    CHECK(f.f_lower() == doctest::Approx(0.5));
    CHECK(f.f_upper() == doctest::Approx(1.5 * 1.01));
    const double mid[] = {0.5, 0.3};
    CHECK(f(mid) == doctest::Approx(1.0));
    CHECK(DensitySpec::uniform(sq).f_upper() == 1.0);
    const double c[] = {0.5, 0.5};
    CHECK(DensitySpec::uniform(sq).ball_mass(c, 0.25) == doctest::Approx(std::numbers::pi / 16).epsilon(1e-3));
}

TEST_CASE("inhomogeneous Poisson by thinning") {
    const auto unit = DensitySpec::uniform(Window::box({0, 0}, {1, 1}));
    // Uniform density: identical to the homogeneous sampler at intensity n f^*.
    for (std::uint64_t s = 0; s < 20; ++s)
        CHECK(sample_inhomogeneous_poisson(100, unit, s).coords() ==
              sample_homogeneous_poisson(100 * unit.f_upper(), unit.support(), s).coords());

    // Count distribution against Poisson(100): chi-square over bins with
    // expected count >= 5.
    const int reps = 10000;
    std::vector<int> hist(400, 0);
    for (int s = 0; s < reps; ++s) ++hist[sample_inhomogeneous_poisson(100, unit, s).size()];
    std::vector<double> expect(400);
    for (int k = 0; k < 400; ++k) expect[k] = reps * std::exp(poisson_log_pmf(100, k));
    double chi2 = 0, obs_acc = 0, exp_acc = 0;
    int bins = 0;
    for (int k = 0; k < 400; ++k) {
        obs_acc += hist[k];
        exp_acc += expect[k];
        if (exp_acc >= 5 && (k == 399 || std::accumulate(expect.begin() + k + 1, expect.end(), 0.0) >= 5)) {
            chi2 += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
            obs_acc = exp_acc = 0;
            ++bins;
        }
    }
    if (exp_acc > 0) chi2 += (obs_acc - exp_acc) * (obs_acc - exp_acc) / std::max(exp_acc, 1e-12);
    CHECK(gamma_q((bins - 1) / 2.0, chi2 / 2) > 0.01);

    const auto tri = triangle_density();
    std::vector<double> counts;
    for (int s = 0; s < 2000; ++s) counts.push_back(static_cast<double>(sample_inhomogeneous_poisson(200, tri, s).size()));
    CHECK(std::abs(moments(counts).mean - 200) < 3 * std::sqrt(200.0 / counts.size()));
}

TEST_CASE("extended binomial on window sequences") {
    const auto cubes = WindowSequence::cubes(2);
    for (std::int64_t n : {1, 10, 1000}) CHECK(cubes.at(n).volume() == doctest::Approx(static_cast<double>(n)).epsilon(1e-14));
    for (std::int64_t n : {1, 10, 1000}) CHECK(WindowSequence::balls(3).at(n).volume() == doctest::Approx(static_cast<double>(n)).epsilon(1e-14));
    const auto one = sample_extended_binomial(1, WindowSequence::cubes(3), 5);
    REQUIRE(one.size() == 1);
    for (double x : one.point(0)) CHECK((x >= -0.5 && x < 0.5));

    std::vector<double> u0, u1;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto p = sample_extended_binomial(100, cubes, s);
        CHECK(p.tag().count == 100);
        for (std::size_t i = 0; i < p.size(); ++i) {
            u0.push_back(p.point(i)[0] / 10 + 0.5);
            u1.push_back(p.point(i)[1] / 10 + 0.5);
        }
    }
    CHECK(ks_pvalue(ks_uniform(u0), u0.size()) > 0.01);
    CHECK(ks_pvalue(ks_uniform(u1), u1.size()) > 0.01);

    // Boundary layer relative volume decreases along doublings.
    double prev = 1e300;
    for (std::int64_t n = 100; n <= 1600; n *= 2) {
        const double rel = cubes.boundary_layer_volume(n, 1.0) / static_cast<double>(n);
        CHECK(rel < prev);
        prev = rel;
    }
    for (std::int64_t n : {1, 100, 100000}) {
        const Window w = cubes.at(n);
        CHECK(std::sqrt(2.0) * w.side() <= cubes.diameter_constant() * std::pow(double(n), cubes.diameter_constant()));
    }
}

TEST_CASE("coupled Poisson and binomial samples") {
    const auto unit = DensitySpec::uniform(Window::box({0, 0}, {1, 1}));
    // E|N - n| for N ~ Poisson(n), by exact summation.
    double expect = 0;
    for (long k = 0; k < 2000; ++k) expect += std::abs(k - 400.0) * std::exp(poisson_log_pmf(400, k));
    CHECK(expect == doctest::Approx(std::sqrt(2 * 400 / std::numbers::pi)).epsilon(0.01));

    double total = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto [p, b] = sample_coupled_poisson_binomial(400, unit, s);
        const std::size_t m = std::min(p.size(), b.size());
        REQUIRE(b.size() == 400);
        CHECK(std::equal(p.coords().begin(), p.coords().begin() + 2 * m, b.coords().begin()));
        total += std::abs(static_cast<double>(p.size()) - 400);
    }
    CHECK(std::abs(total / 1000 - expect) < 0.1 * expect);

    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto [p, b] = sample_coupled_poisson_binomial(1, unit, s);
        if (p.size() >= 1) CHECK(std::equal(b.coords().begin(), b.coords().end(), p.coords().begin()));
    }
}

TEST_CASE("Ginibre eigenvalues") {
    CHECK(sample_ginibre(1, 9).size() == 1);
    CHECK_THROWS(sample_ginibre(4097, 1));
    CHECK_THROWS(sample_ginibre(10, 1, 8));
    CHECK(sample_ginibre(16, 3) == sample_ginibre(16, 3));

    // Finite-N density (1/pi) exp(-|z|^2) sum_{k<N} |z|^{2k}/k! gives
    // E sum |z|^2 = N(N+1)/2 and E sum |z|^4 = sum (k+1)(k+2), before scaling.
    {
        const int n = 8, reps = 4000;
        std::vector<double> m2, m4;
        for (int s = 0; s < reps; ++s) {
            const auto p = sample_ginibre(n, 1000 + s);
            double a = 0, b = 0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double q = std::numbers::pi * (p.point(i)[0] * p.point(i)[0] + p.point(i)[1] * p.point(i)[1]);
                a += q;
                b += q * q;
            }
            m2.push_back(a);
            m4.push_back(b);
        }
        double e4 = 0;
        for (int k = 0; k < n; ++k) e4 += (k + 1.0) * (k + 2.0);
        const auto s2 = moments(m2), s4 = moments(m4);
        CHECK(std::abs(s2.mean - n * (n + 1) / 2.0) < 3.5 * std::sqrt(s2.var / reps));
        CHECK(std::abs(s4.mean - e4) < 3.5 * std::sqrt(s4.var / reps));
    }

    const std::size_t N = 256;
    const double half = 0.5 * std::sqrt(N / std::numbers::pi);
    const double r0 = 0.2, dr = 0.05;
    double inside = 0, pairs = 0, centres = 0;
    const int reps = 200;
    for (int s = 0; s < reps; ++s) {
        const auto p = sample_ginibre(N, static_cast<std::uint64_t>(s));
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto x = p.point(i);
            if (std::hypot(x[0], x[1]) > half) continue;
            inside += 1;
            centres += 1;
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (j == i) continue;
                const auto y = p.point(j);
                const double dd = std::hypot(x[0] - y[0], x[1] - y[1]);
                pairs += (dd >= r0 - dr / 2 && dd < r0 + dr / 2);
            }
        }
    }
    CHECK(std::abs(inside / reps - N / 4.0) < 0.05 * N / 4.0);
    // Ring density relative to unit intensity.
    const double ring = std::numbers::pi * ((r0 + dr / 2) * (r0 + dr / 2) - (r0 - dr / 2) * (r0 - dr / 2));
    const double g = pairs / (centres * ring);
    CHECK(g < 1.0);
    CHECK(std::abs(g - (1 - std::exp(-std::numbers::pi * r0 * r0))) < 0.1);
}

TEST_CASE("restriction") {
    const auto p = sample_homogeneous_poisson(1, Window::cube(2, 10), 1);
    CHECK(restrict_to(p, p.window()).coords() == p.coords());
    CHECK(restrict_to(p, Window::box({20, 20}, {30, 30})).empty());

    PointSample grid(2, Window::box({0, 0}, {10, 10}));
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double x[] = {double(i), double(j)};
            grid.push_back(x);
        }
    const auto q = restrict_to(grid, Window::box({0, 0}, {5, 5}));
    CHECK(q.size() == 25);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK((q.point(i)[0] < 5 && q.point(i)[1] < 5));
}

TEST_CASE("serialization round trip") {
    const auto p = sample_homogeneous_poisson(1, Window::cube(3, 3), 17);
    const auto csv = to_csv(p);
    CHECK(csv.rfind("x0,x1,x2\n", 0) == 0);
    const auto back = read_csv(csv);
    CHECK(back.coords() == p.coords());
    CHECK(read_csv("", 2).empty());
    CHECK_THROWS(read_csv("x0,x1\n1,2\n3\n"));
    CHECK_THROWS(read_csv("x0,x1\n1,2\n1,2\n"));
    CHECK_THROWS(read_csv("x0,x1\n1,abc\n"));
    const auto js = to_json_envelope(p);
    CHECK(js.find("\"seed\": 17") != std::string::npos);
    CHECK(js.find("poisson") != std::string::npos);
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, "coords", 0) != derive_seed(1, "count", 0));
    CHECK(derive_seed(1, "coords", 0) != derive_seed(1, "coords", 1));
    CHECK(derive_seed(1, "coords", 0) != derive_seed(2, "coords", 0));
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
