#include "doctest.h"

#include "cechlab/homology.hpp"
#include "cechlab/rng.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace cechlab;

namespace {

SimplicialComplex closure_of(std::size_t n, int k_cap, std::vector<Simplex> s) {
    return SimplicialComplex::closure(n, k_cap, s);
}

SimplicialComplex hollow_triangle() { return closure_of(3, 2, {{0, 1}, {1, 2}, {0, 2}}); }

PointSample octahedron() {
    PointSample s(3, Window::cube(3, 4));
    for (int axis = 0; axis < 3; ++axis)
        for (double sign : {1.0, -1.0}) {
            std::vector<double> x(3, 0.0);
            x[axis] = sign;
            s.push_back(x);
        }
    return s;
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

SimplicialComplex random_cech(std::size_t max_points, Rng& rng) {
    std::uniform_int_distribution<std::size_t> nn(1, max_points);
    std::uniform_real_distribution<double> rr(0.05, 1.2);
    const auto s = sample_binomial(static_cast<std::int64_t>(nn(rng)), DensitySpec::uniform(Window::cube(2, 3)), rng());
    return build_cech(s, rr(rng), 2);
}

std::vector<long> as_long(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

// Rank of the columns over the field by the dense oracle.
std::size_t chain_rank(const std::vector<Chain>& cols, std::size_t rows, long p) {
    if (cols.empty() || rows == 0) return 0;
    std::vector<std::vector<long>> m(rows, std::vector<long>(cols.size(), 0));
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (const auto& e : cols[j]) m[e.index][j] = e.coeff;
    return oracle::dense_rank(m, p);
}

}  // namespace

TEST_CASE("field arithmetic") {
    CHECK_THROWS(FieldSpec{4}.validate());
    CHECK_THROWS(FieldSpec{1}.validate());
    FieldSpec{65521}.validate();
    const FieldSpec f{7};
    for (std::uint32_t a = 1; a < 7; ++a) CHECK(f.mul(a, f.inv(a)) == 1);
    Chain y{{0, 3}, {2, 1}};
    chain_axpy(f, 4, Chain{{0, 1}, {1, 2}}, y);
    CHECK(y == Chain{{1, 1}, {2, 1}});
}

TEST_CASE("boundary matrices") {
    const auto edge = closure_of(2, 1, {{0, 1}});
    CHECK(boundary_matrix(edge, 1, {3}).columns[0] == Chain{{0, 2}, {1, 1}});
    CHECK(boundary_matrix(edge, 1).columns[0] == Chain{{0, 1}, {1, 1}});
    CHECK(boundary_rank(hollow_triangle(), 1) == 2);
    CHECK_THROWS(boundary_matrix(edge, 2));

    Simplex all{0, 1, 2, 3};
    const auto full = closure_of(4, 3, {all});
    for (std::uint32_t p : {2u, 3u, 5u}) {
        const FieldSpec f{p};
        for (int k = 2; k <= 3; ++k) {
            const auto a = boundary_matrix(full, k - 1, f), b = boundary_matrix(full, k, f);
            for (const auto& col : multiply(f, a.columns, b.columns)) CHECK(col.empty());
        }
    }
    auto rng = make_rng(5, "dd");
    for (int t = 0; t < 100; ++t) {
        const auto c = random_cech(14, rng);
        const FieldSpec f{3};
        const auto a = boundary_matrix(c, 1, f), b = boundary_matrix(c, 2, f);
        for (const auto& col : multiply(f, a.columns, b.columns)) CHECK(col.empty());
    }
}

TEST_CASE("betti number examples") {
    const auto one = closure_of(1, 2, {{0}});
    CHECK(betti_numbers(one).betti == std::vector<std::int64_t>{1, 0});

    const auto oct = build_cech(octahedron(), 0.9, 3);
    CHECK(count_simplices(oct).counts == std::vector<std::size_t>{6, 12, 8, 0});
    const auto b = betti_numbers(oct);
    CHECK(b.betti == std::vector<std::int64_t>{1, 0, 1});
    CHECK(as_long(b.betti) == oracle::dense_betti(oct, 2));
    CHECK(b.euler == 2);
    CHECK(euler_characteristic(oct) == 2);
    CHECK(betti_numbers(oct, {3}).betti == std::vector<std::int64_t>{1, 0, 1});

    Simplex five{0, 1, 2, 3, 4};
    CHECK(euler_characteristic(closure_of(5, 4, {five})) == 1);
    CHECK(euler_characteristic(hollow_triangle()) == 0);
    CHECK(betti_numbers(hollow_triangle()).betti == std::vector<std::int64_t>{1, 1});
}

TEST_CASE("betti numbers against dense ranks") {
    auto rng = make_rng(17, "dense");
    for (int t = 0; t < 300; ++t) {
        const auto c = random_cech(14, rng);
        for (long p : {2L, 3L, 5L}) {
            const auto b = betti_numbers(c, {static_cast<std::uint32_t>(p)});
            CHECK(as_long(b.betti) == oracle::dense_betti(c, p));
            for (auto x : b.betti) CHECK(x >= 0);
            CHECK(b.euler == b.euler_from_betti());
            for (int k = 0; k + 1 <= c.k_cap(); ++k) CHECK(betti_number(c, k, {static_cast<std::uint32_t>(p)}) == b.at(k));
            for (int k = 1; k <= c.k_cap(); ++k)
                CHECK(boundary_rank(c, k, {static_cast<std::uint32_t>(p)}) == b.ranks[k]);
        }
    }
    for (int t = 0; t < 100; ++t) {
        const auto c = random_abstract(9, 4, 6, rng);
        CHECK(as_long(betti_numbers(c).betti) == oracle::dense_betti(c, 2));
        CHECK(as_long(betti_numbers(c, {3}).betti) == oracle::dense_betti(c, 3));
    }
}

TEST_CASE("rank is invariant under row permutation") {
    auto rng = make_rng(23, "perm");
    for (int t = 0; t < 50; ++t) {
        const auto s = sample_binomial(30, DensitySpec::uniform(Window::cube(2, 3)), rng());
        const auto c = build_cech(s, 0.8, 2);
        for (std::uint32_t p : {2u, 3u}) {
            const FieldSpec f{p};
            for (int k = 1; k <= 2; ++k) {
                const auto m = boundary_matrix(c, k, f);
                std::vector<std::uint32_t> perm(m.rows);
                std::iota(perm.begin(), perm.end(), 0u);
                std::shuffle(perm.begin(), perm.end(), rng);
                ColumnReducer red(f);
                for (auto col : m.columns) {
                    for (auto& e : col) e.index = perm[e.index];
                    std::sort(col.begin(), col.end(),
                              [](const ChainEntry& a, const ChainEntry& b) { return a.index < b.index; });
                    red.add(col);
                }
                CHECK(red.rank() == boundary_rank(c, k, f));
            }
        }
    }
}

TEST_CASE("homology bases") {
    auto basis = homology_basis(hollow_triangle(), 1);
    REQUIRE(basis.representatives.size() == 1);
    CHECK(basis.representatives[0].size() == 3);

    const auto two = closure_of(6, 2, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    CHECK(homology_basis(two, 1).representatives.size() == 2);
    CHECK(homology_basis(two, 0).representatives.size() == 2);
    CHECK_THROWS(homology_basis(two, 2));

    auto rng = make_rng(29, "basis");
    for (int t = 0; t < 200; ++t) {
        const auto c = random_cech(14, rng);
        for (std::uint32_t p : {2u, 3u}) {
            const FieldSpec f{p};
            for (int k = 0; k <= 1; ++k) {
                const auto b = homology_basis(c, k, f);
                CHECK(static_cast<std::int64_t>(b.representatives.size()) == betti_number(c, k, f));
                if (k >= 1) {
                    const auto dk = boundary_matrix(c, k, f);
                    for (const auto& col : multiply(f, dk.columns, b.representatives)) CHECK(col.empty());
                }
                // Augmented rank: adding the representatives to the boundaries raises the rank by beta_k.
                auto bnd = boundary_matrix(c, k + 1, f).columns;
                const auto base = chain_rank(bnd, c.count(k), p);
                bnd.insert(bnd.end(), b.representatives.begin(), b.representatives.end());
                CHECK(chain_rank(bnd, c.count(k), p) == base + b.representatives.size());
            }
        }
    }
}

TEST_CASE("induced map kernels") {
    const auto filled = closure_of(3, 2, {{0, 1, 2}});
    const SimplicialComplex targets[] = {filled};
    CHECK(induced_map_kernel_rank(hollow_triangle(), targets, 1) == 1);
    CHECK(induced_map_kernel_rank(hollow_triangle(), targets, 0) == 0);

    const auto verts = closure_of(2, 1, {{0}, {1}});
    const SimplicialComplex edge[] = {closure_of(2, 1, {{0, 1}})};
    CHECK(induced_map_kernel_rank(verts, edge, 0) == 1);

    const SimplicialComplex wrong[] = {closure_of(3, 2, {{0, 1}})};
    CHECK_THROWS(induced_map_kernel_rank(hollow_triangle(), wrong, 1));
}

TEST_CASE("Mayer-Vietoris rank identity on random decompositions") {
    auto rng = make_rng(31, "mv");
    std::uniform_int_distribution<std::size_t> nv(2, 12);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = nv(rng);
        const auto k1 = random_abstract(n, 3, 5, rng), k2 = random_abstract(n, 3, 5, rng);
        for (int k = 0; k <= 2; ++k) {
            for (std::uint32_t p : {2u, 3u}) {
                const auto terms = mayer_vietoris_terms(k1, k2, k, {p});
                CHECK(terms.holds());
                ++checked;
            }
        }
    }
    CHECK(checked == 1200);
}

TEST_CASE("Betti difference bound") {
    const auto c = build_cech(octahedron(), 0.9, 3);
    auto same = betti_difference_bound_check(c, c, 1);
    CHECK(same.difference == 0);
    CHECK(same.bound == 0);
    CHECK(same.holds);

    // Adding one k-simplex changes beta_k or beta_{k-1} by one and nothing else.
    const auto hollow = hollow_triangle();
    const auto filled = closure_of(3, 2, {{0, 1, 2}});
    const auto before = betti_numbers(hollow), after = betti_numbers(filled);
    CHECK(after.betti[1] - before.betti[1] == -1);
    CHECK(after.betti[0] == before.betti[0]);
    CHECK(betti_difference_bound_check(hollow, filled, 1).holds);
    CHECK_THROWS(betti_difference_bound_check(filled, hollow, 1));

    auto rng = make_rng(37, "nested");
    std::uniform_int_distribution<std::size_t> nv(3, 12);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = nv(rng);
        const auto inner = random_abstract(n, 3, 4, rng);
        const auto outer = complex_union(inner, random_abstract(n, 3, 3, rng));
        for (int k = 0; k <= 2; ++k) CHECK(betti_difference_bound_check(inner, outer, k).holds);
    }
}

TEST_CASE("GF(2) and GF(3) agree on planar Cech complexes") {
    auto rng = make_rng(41, "fields");
    int mismatches = 0;
    for (int t = 0; t < 100; ++t) {
        const auto s = sample_homogeneous_poisson(1, Window::cube(2, 6), rng());
        const auto c = build_cech(s, 0.7, 2);
        mismatches += betti_numbers(c, {2}).betti != betti_numbers(c, {3}).betti;
    }
    MESSAGE("GF(2)/GF(3) mismatches: " << mismatches);
    CHECK(mismatches == 0);
}
