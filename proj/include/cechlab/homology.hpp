#pragma once

#include "cechlab/complex.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cechlab {

/// Coefficient field GF(p).
struct FieldSpec {
    std::uint32_t p = 2;

    /// Throws std::invalid_argument unless p is a prime below 2^16.
    void validate() const;
    std::uint32_t add(std::uint32_t a, std::uint32_t b) const { return (a + b) % p; }
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const { return (a + p - b) % p; }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
        return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) % p);
    }
    std::uint32_t inv(std::uint32_t a) const;
    std::uint32_t neg(std::uint32_t a) const { return a == 0 ? 0 : p - a; }
};

struct ChainEntry {
    std::uint32_t index;
    std::uint32_t coeff;
    friend bool operator==(const ChainEntry&, const ChainEntry&) = default;
};

/// Sparse vector over GF(p): entries sorted by index, coefficients nonzero.
using Chain = std::vector<ChainEntry>;

/// y += a * x over the field.
void chain_axpy(const FieldSpec& f, std::uint32_t a, const Chain& x, Chain& y);

/// Matrix of the boundary map from k-chains to (k-1)-chains; column i is the
/// boundary of the i-th k-simplex, rows indexed by the (k-1)-simplex order.
struct BoundaryMatrix {
    int k = 0;
    std::size_t rows = 0;
    FieldSpec field;
    std::vector<Chain> columns;
};

BoundaryMatrix boundary_matrix(const SimplicialComplex& c, int k, const FieldSpec& field = {});

/// Product A * B of sparse column matrices (B's rows index A's columns).
std::vector<Chain> multiply(const FieldSpec& f, std::span<const Chain> a, std::span<const Chain> b);

/// Gaussian column elimination with a pivot (lowest nonzero row) lookup.
/// Columns may be fed one at a time; the stored columns stay in echelon form
/// with pairwise distinct pivots.
class ColumnReducer {
public:
    explicit ColumnReducer(FieldSpec field = {}) : field_(field) {}

    /// Reduces `col` against the stored columns. Returns true, and keeps the
    /// reduced column, when it is independent of them.
    bool add(Chain col);

    /// As add(), also returning the combination of previously added inputs
    /// (by insertion order) that cancels `col` when it is dependent.
    bool add_tracked(Chain col, Chain* dependency);

    std::size_t rank() const noexcept { return columns_.size(); }

    /// Unique representative of v modulo the span: zero in every pivot row.
    Chain normal_form(Chain v) const;
    bool in_span(const Chain& v) const { return normal_form(v).empty(); }

    const FieldSpec& field() const noexcept { return field_; }

private:
    const Chain* pivot_column(std::uint32_t row) const;
    std::size_t pivot_slot(std::uint32_t row) const;

    FieldSpec field_;
    std::vector<Chain> columns_;
    std::vector<Chain> history_;          // input combination per stored column (tracked mode)
    std::vector<std::int64_t> pivot_of_;  // row -> stored column, -1 when none
    std::size_t inputs_ = 0;
};

/// Rank of the boundary map of dimension k.
std::size_t boundary_rank(const SimplicialComplex& c, int k, const FieldSpec& field = {});

struct BettiVector {
    /// beta_0 .. beta_{k_cap - 1}.
    std::vector<std::int64_t> betti;
    /// rank of the boundary map of dimension k, k = 0..k_cap (rank at 0 is 0).
    std::vector<std::size_t> ranks;
    std::vector<std::size_t> counts;
    /// Homology of the truncated complex in its top dimension k_cap.
    std::int64_t top_betti = 0;
    /// Alternating sum of simplex counts.
    std::int64_t euler = 0;

    std::int64_t at(std::size_t k) const { return k < betti.size() ? betti[k] : 0; }
    /// Alternating sum of betti plus the top term; equals `euler` for every
    /// finite chain complex.
    std::int64_t euler_from_betti() const;
};

BettiVector betti_numbers(const SimplicialComplex& c, const FieldSpec& field = {});

/// beta_k alone; needs k_cap >= k + 1.
std::int64_t betti_number(const SimplicialComplex& c, int k, const FieldSpec& field = {});

std::int64_t euler_characteristic(const SimplicialComplex& c);

struct HomologyBasis {
    int k = 0;
    FieldSpec field;
    /// Cycles over the k-simplices of the complex (indices into level k).
    std::vector<Chain> representatives;
    /// Column of the boundary reduction each representative came from.
    std::vector<std::size_t> provenance;
};

HomologyBasis homology_basis(const SimplicialComplex& c, int k, const FieldSpec& field = {});

/// Rank of the kernel of H_k(sub) -> (+)_t H_k(sup_t), the map induced by the
/// inclusions. Throws std::invalid_argument if sub is not a subcomplex of
/// every target.
std::size_t induced_map_kernel_rank(const SimplicialComplex& sub, std::span<const SimplicialComplex> sups, int k,
                                    const FieldSpec& field = {});

struct BettiBoundCheck {
    std::int64_t difference = 0;  // beta_k(outer) - beta_k(inner)
    std::int64_t bound = 0;       // new k- and (k+1)-simplices
    std::int64_t slack = 0;       // bound - |difference|
    bool holds = false;
};

/// |beta_k(outer) - beta_k(inner)| <= #{k- and (k+1)-simplices of outer not in inner}.
BettiBoundCheck betti_difference_bound_check(const SimplicialComplex& inner, const SimplicialComplex& outer, int k,
                                             const FieldSpec& field = {});

/// The five terms of the Mayer-Vietoris rank identity for K1, K2 and
/// L = K1 n K2, each computed on its own.
struct MayerVietorisTerms {
    std::int64_t beta_union = 0;
    std::int64_t beta_first = 0;
    std::int64_t beta_second = 0;
    std::int64_t beta_intersection = 0;
    std::int64_t kernel_k = 0;
    std::int64_t kernel_k_minus_1 = 0;

    std::int64_t rhs() const {
        return beta_first + beta_second + kernel_k + kernel_k_minus_1 - beta_intersection;
    }
    bool holds() const { return beta_union == rhs(); }
};

MayerVietorisTerms mayer_vietoris_terms(const SimplicialComplex& first, const SimplicialComplex& second, int k,
                                        const FieldSpec& field = {});

}  // namespace cechlab
