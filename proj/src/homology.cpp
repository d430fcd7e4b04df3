#include "cechlab/homology.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cechlab {

namespace {

constexpr std::int64_t kNoPivot = -1;

bool is_prime(std::uint32_t p) {
    if (p < 2) return false;
    for (std::uint32_t q = 2; q * q <= p; ++q)
        if (p % q == 0) return false;
    return true;
}

// Face indices (into level k-1) of the i-th k-simplex, with the sign of the
// dropped position, sorted by index.
void faces_of(const SimplicialComplex& c, int k, std::size_t i, std::vector<Vertex>& buf,
              std::vector<std::pair<std::uint32_t, int>>& out) {
    out.clear();
    const auto sig = c.simplex(k, i);
    for (int drop = 0; drop <= k; ++drop) {
        buf.clear();
        for (int v = 0; v <= k; ++v)
            if (v != drop) buf.push_back(sig[v]);
        const auto idx = c.index_of(buf);
        if (!idx) throw std::logic_error("complex is not downward closed");
        out.emplace_back(static_cast<std::uint32_t>(*idx), (drop % 2 == 0) ? 1 : -1);
    }
    std::sort(out.begin(), out.end());
}

// Sorted-index columns over GF(2); addition is symmetric difference.
class Gf2Reducer {
public:
    explicit Gf2Reducer(std::size_t rows) : pivot_of_(rows, kNoPivot) {}

    bool add(std::vector<std::uint32_t> col) {
        while (!col.empty()) {
            const std::int64_t slot = pivot_of_[col.back()];
            if (slot == kNoPivot) break;
            const auto& pc = columns_[static_cast<std::size_t>(slot)];
            scratch_.clear();
            std::set_symmetric_difference(col.begin(), col.end(), pc.begin(), pc.end(), std::back_inserter(scratch_));
            col.swap(scratch_);
        }
        if (col.empty()) return false;
        pivot_of_[col.back()] = static_cast<std::int64_t>(columns_.size());
        columns_.push_back(std::move(col));
        return true;
    }

    std::size_t rank() const { return columns_.size(); }
    bool is_pivot(std::uint32_t row) const { return pivot_of_[row] != kNoPivot; }

private:
    std::vector<std::vector<std::uint32_t>> columns_;
    std::vector<std::int64_t> pivot_of_;
    std::vector<std::uint32_t> scratch_;
};

// Rank of the boundary map of dimension k. Columns flagged in `cleared` are
// skipped: they are known to be dependent on earlier columns. Rows that end
// up as pivots are flagged in `lows` when given.
std::size_t reduce_rank(const SimplicialComplex& c, int k, const FieldSpec& f, const std::vector<std::uint8_t>* cleared,
                        std::vector<std::uint8_t>* lows) {
    if (k <= 0 || k > c.k_cap()) {
        if (lows) lows->assign(c.count(k - 1), 0);
        return 0;
    }
    const std::size_t rows = c.count(k - 1);
    const std::size_t cols = c.count(k);
    std::vector<Vertex> buf;
    std::vector<std::pair<std::uint32_t, int>> faces;
    if (lows) lows->assign(rows, 0);
    if (f.p == 2) {
        Gf2Reducer red(rows);
        std::vector<std::uint32_t> col;
        for (std::size_t i = 0; i < cols; ++i) {
            if (cleared && (*cleared)[i]) continue;
            faces_of(c, k, i, buf, faces);
            col.clear();
            for (const auto& [row, sign] : faces) col.push_back(row);
            red.add(col);
        }
        if (lows)
            for (std::size_t r = 0; r < rows; ++r) (*lows)[r] = red.is_pivot(static_cast<std::uint32_t>(r)) ? 1 : 0;
        return red.rank();
    }
    ColumnReducer red(f);
    for (std::size_t i = 0; i < cols; ++i) {
        if (cleared && (*cleared)[i]) continue;
        faces_of(c, k, i, buf, faces);
        Chain col;
        col.reserve(faces.size());
        for (const auto& [row, sign] : faces) col.push_back({row, sign > 0 ? 1u : f.p - 1});
        red.add(std::move(col));
    }
    if (lows) {
        // Pivot rows are those where a unit vector is not reducible to itself.
        for (std::size_t r = 0; r < rows; ++r) {
            const Chain e{{static_cast<std::uint32_t>(r), 1}};
            const Chain nf = red.normal_form(e);
            (*lows)[r] = (nf.empty() || nf.back().index != r) ? 1 : 0;
        }
    }
    return red.rank();
}

// rank of the boundary map of dimension 1 from connected components.
std::size_t edge_rank(const SimplicialComplex& c) {
    if (c.k_cap() < 1) return 0;
    std::vector<std::uint32_t> parent(c.universe_size());
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::size_t merges = 0;
    for (std::size_t i = 0; i < c.count(1); ++i) {
        const auto e = c.simplex(1, i);
        const auto a = find(e[0]);
        const auto b = find(e[1]);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
            ++merges;
        }
    }
    return merges;
}

Chain boundary_column(const SimplicialComplex& c, int k, std::size_t i, const FieldSpec& f) {
    std::vector<Vertex> buf;
    std::vector<std::pair<std::uint32_t, int>> faces;
    faces_of(c, k, i, buf, faces);
    Chain col;
    col.reserve(faces.size());
    for (const auto& [row, sign] : faces) col.push_back({row, sign > 0 ? 1u : f.p - 1});
    return col;
}

ColumnReducer boundary_span(const SimplicialComplex& c, int k, const FieldSpec& f) {
    ColumnReducer red(f);
    if (k >= 1 && k <= c.k_cap())
        for (std::size_t i = 0; i < c.count(k); ++i) red.add(boundary_column(c, k, i, f));
    return red;
}

bool includes_up_to(const SimplicialComplex& sub, const SimplicialComplex& sup, int top) {
    if (sub.universe_size() != sup.universe_size()) return false;
    for (int j = 0; j <= std::min(top, sub.k_cap()); ++j) {
        if (sub.count(j) > 0 && j > sup.k_cap()) return false;
        for (std::size_t i = 0; i < sub.count(j); ++i)
            if (!sup.contains(sub.simplex(j, i))) return false;
    }
    return true;
}

}  // namespace

void FieldSpec::validate() const {
    if (p >= (1u << 16) || !is_prime(p))
        throw std::invalid_argument("field characteristic must be a prime below 65536, got " + std::to_string(p));
}

std::uint32_t FieldSpec::inv(std::uint32_t a) const {
    if (a % p == 0) throw std::domain_error("inverse of zero");
    std::uint64_t base = a % p, e = p - 2, out = 1;
    while (e) {
        if (e & 1) out = out * base % p;
        base = base * base % p;
        e >>= 1;
    }
    return static_cast<std::uint32_t>(out);
}

void chain_axpy(const FieldSpec& f, std::uint32_t a, const Chain& x, Chain& y) {
    a %= f.p;
    if (a == 0 || x.empty()) return;
    Chain out;
    out.reserve(x.size() + y.size());
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].index < y[j].index)) {
            out.push_back({x[i].index, f.mul(a, x[i].coeff)});
            ++i;
        } else if (i == x.size() || y[j].index < x[i].index) {
            out.push_back(y[j]);
            ++j;
        } else {
            const auto v = f.add(y[j].coeff, f.mul(a, x[i].coeff));
            if (v != 0) out.push_back({y[j].index, v});
            ++i;
            ++j;
        }
    }
    y.swap(out);
}

BoundaryMatrix boundary_matrix(const SimplicialComplex& c, int k, const FieldSpec& field) {
    field.validate();
    if (k < 0 || k > c.k_cap()) throw std::invalid_argument("boundary dimension outside 0..k_cap");
    BoundaryMatrix m;
    m.k = k;
    m.field = field;
    m.rows = k == 0 ? 0 : c.count(k - 1);
    m.columns.resize(c.count(k));
    if (k == 0) return m;
    for (std::size_t i = 0; i < c.count(k); ++i) m.columns[i] = boundary_column(c, k, i, field);
    return m;
}

std::vector<Chain> multiply(const FieldSpec& f, std::span<const Chain> a, std::span<const Chain> b) {
    std::vector<Chain> out(b.size());
    for (std::size_t j = 0; j < b.size(); ++j)
        for (const auto& e : b[j]) {
            if (e.index >= a.size()) throw std::invalid_argument("matrix shapes do not match");
            chain_axpy(f, e.coeff, a[e.index], out[j]);
        }
    return out;
}

std::size_t ColumnReducer::pivot_slot(std::uint32_t row) const {
    if (row >= pivot_of_.size() || pivot_of_[row] == kNoPivot) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(pivot_of_[row]);
}

const Chain* ColumnReducer::pivot_column(std::uint32_t row) const {
    const auto slot = pivot_slot(row);
    return slot == static_cast<std::size_t>(-1) ? nullptr : &columns_[slot];
}

bool ColumnReducer::add(Chain col) { return add_tracked(std::move(col), nullptr); }

bool ColumnReducer::add_tracked(Chain col, Chain* dependency) {
    const bool track = dependency != nullptr || !history_.empty();
    if (track && history_.size() != columns_.size())
        throw std::logic_error("tracked and untracked insertions cannot be mixed");
    Chain hist;
    if (track) hist.push_back({static_cast<std::uint32_t>(inputs_), 1});
    ++inputs_;
    while (!col.empty()) {
        const auto slot = pivot_slot(col.back().index);
        if (slot == static_cast<std::size_t>(-1)) break;
        // Stored columns are normalised to a unit pivot.
        const auto a = field_.neg(col.back().coeff);
        chain_axpy(field_, a, columns_[slot], col);
        if (track) chain_axpy(field_, a, history_[slot], hist);
    }
    if (col.empty()) {
        if (dependency) *dependency = std::move(hist);
        return false;
    }
    const auto s = field_.inv(col.back().coeff);
    if (s != 1) {
        for (auto& e : col) e.coeff = field_.mul(e.coeff, s);
        for (auto& e : hist) e.coeff = field_.mul(e.coeff, s);
    }
    const auto row = col.back().index;
    if (row >= pivot_of_.size()) pivot_of_.resize(static_cast<std::size_t>(row) + 1, kNoPivot);
    pivot_of_[row] = static_cast<std::int64_t>(columns_.size());
    columns_.push_back(std::move(col));
    if (track) history_.push_back(std::move(hist));
    if (dependency) dependency->clear();
    return true;
}

Chain ColumnReducer::normal_form(Chain v) const {
    std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(v.size()) - 1;
    while (pos >= 0) {
        const auto row = v[static_cast<std::size_t>(pos)].index;
        const Chain* pc = pivot_column(row);
        if (!pc) {
            --pos;
            continue;
        }
        chain_axpy(field_, field_.neg(v[static_cast<std::size_t>(pos)].coeff), *pc, v);
        // Entries above `row` are untouched; continue below it.
        const auto it = std::lower_bound(v.begin(), v.end(), row,
                                         [](const ChainEntry& e, std::uint32_t r) { return e.index < r; });
        pos = static_cast<std::ptrdiff_t>(it - v.begin()) - 1;
    }
    return v;
}

std::size_t boundary_rank(const SimplicialComplex& c, int k, const FieldSpec& field) {
    field.validate();
    if (k == 1) return edge_rank(c);
    return reduce_rank(c, k, field, nullptr, nullptr);
}

std::int64_t BettiVector::euler_from_betti() const {
    std::int64_t e = 0;
    for (std::size_t k = 0; k < betti.size(); ++k) e += (k % 2 == 0 ? 1 : -1) * betti[k];
    e += (betti.size() % 2 == 0 ? 1 : -1) * top_betti;
    return e;
}

BettiVector betti_numbers(const SimplicialComplex& c, const FieldSpec& field) {
    field.validate();
    const int top = c.k_cap();
    BettiVector out;
    out.counts.resize(static_cast<std::size_t>(top) + 1);
    for (int j = 0; j <= top; ++j) out.counts[j] = c.count(j);
    out.ranks.assign(static_cast<std::size_t>(top) + 2, 0);
    // Top-down so that pivot rows of one dimension clear columns of the next.
    std::vector<std::uint8_t> cleared, lows;
    bool have_cleared = false;
    for (int k = top; k >= 1; --k) {
        if (k == 1) {
            out.ranks[1] = edge_rank(c);
            break;
        }
        out.ranks[k] = reduce_rank(c, k, field, have_cleared ? &cleared : nullptr, &lows);
        cleared.swap(lows);
        have_cleared = true;
    }
    for (int k = 0; k < top; ++k)
        out.betti.push_back(static_cast<std::int64_t>(out.counts[k]) - static_cast<std::int64_t>(out.ranks[k]) -
                            static_cast<std::int64_t>(out.ranks[k + 1]));
    out.top_betti = static_cast<std::int64_t>(out.counts[top]) - static_cast<std::int64_t>(out.ranks[top]);
    out.ranks.pop_back();
    out.euler = euler_characteristic(c);
    return out;
}

std::int64_t betti_number(const SimplicialComplex& c, int k, const FieldSpec& field) {
    field.validate();
    if (k < 0 || k + 1 > c.k_cap()) throw std::invalid_argument("betti number needs k_cap >= k + 1");
    std::vector<std::uint8_t> lows;
    const std::size_t upper = reduce_rank(c, k + 1, field, nullptr, k >= 2 ? &lows : nullptr);
    const std::size_t lower = k == 0 ? 0 : k == 1 ? edge_rank(c) : reduce_rank(c, k, field, &lows, nullptr);
    return static_cast<std::int64_t>(c.count(k)) - static_cast<std::int64_t>(lower) -
           static_cast<std::int64_t>(upper);
}

std::int64_t euler_characteristic(const SimplicialComplex& c) {
    std::int64_t e = 0;
    for (int j = 0; j <= c.k_cap(); ++j) e += (j % 2 == 0 ? 1 : -1) * static_cast<std::int64_t>(c.count(j));
    return e;
}

HomologyBasis homology_basis(const SimplicialComplex& c, int k, const FieldSpec& field) {
    field.validate();
    if (k < 0 || k + 1 > c.k_cap()) throw std::invalid_argument("homology basis needs k_cap >= k + 1");
    HomologyBasis out;
    out.k = k;
    out.field = field;

    std::vector<std::pair<Chain, std::size_t>> cycles;
    if (k == 0) {
        for (std::size_t i = 0; i < c.count(0); ++i) cycles.push_back({Chain{{static_cast<std::uint32_t>(i), 1}}, i});
    } else {
        ColumnReducer red(field);
        Chain dep;
        for (std::size_t i = 0; i < c.count(k); ++i)
            if (!red.add_tracked(boundary_column(c, k, i, field), &dep)) cycles.push_back({dep, i});
    }
    const ColumnReducer boundaries = boundary_span(c, k + 1, field);
    ColumnReducer chosen(field);
    for (auto& [z, col] : cycles) {
        if (chosen.add(boundaries.normal_form(z))) {
            out.representatives.push_back(std::move(z));
            out.provenance.push_back(col);
        }
    }
    return out;
}

std::size_t induced_map_kernel_rank(const SimplicialComplex& sub, std::span<const SimplicialComplex> sups, int k,
                                    const FieldSpec& field) {
    field.validate();
    if (k < 0) throw std::invalid_argument("negative homology dimension");
    for (const auto& t : sups) {
        if (t.k_cap() < k + 1) throw std::invalid_argument("target complex truncated below k + 1");
        if (!includes_up_to(sub, t, k + 1)) throw std::invalid_argument("source is not a subcomplex of the target");
    }
    const HomologyBasis basis = homology_basis(sub, k, field);
    if (basis.representatives.empty()) return 0;

    std::vector<Chain> stacked(basis.representatives.size());
    std::uint32_t offset = 0;
    for (const auto& t : sups) {
        const ColumnReducer boundaries = boundary_span(t, k + 1, field);
        for (std::size_t b = 0; b < basis.representatives.size(); ++b) {
            Chain mapped;
            for (const auto& e : basis.representatives[b]) {
                const auto idx = t.index_of(sub.simplex(k, e.index));
                mapped.push_back({static_cast<std::uint32_t>(*idx), e.coeff});
            }
            std::sort(mapped.begin(), mapped.end(),
                      [](const ChainEntry& x, const ChainEntry& y) { return x.index < y.index; });
            for (const auto& e : boundaries.normal_form(std::move(mapped)))
                stacked[b].push_back({e.index + offset, e.coeff});
        }
        offset += static_cast<std::uint32_t>(t.count(k));
    }
    ColumnReducer image(field);
    for (auto& col : stacked) image.add(std::move(col));
    return basis.representatives.size() - image.rank();
}

BettiBoundCheck betti_difference_bound_check(const SimplicialComplex& inner, const SimplicialComplex& outer, int k,
                                             const FieldSpec& field) {
    if (!includes_up_to(inner, outer, k + 1)) throw std::invalid_argument("inner complex is not contained in outer");
    BettiBoundCheck out;
    out.difference = betti_number(outer, k, field) - betti_number(inner, k, field);
    for (int j : {k, k + 1}) {
        std::size_t fresh = 0;
        for (std::size_t i = 0; i < outer.count(j); ++i)
            if (!inner.contains(outer.simplex(j, i))) ++fresh;
        out.bound += static_cast<std::int64_t>(fresh);
    }
    out.slack = out.bound - std::abs(out.difference);
    out.holds = out.slack >= 0;
    return out;
}

MayerVietorisTerms mayer_vietoris_terms(const SimplicialComplex& first, const SimplicialComplex& second, int k,
                                        const FieldSpec& field) {
    const SimplicialComplex uni = complex_union(first, second);
    const SimplicialComplex inter = complex_intersection(first, second);
    const SimplicialComplex targets[] = {first, second};
    MayerVietorisTerms t;
    t.beta_union = betti_number(uni, k, field);
    t.beta_first = betti_number(first, k, field);
    t.beta_second = betti_number(second, k, field);
    t.beta_intersection = betti_number(inter, k, field);
    t.kernel_k = static_cast<std::int64_t>(induced_map_kernel_rank(inter, targets, k, field));
    t.kernel_k_minus_1 = k == 0 ? 0 : static_cast<std::int64_t>(induced_map_kernel_rank(inter, targets, k - 1, field));
    return t;
}

}  // namespace cechlab
