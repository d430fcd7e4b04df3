#pragma once

#include "cechlab/point_process.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cechlab {

using Vertex = std::uint32_t;
using Simplex = std::vector<Vertex>;

/// Finite abstract simplicial complex over the vertex universe
/// {0, ..., universe_size - 1}, truncated at dimension k_cap.
///
/// Level j holds the j-simplices as a flat array of (j+1)-tuples, each tuple
/// strictly increasing and the tuples in lexicographic order. Lookups are
/// binary searches over that order, so indices into a level double as the
/// row/column order of boundary matrices.
class SimplicialComplex {
public:
    SimplicialComplex(std::size_t universe_size, int k_cap);

    /// Downward closure of `simplices`, truncated at k_cap. Faces above
    /// k_cap are discarded.
    static SimplicialComplex closure(std::size_t universe_size, int k_cap,
                                     std::span<const Simplex> simplices);

    /// Takes ownership of pre-sorted levels; validates ordering and closure.
    static SimplicialComplex from_levels(std::size_t universe_size, std::vector<std::vector<Vertex>> levels);
    /// As from_levels, for callers that already guarantee the invariants.
    static SimplicialComplex from_levels_unchecked(std::size_t universe_size,
                                                   std::vector<std::vector<Vertex>> levels);

    std::size_t universe_size() const noexcept { return universe_; }
    int k_cap() const noexcept { return static_cast<int>(levels_.size()) - 1; }

    std::size_t count(int j) const {
        if (j < 0 || j > k_cap()) return 0;
        return levels_[j].size() / static_cast<std::size_t>(j + 1);
    }
    std::size_t total_count() const;

    std::span<const Vertex> simplex(int j, std::size_t i) const {
        const auto w = static_cast<std::size_t>(j + 1);
        return {levels_[j].data() + i * w, w};
    }
    const std::vector<Vertex>& level(int j) const { return levels_[j]; }

    /// Index of `s` within its level, if present.
    std::optional<std::size_t> index_of(std::span<const Vertex> s) const;
    bool contains(std::span<const Vertex> s) const { return index_of(s).has_value(); }

    /// Every face of every stored simplex is stored.
    bool is_downward_closed() const;
    /// Every simplex of *this is a simplex of `other` (up to this->k_cap).
    bool is_subcomplex_of(const SimplicialComplex& other) const;

    // Provenance.
    double radius = 0.0;
    std::uint64_t source_seed = 0;
    /// Vertex coordinates, when the complex was built from a sample.
    std::optional<PointSample> points;

    friend bool operator==(const SimplicialComplex& a, const SimplicialComplex& b) {
        return a.universe_ == b.universe_ && a.levels_ == b.levels_;
    }

private:
    friend SimplicialComplex build_cech(const PointSample& s, double r, int k_cap);
    std::size_t universe_;
    std::vector<std::vector<Vertex>> levels_;
};

/// Simplex counts S_j indexed by dimension.
struct SimplexCounts {
    std::vector<std::size_t> counts;
    std::size_t operator[](std::size_t j) const { return j < counts.size() ? counts[j] : 0; }
    friend bool operator==(const SimplexCounts&, const SimplexCounts&) = default;
};

/// Cech complex of radius r truncated at k_cap, over the sample's points
/// (vertex i is point i). Candidate simplices come from cliques of the 2r
/// neighbour graph, grown one dimension at a time and tested only when all
/// their facets are present.
SimplicialComplex build_cech(const PointSample& s, double r, int k_cap);

SimplexCounts count_simplices(const SimplicialComplex& c);

/// Counts simplices with at least one vertex inside `region`. The complex
/// must have been built from `s`.
SimplexCounts count_simplices_in_region(const SimplicialComplex& c, const PointSample& s, const Window& region);

/// Induced subcomplex on `keep` (simplices whose vertices all lie in keep).
SimplicialComplex restrict_to_vertices(const SimplicialComplex& c, std::span<const Vertex> keep);

SimplicialComplex complex_union(const SimplicialComplex& a, const SimplicialComplex& b);
SimplicialComplex complex_intersection(const SimplicialComplex& a, const SimplicialComplex& b);

/// One simplex per line, vertices separated by spaces, ascending dimension.
std::string to_text(const SimplicialComplex& c);
SimplicialComplex complex_from_text(std::string_view text, std::size_t universe_size, int k_cap);

}  // namespace cechlab
