#include "cechlab/complex.hpp"

#include "cechlab/geometry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <stdexcept>

namespace cechlab {

namespace {

int compare_tuple(const Vertex* a, const Vertex* b, std::size_t w) {
    for (std::size_t i = 0; i < w; ++i) {
        if (a[i] < b[i]) return -1;
        if (a[i] > b[i]) return 1;
    }
    return 0;
}

bool points_compatible(const SimplicialComplex& a, const SimplicialComplex& b) {
    if (a.universe_size() != b.universe_size()) return false;
    if (a.points && b.points) return a.points->coords() == b.points->coords();
    return true;
}

template <class Emit>
void merge_levels(const std::vector<Vertex>& a, const std::vector<Vertex>& b, std::size_t w, Emit&& emit) {
    std::size_t i = 0, j = 0;
    const std::size_t na = a.size() / w, nb = b.size() / w;
    while (i < na || j < nb) {
        if (j == nb) {
            emit(a.data() + i++ * w, 1);
        } else if (i == na) {
            emit(b.data() + j++ * w, 2);
        } else {
            const int c = compare_tuple(a.data() + i * w, b.data() + j * w, w);
            if (c < 0) {
                emit(a.data() + i++ * w, 1);
            } else if (c > 0) {
                emit(b.data() + j++ * w, 2);
            } else {
                emit(a.data() + i * w, 3);
                ++i;
                ++j;
            }
        }
    }
}

}  // namespace

SimplicialComplex::SimplicialComplex(std::size_t universe_size, int k_cap) : universe_(universe_size) {
    if (k_cap < 0) throw std::invalid_argument("k_cap must be >= 0");
    levels_.resize(static_cast<std::size_t>(k_cap) + 1);
}

std::size_t SimplicialComplex::total_count() const {
    std::size_t s = 0;
    for (int j = 0; j <= k_cap(); ++j) s += count(j);
    return s;
}

std::optional<std::size_t> SimplicialComplex::index_of(std::span<const Vertex> s) const {
    if (s.empty()) return std::nullopt;
    const int j = static_cast<int>(s.size()) - 1;
    if (j > k_cap()) return std::nullopt;
    const std::size_t w = s.size();
    const auto& lv = levels_[j];
    std::size_t lo = 0, hi = lv.size() / w;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (compare_tuple(lv.data() + mid * w, s.data(), w) < 0)
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < lv.size() / w && compare_tuple(lv.data() + lo * w, s.data(), w) == 0) return lo;
    return std::nullopt;
}

bool SimplicialComplex::is_downward_closed() const {
    std::vector<Vertex> face;
    for (int j = 1; j <= k_cap(); ++j) {
        for (std::size_t i = 0; i < count(j); ++i) {
            const auto s = simplex(j, i);
            for (std::size_t drop = 0; drop < s.size(); ++drop) {
                face.clear();
                for (std::size_t t = 0; t < s.size(); ++t)
                    if (t != drop) face.push_back(s[t]);
                if (!contains(face)) return false;
            }
        }
    }
    return true;
}

bool SimplicialComplex::is_subcomplex_of(const SimplicialComplex& other) const {
    if (universe_ != other.universe_) return false;
    for (int j = 0; j <= k_cap(); ++j)
        for (std::size_t i = 0; i < count(j); ++i)
            if (!other.contains(simplex(j, i))) return false;
    return true;
}

SimplicialComplex SimplicialComplex::closure(std::size_t universe_size, int k_cap,
                                             std::span<const Simplex> simplices) {
    SimplicialComplex c(universe_size, k_cap);
    std::vector<std::vector<Simplex>> buckets(static_cast<std::size_t>(k_cap) + 1);
    for (Simplex s : simplices) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (s.empty()) continue;
        if (s.back() >= universe_size) throw std::invalid_argument("simplex vertex outside the universe");
        if (s.size() > 24) throw std::invalid_argument("simplex too large for closure");
        const std::uint32_t full = (1u << s.size()) - 1;
        for (std::uint32_t mask = 1; mask <= full; ++mask) {
            const int size = __builtin_popcount(mask);
            if (size - 1 > k_cap) continue;
            Simplex f;
            for (std::size_t t = 0; t < s.size(); ++t)
                if (mask >> t & 1u) f.push_back(s[t]);
            buckets[size - 1].push_back(std::move(f));
        }
    }
    for (int j = 0; j <= k_cap; ++j) {
        auto& b = buckets[j];
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        for (const auto& s : b) c.levels_[j].insert(c.levels_[j].end(), s.begin(), s.end());
    }
    return c;
}

SimplicialComplex SimplicialComplex::from_levels_unchecked(std::size_t universe_size,
                                                          std::vector<std::vector<Vertex>> levels) {
    SimplicialComplex c(universe_size, static_cast<int>(levels.size()) - 1);
    c.levels_ = std::move(levels);
    return c;
}

SimplicialComplex SimplicialComplex::from_levels(std::size_t universe_size, std::vector<std::vector<Vertex>> levels) {
    if (levels.empty()) throw std::invalid_argument("complex needs at least one level");
    SimplicialComplex c(universe_size, static_cast<int>(levels.size()) - 1);
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const std::size_t w = j + 1;
        if (levels[j].size() % w != 0) throw std::invalid_argument("level size is not a multiple of its arity");
        const std::size_t n = levels[j].size() / w;
        for (std::size_t i = 0; i < n; ++i) {
            const Vertex* s = levels[j].data() + i * w;
            for (std::size_t t = 0; t < w; ++t) {
                if (s[t] >= universe_size) throw std::invalid_argument("simplex vertex outside the universe");
                if (t && s[t - 1] >= s[t]) throw std::invalid_argument("simplex vertices not strictly increasing");
            }
            if (i && compare_tuple(s - w, s, w) >= 0) throw std::invalid_argument("level not strictly sorted");
        }
    }
    c.levels_ = std::move(levels);
    if (!c.is_downward_closed()) throw std::invalid_argument("levels are not downward closed");
    return c;
}

SimplicialComplex build_cech(const PointSample& s, double r, int k_cap) {
    if (!(r >= 0.0)) throw std::invalid_argument("radius must be >= 0");
    const std::size_t n = s.size();
    const int d = s.dim();
    if (d > kMaxDim) throw std::invalid_argument("dimension outside the supported range");
    SimplicialComplex c(n, k_cap);
    c.radius = r;
    c.source_seed = s.seed();
    c.points = s;
    auto& levels = c.levels_;
    levels[0].resize(n);
    for (std::size_t i = 0; i < n; ++i) levels[0][i] = static_cast<Vertex>(i);
    if (k_cap == 0 || n < 2 || r <= 0.0) return c;

    // Edges: ||x - y|| <= 2r is exactly the two-point Cech condition.
    const NeighborGraph g = build_neighbor_graph(s, 2.0 * r);
    for (Vertex i = 0; i < n; ++i)
        for (Vertex j : g.adjacency[i])
            if (j > i) {
                levels[1].push_back(i);
                levels[1].push_back(j);
            }

    std::vector<Vertex> candidates, scratch, facet;
    std::vector<const double*> ptrs(static_cast<std::size_t>(k_cap) + 2);
    for (int j = 1; j < k_cap; ++j) {
        const std::size_t w = static_cast<std::size_t>(j) + 1;
        const std::size_t m = c.count(j);
        auto& next = levels[j + 1];
        for (std::size_t t = 0; t < m; ++t) {
            const Vertex* sig = levels[j].data() + t * w;
            // Common neighbours above the last vertex.
            const auto& last = g.adjacency[sig[j]];
            candidates.assign(std::upper_bound(last.begin(), last.end(), sig[j]), last.end());
            for (std::size_t v = 0; v + 1 < w && !candidates.empty(); ++v) {
                const auto& adj = g.adjacency[sig[v]];
                scratch.clear();
                std::set_intersection(candidates.begin(), candidates.end(), adj.begin(), adj.end(),
                                      std::back_inserter(scratch));
                candidates.swap(scratch);
            }
            if (candidates.empty()) continue;
            for (std::size_t v = 0; v < w; ++v) ptrs[v] = s.point(sig[v]).data();
            for (Vertex cand : candidates) {
                // Facets through cand other than edges are checked explicitly.
                bool facets_ok = true;
                if (j >= 2) {
                    for (std::size_t drop = 0; drop < w && facets_ok; ++drop) {
                        facet.clear();
                        for (std::size_t v = 0; v < w; ++v)
                            if (v != drop) facet.push_back(sig[v]);
                        facet.push_back(cand);
                        facets_ok = c.contains(facet);
                    }
                }
                if (!facets_ok) continue;
                ptrs[w] = s.point(cand).data();
                if (!cech_simplex_test(ptrs.data(), static_cast<int>(w) + 1, d, r)) continue;
                next.insert(next.end(), sig, sig + w);
                next.push_back(cand);
            }
        }
    }
    return c;
}

SimplexCounts count_simplices(const SimplicialComplex& c) {
    SimplexCounts out;
    for (int j = 0; j <= c.k_cap(); ++j) out.counts.push_back(c.count(j));
    return out;
}

SimplexCounts count_simplices_in_region(const SimplicialComplex& c, const PointSample& s, const Window& region) {
    if (s.size() != c.universe_size()) throw std::invalid_argument("complex was not built from this sample");
    std::vector<std::uint8_t> inside(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) inside[i] = region.contains(s.point(i)) ? 1 : 0;
    SimplexCounts out;
    for (int j = 0; j <= c.k_cap(); ++j) {
        std::size_t n = 0;
        for (std::size_t i = 0; i < c.count(j); ++i) {
            const auto sig = c.simplex(j, i);
            if (std::any_of(sig.begin(), sig.end(), [&](Vertex v) { return inside[v] != 0; })) ++n;
        }
        out.counts.push_back(n);
    }
    return out;
}

SimplicialComplex restrict_to_vertices(const SimplicialComplex& c, std::span<const Vertex> keep) {
    std::vector<std::uint8_t> flag(c.universe_size(), 0);
    for (Vertex v : keep) {
        if (v >= c.universe_size()) throw std::invalid_argument("vertex outside the universe");
        flag[v] = 1;
    }
    std::vector<std::vector<Vertex>> levels(static_cast<std::size_t>(c.k_cap()) + 1);
    for (int j = 0; j <= c.k_cap(); ++j) {
        for (std::size_t i = 0; i < c.count(j); ++i) {
            const auto sig = c.simplex(j, i);
            if (std::all_of(sig.begin(), sig.end(), [&](Vertex v) { return flag[v] != 0; }))
                levels[j].insert(levels[j].end(), sig.begin(), sig.end());
        }
    }
    auto out = SimplicialComplex::from_levels_unchecked(c.universe_size(), std::move(levels));
    out.radius = c.radius;
    out.source_seed = c.source_seed;
    out.points = c.points;
    return out;
}

SimplicialComplex complex_union(const SimplicialComplex& a, const SimplicialComplex& b) {
    if (!points_compatible(a, b)) throw std::invalid_argument("complexes have incompatible vertex universes");
    const int k = std::max(a.k_cap(), b.k_cap());
    std::vector<std::vector<Vertex>> levels(static_cast<std::size_t>(k) + 1);
    static const std::vector<Vertex> none;
    for (int j = 0; j <= k; ++j) {
        const auto w = static_cast<std::size_t>(j) + 1;
        const auto& la = j <= a.k_cap() ? a.level(j) : none;
        const auto& lb = j <= b.k_cap() ? b.level(j) : none;
        merge_levels(la, lb, w, [&](const Vertex* s, int) { levels[j].insert(levels[j].end(), s, s + w); });
    }
    auto out = SimplicialComplex::from_levels_unchecked(a.universe_size(), std::move(levels));
    out.radius = std::max(a.radius, b.radius);
    out.points = a.points ? a.points : b.points;
    return out;
}

SimplicialComplex complex_intersection(const SimplicialComplex& a, const SimplicialComplex& b) {
    if (!points_compatible(a, b)) throw std::invalid_argument("complexes have incompatible vertex universes");
    const int k = std::min(a.k_cap(), b.k_cap());
    std::vector<std::vector<Vertex>> levels(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) {
        const auto w = static_cast<std::size_t>(j) + 1;
        merge_levels(a.level(j), b.level(j), w, [&](const Vertex* s, int which) {
            if (which == 3) levels[j].insert(levels[j].end(), s, s + w);
        });
    }
    auto out = SimplicialComplex::from_levels_unchecked(a.universe_size(), std::move(levels));
    out.radius = std::min(a.radius, b.radius);
    out.points = a.points ? a.points : b.points;
    return out;
}

std::string to_text(const SimplicialComplex& c) {
    std::string out;
    for (int j = 0; j <= c.k_cap(); ++j)
        for (std::size_t i = 0; i < c.count(j); ++i) {
            const auto s = c.simplex(j, i);
            for (std::size_t t = 0; t < s.size(); ++t) {
                if (t) out += ' ';
                out += std::to_string(s[t]);
            }
            out += '\n';
        }
    return out;
}

SimplicialComplex complex_from_text(std::string_view text, std::size_t universe_size, int k_cap) {
    std::vector<Simplex> simplices;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        Simplex s;
        std::size_t p = 0;
        while (p < line.size()) {
            while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == '\r')) ++p;
            if (p == line.size()) break;
            Vertex v = 0;
            auto [ptr, ec] = std::from_chars(line.data() + p, line.data() + line.size(), v);
            if (ec != std::errc()) throw std::invalid_argument("bad vertex on line " + std::to_string(line_no));
            s.push_back(v);
            p = static_cast<std::size_t>(ptr - line.data());
        }
        if (!s.empty()) simplices.push_back(std::move(s));
    }
    return SimplicialComplex::closure(universe_size, k_cap, simplices);
}

}  // namespace cechlab
