#include "cechlab/geometry.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cechlab {

namespace {

using Ptr = const double*;

struct SmallBall {
    std::array<double, kMaxDim> center{};
    double r2 = -1.0;  // negative: empty ball
    std::array<Ptr, kMaxDim + 1> support{};
    int support_size = 0;
};

constexpr double kInsideSlack = 1e-12;
constexpr double kConditionFloor = 1e-10;

double dist2(Ptr a, Ptr b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

bool inside(Ptr p, const SmallBall& b, int d) {
    if (b.r2 < 0.0) return false;
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double t = p[i] - b.center[i];
        s += t * t;
    }
    return s <= b.r2 * (1.0 + kInsideSlack);
}

// Exact circumcentre of R in its affine hull, in rationals. Returns false when
// R is affinely dependent.
bool exact_circumcenter(const Ptr* R, int m, int d, std::vector<mpq_class>& center) {
    const int k = m - 1;
    std::vector<std::vector<mpq_class>> u(k, std::vector<mpq_class>(d));
    for (int i = 0; i < k; ++i)
        for (int a = 0; a < d; ++a) u[i][a] = mpq_class(R[i + 1][a]) - mpq_class(R[0][a]);
    std::vector<std::vector<mpq_class>> A(k, std::vector<mpq_class>(k + 1));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            mpq_class s = 0;
            for (int a = 0; a < d; ++a) s += u[i][a] * u[j][a];
            A[i][j] = 2 * s;
        }
        mpq_class s = 0;
        for (int a = 0; a < d; ++a) s += u[i][a] * u[i][a];
        A[i][k] = s;
    }
    for (int col = 0; col < k; ++col) {
        int piv = -1;
        for (int row = col; row < k; ++row)
            if (sgn(A[row][col]) != 0) {
                piv = row;
                break;
            }
        if (piv < 0) return false;
        std::swap(A[piv], A[col]);
        for (int row = 0; row < k; ++row) {
            if (row == col || sgn(A[row][col]) == 0) continue;
            const mpq_class f = A[row][col] / A[col][col];
            for (int c = col; c <= k; ++c) A[row][c] -= f * A[col][c];
        }
    }
    center.assign(d, 0);
    for (int a = 0; a < d; ++a) center[a] = R[0][a];
    for (int i = 0; i < k; ++i) {
        const mpq_class lam = A[i][k] / A[i][i];
        for (int a = 0; a < d; ++a) center[a] += lam * u[i][a];
    }
    return true;
}

mpq_class exact_dist2(const std::vector<mpq_class>& c, Ptr p, int d) {
    mpq_class s = 0;
    for (int a = 0; a < d; ++a) {
        const mpq_class t = mpq_class(p[a]) - c[a];
        s += t * t;
    }
    return s;
}

// Degenerate support sets are resolved in exact arithmetic. When R is
// affinely dependent no sphere passes through all of it in general, and the
// smallest ball through an affinely independent subset enclosing R is used.
void exact_ball_through(const Ptr* R, int m, int d, SmallBall& out) {
    std::vector<mpq_class> c;
    if (exact_circumcenter(R, m, d, c)) {
        const mpq_class r2 = exact_dist2(c, R[0], d);
        for (int a = 0; a < d; ++a) out.center[a] = c[a].get_d();
        out.r2 = r2.get_d();
        out.support_size = m;
        std::copy(R, R + m, out.support.begin());
        return;
    }
    bool found = false;
    mpq_class best_r2;
    std::vector<mpq_class> best_c;
    std::array<Ptr, kMaxDim + 1> sub{};
    int best_mask = 0;
    for (int mask = 1; mask < (1 << m) - 1; ++mask) {
        int cnt = 0;
        for (int i = 0; i < m; ++i)
            if (mask >> i & 1) sub[cnt++] = R[i];
        std::vector<mpq_class> cc;
        if (!exact_circumcenter(sub.data(), cnt, d, cc)) continue;
        const mpq_class r2 = exact_dist2(cc, sub[0], d);
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) ok = exact_dist2(cc, R[i], d) <= r2;
        if (ok && (!found || r2 < best_r2)) {
            found = true;
            best_r2 = r2;
            best_c = cc;
            best_mask = mask;
        }
    }
    if (!found) throw std::logic_error("no enclosing ball through a support subset");
    for (int a = 0; a < d; ++a) out.center[a] = best_c[a].get_d();
    out.r2 = best_r2.get_d();
    out.support_size = 0;
    for (int i = 0; i < m; ++i)
        if (best_mask >> i & 1) out.support[out.support_size++] = R[i];
}

// Smallest sphere with every point of R on its boundary, centred in aff(R).
void ball_through(const Ptr* R, int m, int d, SmallBall& out) {
    out.support_size = m;
    std::copy(R, R + m, out.support.begin());
    if (m == 0) {
        out.r2 = -1.0;
        return;
    }
    if (m == 1) {
        std::copy(R[0], R[0] + d, out.center.begin());
        out.r2 = 0.0;
        return;
    }
    if (m == 2) {
        for (int a = 0; a < d; ++a) out.center[a] = 0.5 * (R[0][a] + R[1][a]);
        out.r2 = 0.25 * dist2(R[0], R[1], d);
        return;
    }
    const int k = m - 1;
    std::array<std::array<double, kMaxDim>, kMaxDim> u{};
    std::array<std::array<double, kMaxDim + 1>, kMaxDim> A{};
    for (int i = 0; i < k; ++i)
        for (int a = 0; a < d; ++a) u[i][a] = R[i + 1][a] - R[0][a];
    double scale = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) s += u[i][a] * u[j][a];
            A[i][j] = 2.0 * s;
        }
        A[i][k] = 0.5 * A[i][i];
        scale = std::max(scale, std::abs(A[i][i]));
    }
    bool well_conditioned = scale > 0.0;
    for (int col = 0; col < k && well_conditioned; ++col) {
        int piv = col;
        for (int row = col + 1; row < k; ++row)
            if (std::abs(A[row][col]) > std::abs(A[piv][col])) piv = row;
        if (std::abs(A[piv][col]) < kConditionFloor * scale) {
            well_conditioned = false;
            break;
        }
        std::swap(A[piv], A[col]);
        for (int row = col + 1; row < k; ++row) {
            const double f = A[row][col] / A[col][col];
            for (int c = col; c <= k; ++c) A[row][c] -= f * A[col][c];
        }
    }
    if (!well_conditioned) {
        exact_ball_through(R, m, d, out);
        return;
    }
    std::array<double, kMaxDim> lam{};
    for (int i = k - 1; i >= 0; --i) {
        double s = A[i][k];
        for (int j = i + 1; j < k; ++j) s -= A[i][j] * lam[j];
        lam[i] = s / A[i][i];
    }
    for (int a = 0; a < d; ++a) {
        double c = R[0][a];
        for (int i = 0; i < k; ++i) c += lam[i] * u[i][a];
        out.center[a] = c;
    }
    double r2 = 0.0;
    for (int i = 0; i < m; ++i) r2 = std::max(r2, dist2(out.center.data(), R[i], d));
    out.r2 = r2;
}

// Move-to-front Welzl: smallest ball enclosing L[0, end) with `support` on
// its boundary.
void mtf_ball(Ptr* L, int end, std::array<Ptr, kMaxDim + 1>& support, int m, int d, SmallBall& ball) {
    ball_through(support.data(), m, d, ball);
    if (m == d + 1) return;
    for (int i = 0; i < end; ++i) {
        if (inside(L[i], ball, d)) continue;
        support[m] = L[i];
        mtf_ball(L, i, support, m + 1, d, ball);
        std::rotate(L, L + i, L + i + 1);
    }
}

SmallBall welzl(Ptr* L, int count, int d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension outside the supported range");
    std::array<Ptr, kMaxDim + 1> support{};
    SmallBall ball;
    mtf_ball(L, count, support, 0, d, ball);
    return ball;
}

}  // namespace

double min_enclosing_radius2(const double* const* points, int count, int dim) {
    if (count <= 0) throw std::invalid_argument("minimum enclosing ball of an empty set");
    if (count == 1) return 0.0;
    if (count == 2) return 0.25 * dist2(points[0], points[1], dim);
    std::array<Ptr, 16> small{};
    std::vector<Ptr> big;
    Ptr* L = small.data();
    if (count > static_cast<int>(small.size())) {
        big.assign(points, points + count);
        L = big.data();
    } else {
        std::copy(points, points + count, small.begin());
    }
    return welzl(L, count, dim).r2;
}

Ball min_enclosing_ball(std::span<const std::vector<double>> points) {
    if (points.empty()) throw std::invalid_argument("minimum enclosing ball of an empty set");
    const int d = static_cast<int>(points.front().size());
    for (const auto& p : points)
        if (static_cast<int>(p.size()) != d) throw std::invalid_argument("points differ in dimension");
    std::vector<Ptr> L(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) L[i] = points[i].data();
    const SmallBall b = welzl(L.data(), static_cast<int>(L.size()), d);

    Ball out;
    out.center.assign(b.center.begin(), b.center.begin() + d);
    out.radius = std::sqrt(std::max(b.r2, 0.0));
    for (int i = 0; i < b.support_size; ++i)
        for (std::size_t j = 0; j < points.size(); ++j)
            if (points[j].data() == b.support[i]) out.support.push_back(j);
    std::sort(out.support.begin(), out.support.end());
    // Drop support points whose removal leaves the same ball (boundary points
    // that are not needed to pin it).
    for (std::size_t i = 0; i < out.support.size() && out.support.size() > 1;) {
        std::vector<Ptr> rest;
        for (std::size_t j = 0; j < out.support.size(); ++j)
            if (j != i) rest.push_back(points[out.support[j]].data());
        const double r2 = min_enclosing_radius2(rest.data(), static_cast<int>(rest.size()), d);
        if (std::abs(r2 - b.r2) <= 1e-12 * std::max(b.r2, 1e-300))
            out.support.erase(out.support.begin() + static_cast<std::ptrdiff_t>(i));
        else
            ++i;
    }
    return out;
}

bool cech_simplex_test(const double* const* points, int count, int dim, double r) {
    if (count <= 0) throw std::invalid_argument("Cech test needs at least one point");
    return min_enclosing_radius2(points, count, dim) <= r * r;
}

bool cech_simplex_test(std::span<const std::vector<double>> points, double r) {
    if (points.empty()) throw std::invalid_argument("Cech test needs at least one point");
    std::vector<Ptr> L(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) L[i] = points[i].data();
    return cech_simplex_test(L.data(), static_cast<int>(L.size()), static_cast<int>(points.front().size()), r);
}

// NeighborGraph -------------------------------------------------------------

std::size_t NeighborGraph::edge_count() const {
    std::size_t s = 0;
    for (const auto& a : adjacency) s += a.size();
    return s / 2;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> NeighborGraph::edges() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t i = 0; i < adjacency.size(); ++i)
        for (auto j : adjacency[i])
            if (j > i) out.emplace_back(i, j);
    return out;
}

std::string NeighborGraph::to_edge_csv() const {
    std::string out = "i,j\n";
    for (auto [i, j] : edges()) out += std::to_string(i) + "," + std::to_string(j) + "\n";
    return out;
}

NeighborGraph build_neighbor_graph(const PointSample& s, double cutoff) {
    if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw std::invalid_argument("cutoff must be > 0");
    const int d = s.dim();
    const std::size_t n = s.size();
    NeighborGraph g;
    g.vertex_count = n;
    g.cutoff = cutoff;
    g.adjacency.resize(n);
    if (n == 0) return g;

    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a) lo[a] = std::min(lo[a], s.point(i)[a]);
    std::vector<std::int64_t> cell(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (int a = 0; a < d; ++a)
            cell[i * d + a] = static_cast<std::int64_t>(std::floor((s.point(i)[a] - lo[a]) / cutoff));
    auto cell_less = [&](std::size_t x, std::size_t y) {
        return std::lexicographical_compare(cell.begin() + x * d, cell.begin() + (x + 1) * d,
                                            cell.begin() + y * d, cell.begin() + (y + 1) * d);
    };
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), cell_less);

    // Runs of equal cells in `order`.
    std::vector<std::size_t> run_start{0};
    for (std::size_t i = 1; i < n; ++i)
        if (cell_less(order[i - 1], order[i])) run_start.push_back(i);
    run_start.push_back(n);
    const std::size_t runs = run_start.size() - 1;

    auto find_run = [&](const std::vector<std::int64_t>& key) -> std::ptrdiff_t {
        std::size_t lo_r = 0, hi_r = runs;
        while (lo_r < hi_r) {
            const std::size_t mid = (lo_r + hi_r) / 2;
            const auto rep = order[run_start[mid]];
            if (std::lexicographical_compare(cell.begin() + rep * d, cell.begin() + (rep + 1) * d, key.begin(),
                                             key.end()))
                lo_r = mid + 1;
            else
                hi_r = mid;
        }
        if (lo_r == runs) return -1;
        const auto rep = order[run_start[lo_r]];
        return std::equal(key.begin(), key.end(), cell.begin() + rep * d) ? static_cast<std::ptrdiff_t>(lo_r) : -1;
    };

    const double c2 = cutoff * cutoff;
    std::size_t offsets = 1;
    for (int a = 0; a < d; ++a) offsets *= 3;
    std::vector<std::int64_t> key(d);
    for (std::size_t r = 0; r < runs; ++r) {
        const auto rep = order[run_start[r]];
        for (std::size_t off = 0; off < offsets; ++off) {
            std::size_t rem = off;
            for (int a = 0; a < d; ++a) {
                key[a] = cell[rep * d + a] + static_cast<std::int64_t>(rem % 3) - 1;
                rem /= 3;
            }
            const auto other = find_run(key);
            if (other < 0 || static_cast<std::size_t>(other) < r) continue;
            for (std::size_t ia = run_start[r]; ia < run_start[r + 1]; ++ia) {
                const auto i = order[ia];
                for (std::size_t jb = run_start[other]; jb < run_start[other + 1]; ++jb) {
                    const auto j = order[jb];
                    if (static_cast<std::size_t>(other) == r && j <= i) continue;
                    if (dist2(s.point(i).data(), s.point(j).data(), d) <= c2) {
                        g.adjacency[i].push_back(static_cast<std::uint32_t>(j));
                        g.adjacency[j].push_back(static_cast<std::uint32_t>(i));
                    }
                }
            }
        }
    }
    for (auto& a : g.adjacency) std::sort(a.begin(), a.end());
    return g;
}

// VacancyGrid ---------------------------------------------------------------

namespace {

// Closed intervals cover [a, b].
bool intervals_cover(std::vector<std::pair<double, double>>& iv, double a, double b) {
    std::sort(iv.begin(), iv.end());
    double reach = a;
    for (const auto& [s, e] : iv) {
        if (s > reach) return false;
        reach = std::max(reach, e);
        if (reach >= b) return true;
    }
    return reach >= b;
}

}  // namespace

VacancyGrid::VacancyGrid(const PointSample& s, double r, const Window& w, double cells_per_r) : dim_(w.dim()) {
    if (cells_per_r < kMinCellsPerRadius)
        throw std::invalid_argument("vacancy grid resolution is below 8 cells per radius");
    if (!(r > 0.0)) throw std::invalid_argument("radius must be > 0");
    if (dim_ > 3) throw std::invalid_argument("vacancy grid supports d <= 3");
    if (w.kind() == Window::Kind::ball) throw std::invalid_argument("vacancy grid needs a cube or box window");
    if (s.dim() != dim_) throw std::invalid_argument("sample and window dimension differ");
    const auto lo = w.lower();
    const auto hi = w.upper();
    const double target = r / cells_per_r;
    r_ = r;
    lo_.assign(lo.begin(), lo.end());
    points_ = s.coords();
    std::size_t total = 1;
    for (int a = 0; a < dim_; ++a) {
        const auto cells = static_cast<std::size_t>(std::ceil((hi[a] - lo[a]) / target));
        shape_.push_back(std::max<std::size_t>(cells, 1));
        h_.push_back((hi[a] - lo[a]) / static_cast<double>(shape_[a]));
        total *= shape_[a];
    }
    if (total > 400'000'000) throw std::invalid_argument("vacancy grid too large");
    stride_.assign(dim_, 1);
    for (int a = dim_ - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * shape_[a + 1];

    // 0 no ball meets the cell, 1 some ball covers it, 2 mixed.
    std::vector<std::uint8_t> kind(total, 0);
    const double r2 = r * r;
    std::array<std::int64_t, 3> from{}, to{};
    for (std::size_t p = 0; p < s.size(); ++p) {
        const auto x = s.point(p);
        bool empty = false;
        for (int a = 0; a < dim_; ++a) {
            from[a] = std::max<std::int64_t>(static_cast<std::int64_t>(std::floor((x[a] - r - lo[a]) / h_[a])) - 1, 0);
            to[a] = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor((x[a] + r - lo[a]) / h_[a])) + 1,
                                           static_cast<std::int64_t>(shape_[a]) - 1);
            if (from[a] > to[a]) empty = true;
        }
        if (empty) continue;
        for (int a = dim_; a < 3; ++a) from[a] = to[a] = 0;
        for (auto i = from[0]; i <= to[0]; ++i)
            for (auto j = from[1]; j <= to[1]; ++j)
                for (auto k = from[2]; k <= to[2]; ++k) {
                    const std::array<std::int64_t, 3> idx{i, j, k};
                    double near2 = 0.0, far2 = 0.0;
                    std::size_t flat = 0;
                    for (int a = 0; a < dim_; ++a) {
                        const double c0 = lo[a] + static_cast<double>(idx[a]) * h_[a], c1 = c0 + h_[a];
                        const double gap = std::max({c0 - x[a], x[a] - c1, 0.0});
                        const double span = std::max(std::abs(x[a] - c0), std::abs(x[a] - c1));
                        near2 += gap * gap;
                        far2 += span * span;
                        flat += static_cast<std::size_t>(idx[a]) * stride_[a];
                    }
                    if (near2 > r2 || kind[flat] == 1) continue;
                    if (far2 <= r2) {
                        kind[flat] = 1;
                        balls_.erase(flat);
                    } else {
                        kind[flat] = 2;
                        balls_[flat].push_back(static_cast<std::uint32_t>(p));
                    }
                }
    }
    occupied_.assign(total, 0);
    for (std::size_t c = 0; c < total; ++c)
        occupied_[c] = kind[c] == 1 || (kind[c] == 2 && !cell_has_vacancy(c));
    for (std::size_t c = 0; c < total; ++c)
        if (kind[c] != 2) balls_.erase(c);
}

bool VacancyGrid::vacant_point(const double* y, std::span<const std::uint32_t> balls,
                               std::span<const std::uint32_t> skip) const {
    for (auto p : balls) {
        if (std::find(skip.begin(), skip.end(), p) != skip.end()) continue;
        double d2 = 0.0;
        for (int a = 0; a < dim_; ++a) d2 += (y[a] - points_[p * dim_ + a]) * (y[a] - points_[p * dim_ + a]);
        if (d2 <= r_ * r_) return false;
    }
    return true;
}

std::vector<double> VacancyGrid::cell_lower(std::size_t flat) const {
    std::vector<double> c0(dim_);
    for (int a = 0; a < dim_; ++a)
        c0[a] = lo_[a] + static_cast<double>((flat / stride_[a]) % shape_[a]) * h_[a];
    return c0;
}

bool VacancyGrid::cell_has_vacancy(std::size_t flat) const {
    const auto& balls = balls_.at(flat);
    const auto c0 = cell_lower(flat);
    const std::uint32_t none[1] = {std::numeric_limits<std::uint32_t>::max()};
    if (dim_ == 1) {
        std::vector<std::pair<double, double>> iv;
        for (auto p : balls) iv.emplace_back(points_[p] - r_, points_[p] + r_);
        return !intervals_cover(iv, c0[0], c0[0] + h_[0]);
    }
    if (dim_ == 2) {
        const double x0 = c0[0], x1 = x0 + h_[0], y0 = c0[1], y1 = y0 + h_[1];
        auto inside = [&](double x, double y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; };
        // Corners.
        for (double x : {x0, x1})
            for (double y : {y0, y1}) {
                const double q[2] = {x, y};
                if (vacant_point(q, balls, none)) return true;
            }
        // Circles against edges.
        for (auto p : balls) {
            const double cx = points_[2 * p], cy = points_[2 * p + 1];
            const std::uint32_t self[1] = {p};
            for (double x : {x0, x1}) {
                const double t = r_ * r_ - (x - cx) * (x - cx);
                if (t < 0) continue;
                for (double y : {cy - std::sqrt(t), cy + std::sqrt(t)}) {
                    const double q[2] = {x, y};
                    if (y >= y0 && y <= y1 && vacant_point(q, balls, self)) return true;
                }
            }
            for (double y : {y0, y1}) {
                const double t = r_ * r_ - (y - cy) * (y - cy);
                if (t < 0) continue;
                for (double x : {cx - std::sqrt(t), cx + std::sqrt(t)}) {
                    const double q[2] = {x, y};
                    if (x >= x0 && x <= x1 && vacant_point(q, balls, self)) return true;
                }
            }
        }
        // Circle-circle intersections inside the cell.
        for (std::size_t i = 0; i < balls.size(); ++i)
            for (std::size_t j = i + 1; j < balls.size(); ++j) {
                const double ax = points_[2 * balls[i]], ay = points_[2 * balls[i] + 1];
                const double dx = points_[2 * balls[j]] - ax, dy = points_[2 * balls[j] + 1] - ay;
                const double d2 = dx * dx + dy * dy;
                if (d2 == 0.0 || d2 > 4 * r_ * r_) continue;
                const double half = std::sqrt(std::max(0.0, r_ * r_ - d2 / 4) / d2);
                const std::uint32_t pair[2] = {balls[i], balls[j]};
                for (double sgn : {-1.0, 1.0}) {
                    const double q[2] = {ax + dx / 2 - sgn * dy * half, ay + dy / 2 + sgn * dx * half};
                    if (inside(q[0], q[1]) && vacant_point(q, balls, pair)) return true;
                }
            }
        return false;
    }
    // d = 3: dense sampling of the cell.
    constexpr int m = 6;
    double q[3];
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j)
            for (int k = 0; k <= m; ++k) {
                q[0] = c0[0] + h_[0] * i / m;
                q[1] = c0[1] + h_[1] * j / m;
                q[2] = c0[2] + h_[2] * k / m;
                if (vacant_point(q, balls, none)) return true;
            }
    return false;
}

bool VacancyGrid::face_has_vacancy(std::size_t a_cell, std::size_t b_cell, int axis) const {
    std::vector<std::uint32_t> balls;
    for (auto c : {a_cell, b_cell})
        if (const auto it = balls_.find(c); it != balls_.end()) balls.insert(balls.end(), it->second.begin(), it->second.end());
    std::sort(balls.begin(), balls.end());
    balls.erase(std::unique(balls.begin(), balls.end()), balls.end());
    auto c0 = cell_lower(b_cell);
    const double plane = c0[axis];
    const std::uint32_t none[1] = {std::numeric_limits<std::uint32_t>::max()};
    if (dim_ == 1) return vacant_point(&plane, balls, none);
    if (dim_ == 2) {
        const int o = 1 - axis;
        std::vector<std::pair<double, double>> iv;
        for (auto p : balls) {
            const double t = r_ * r_ - std::pow(plane - points_[2 * p + axis], 2);
            if (t < 0) continue;
            iv.emplace_back(points_[2 * p + o] - std::sqrt(t), points_[2 * p + o] + std::sqrt(t));
        }
        return !intervals_cover(iv, c0[o], c0[o] + h_[o]);
    }
    constexpr int m = 8;
    const int u = axis == 0 ? 1 : 0, v = axis == 2 ? 1 : 2;
    double q[3];
    q[axis] = plane;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            q[u] = c0[u] + h_[u] * i / m;
            q[v] = c0[v] + h_[v] * j / m;
            if (vacant_point(q, balls, none)) return true;
        }
    return false;
}

VacancyGrid::Components VacancyGrid::components() const {
    Components out;
    std::vector<std::uint8_t> seen(occupied_.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < occupied_.size(); ++start) {
        if (occupied_[start] || seen[start]) continue;
        bool boundary = false;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t c = stack.back();
            stack.pop_back();
            const bool mixed_c = balls_.count(c) != 0;
            for (int a = 0; a < dim_; ++a) {
                const std::size_t coord = (c / stride_[a]) % shape_[a];
                if (coord == 0 || coord + 1 == shape_[a]) boundary = true;
                for (int dir : {-1, 1}) {
                    if ((dir < 0 && coord == 0) || (dir > 0 && coord + 1 == shape_[a])) continue;
                    const std::size_t nb = dir < 0 ? c - stride_[a] : c + stride_[a];
                    if (occupied_[nb] || seen[nb]) continue;
                    if (mixed_c && balls_.count(nb) && !face_has_vacancy(std::min(c, nb), std::max(c, nb), a)) continue;
                    seen[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        if (boundary)
            ++out.touches_boundary;
        else
            ++out.bounded;
    }
    return out;
}

std::string VacancyGrid::to_pgm() const {
    if (dim_ != 2) throw std::invalid_argument("PGM dump needs d = 2");
    const std::size_t width = shape_[0], height = shape_[1];
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    for (std::size_t row = 0; row < height; ++row) {
        const std::size_t j = height - 1 - row;
        for (std::size_t i = 0; i < width; ++i) out.push_back(occupied_[i * height + j] ? char(0) : char(255));
    }
    return out;
}

VacancyGrid::Components vacant_component_count(const PointSample& s, double r, const Window& w,
                                               double cells_per_r) {
    return VacancyGrid(s, r, w, cells_per_r).components();
}

}  // namespace cechlab
