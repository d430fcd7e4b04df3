#include "cechlab/stabilization.hpp"

#include "cechlab/geometry.hpp"
#include "cechlab/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cechlab {

namespace {

double norm(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

std::uint32_t sign_coeff(const FieldSpec& f, int drop) { return drop % 2 == 0 ? 1u : f.p - 1; }

Chain boundary_chain(const SimplicialComplex& c, int j, std::size_t i, const FieldSpec& f) {
    Chain col;
    std::vector<Vertex> face;
    const auto sig = c.simplex(j, i);
    for (int drop = 0; drop <= j; ++drop) {
        face.clear();
        for (int v = 0; v <= j; ++v)
            if (v != drop) face.push_back(sig[v]);
        col.push_back({static_cast<std::uint32_t>(*c.index_of(face)), sign_coeff(f, drop)});
    }
    std::sort(col.begin(), col.end(), [](const ChainEntry& a, const ChainEntry& b) { return a.index < b.index; });
    return col;
}

// Star of a new vertex x (labelled above every existing vertex): for each
// dimension j, the (j-1)-simplices sigma of the base complex with sigma + {x}
// a Cech simplex, in lexicographic order.
std::vector<std::vector<Simplex>> star_of(const SimplicialComplex& c, const PointSample& s, std::span<const double> x,
                                          std::span<const Vertex> nbrs, double r, int top) {
    std::vector<std::vector<Simplex>> star(static_cast<std::size_t>(top) + 1);
    star[0].push_back({});
    const int d = s.dim();
    std::vector<const double*> ptrs;
    if (top >= 1)
        for (Vertex v : nbrs) {
            const double* pair[] = {s.point(v).data(), x.data()};
            if (cech_simplex_test(pair, 2, d, r)) star[1].push_back({v});
        }
    for (int j = 2; j <= top; ++j) {
        for (const auto& sigma : star[j - 1]) {
            for (Vertex v : nbrs) {
                if (v <= sigma.back()) continue;
                Simplex t = sigma;
                t.push_back(v);
                if (!c.contains(t)) continue;
                ptrs.clear();
                for (Vertex u : t) ptrs.push_back(s.point(u).data());
                ptrs.push_back(x.data());
                if (cech_simplex_test(ptrs.data(), static_cast<int>(ptrs.size()), d, r)) star[j].push_back(std::move(t));
            }
        }
    }
    return star;
}

// Boundary of {x} + sigma in the enlarged complex. Rows of old faces keep
// their indices; faces containing x are numbered after them.
Chain star_boundary(const SimplicialComplex& c, const std::vector<std::vector<Simplex>>& star, int j,
                    const Simplex& sigma, const FieldSpec& f) {
    Chain col;
    const int len = static_cast<int>(sigma.size());
    Simplex face;
    for (int drop = 0; drop < len; ++drop) {
        face.clear();
        for (int v = 0; v < len; ++v)
            if (v != drop) face.push_back(sigma[v]);
        const auto& lvl = star[static_cast<std::size_t>(j) - 1];
        const auto it = std::lower_bound(lvl.begin(), lvl.end(), face);
        const auto pos = static_cast<std::uint32_t>(c.count(j - 1) + static_cast<std::size_t>(it - lvl.begin()));
        col.push_back({pos, sign_coeff(f, drop)});
    }
    // Dropping x, the last vertex, leaves sigma itself.
    if (j >= 1 && len >= 1) col.push_back({static_cast<std::uint32_t>(*c.index_of(sigma)), sign_coeff(f, len)});
    std::sort(col.begin(), col.end(), [](const ChainEntry& a, const ChainEntry& b) { return a.index < b.index; });
    return col;
}

PointSample with_point(const PointSample& s, std::span<const double> x) {
    PointSample out = s;
    out.set_window(Window::ball(s.dim(), std::numeric_limits<double>::max()));
    out.push_back(x);
    return out;
}

PointSample unbounded_sample(int d, std::uint64_t seed = 0) {
    return PointSample(d, Window::ball(d, std::numeric_limits<double>::max()), seed);
}

}  // namespace

// Add-one cost -------------------------------------------------------------

double AddOneCostRecord::bound() const { return 2.0 * std::pow(static_cast<double>(local_count), k + 1); }

bool AddOneCostRecord::within_bound() const { return std::abs(static_cast<double>(cost)) <= bound(); }

AddOneCostContext::AddOneCostContext(PointSample s, double r, int k, FieldSpec field)
    : sample_(std::move(s)), r_(r), k_(k), field_(field), complex_(0, 0), reduce_k_(field), reduce_k1_(field) {
    if (k < 0) throw std::invalid_argument("k must be nonnegative");
    if (!(r >= 0)) throw std::invalid_argument("radius must be nonnegative");
    field_.validate();
    complex_ = build_cech(sample_, r, k + 1);
    if (k >= 1)
        for (std::size_t i = 0; i < complex_.count(k); ++i) reduce_k_.add(boundary_chain(complex_, k, i, field_));
    for (std::size_t i = 0; i < complex_.count(k + 1); ++i) reduce_k1_.add(boundary_chain(complex_, k + 1, i, field_));
    base_betti_ = static_cast<std::int64_t>(complex_.count(k)) - static_cast<std::int64_t>(reduce_k_.rank()) -
                  static_cast<std::int64_t>(reduce_k1_.rank());
}

AddOneCostRecord AddOneCostContext::cost(std::span<const double> x, bool verify) const {
    if (static_cast<int>(x.size()) != sample_.dim()) throw std::invalid_argument("dimension mismatch");
    std::vector<Vertex> nbrs;
    for (std::size_t i = 0; i < sample_.size(); ++i) {
        const auto p = sample_.point(i);
        if (std::equal(p.begin(), p.end(), x.begin())) throw std::invalid_argument("x is already a sample point");
        if (dist(p, x) <= 2 * r_) nbrs.push_back(static_cast<Vertex>(i));
    }
    const auto star = star_of(complex_, sample_, x, nbrs, r_, k_ + 1);

    AddOneCostRecord rec;
    rec.x.assign(x.begin(), x.end());
    rec.k = k_;
    rec.r = r_;
    rec.local_count = nbrs.size();
    rec.star_k = star[static_cast<std::size_t>(k_)].size();
    rec.star_k_plus_1 = star[static_cast<std::size_t>(k_) + 1].size();

    std::size_t grow_k = 0, grow_k1 = 0;
    if (k_ >= 1) {
        ColumnReducer red = reduce_k_;
        for (const auto& sigma : star[static_cast<std::size_t>(k_)])
            grow_k += red.add(star_boundary(complex_, star, k_, sigma, field_));
    }
    {
        ColumnReducer red = reduce_k1_;
        for (const auto& sigma : star[static_cast<std::size_t>(k_) + 1])
            grow_k1 += red.add(star_boundary(complex_, star, k_ + 1, sigma, field_));
    }
    rec.cost = static_cast<std::int64_t>(rec.star_k) - static_cast<std::int64_t>(grow_k) -
               static_cast<std::int64_t>(grow_k1);

    if (verify) {
        const auto big = build_cech(with_point(sample_, x), r_, k_ + 1);
        const auto direct = betti_number(big, k_, field_) - betti_number(complex_, k_, field_);
        if (direct != rec.cost) throw std::logic_error("incremental add-one cost disagrees with recomputation");
        for (int j = 0; j <= k_ + 1; ++j)
            if (big.count(j) != complex_.count(j) + star[static_cast<std::size_t>(j)].size())
                throw std::logic_error("star enumeration disagrees with recomputation");
        rec.verified = true;
    }
    return rec;
}

AddOneCostRecord add_one_cost(const PointSample& s, std::span<const double> x, double r, int k,
                              const FieldSpec& field, bool verify) {
    return AddOneCostContext(s, r, k, field).cost(x, verify);
}

// Weak stabilization ---------------------------------------------------------

std::int64_t StabilizationTrace::terminal_value() const { return steps.empty() ? 0 : steps.back().cost; }

double StabilizationTrace::stabilization_radius() const {
    if (steps.empty()) return 0.0;
    std::size_t t = steps.size() - 1;
    while (t > 0 && steps[t - 1].cost == steps.back().cost) --t;
    return steps[t].rho;
}

bool StabilizationTrace::stabilized() const {
    if (steps.size() < 2) return true;
    return steps[steps.size() - 2].cost == steps.back().cost;
}

std::size_t StabilizationTrace::kernel_monotonicity_violations() const {
    std::size_t bad = 0;
    for (std::size_t i = 1; i < steps.size(); ++i)
        bad += steps[i].kernel_k < steps[i - 1].kernel_k || steps[i].kernel_k_minus_1 < steps[i - 1].kernel_k_minus_1;
    return bad;
}

bool StabilizationTrace::kernels_monotone() const { return kernel_monotonicity_violations() == 0; }

bool StabilizationTrace::decomposition_holds() const {
    return std::all_of(steps.begin(), steps.end(), [](const TraceStep& s) { return s.decomposition_holds; });
}

std::string StabilizationTrace::to_csv(bool header) const {
    std::ostringstream out;
    out.precision(17);
    if (header) out << "seed,rho,cost,kernel_k,kernel_k_minus_1\n";
    for (const auto& s : steps)
        out << seed << ',' << s.rho << ',' << s.cost << ',' << s.kernel_k << ',' << s.kernel_k_minus_1 << '\n';
    return out.str();
}

StabilizationTrace weak_stabilization_trace(const PointSample& s, double r, int k, std::span<const double> rhos,
                                            const FieldSpec& field) {
    if (k < 0) throw std::invalid_argument("k must be nonnegative");
    if (!std::is_sorted(rhos.begin(), rhos.end())) throw std::invalid_argument("radii must be ascending");
    if (!rhos.empty() && rhos.front() < 2 * r) throw std::invalid_argument("radii must be at least 2r");
    field.validate();
    const int d = s.dim();

    // Vertex 0 is the origin; the rest are sample points sorted by norm, so
    // every P n B_O(rho) is a prefix.
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> norms(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        norms[i] = norm(s.point(i));
        if (norms[i] == 0.0) throw std::invalid_argument("sample contains the origin");
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
    PointSample all = unbounded_sample(d, s.seed());
    all.push_back(std::vector<double>(static_cast<std::size_t>(d), 0.0));
    std::vector<double> sorted_norms;
    for (auto i : order) {
        all.push_back(s.point(i));
        sorted_norms.push_back(norms[i]);
    }
    const auto full = build_cech(all, r, k + 1);

    auto prefix = [&](double rho, bool origin) {
        const auto m = static_cast<std::size_t>(std::upper_bound(sorted_norms.begin(), sorted_norms.end(), rho) -
                                                sorted_norms.begin());
        std::vector<Vertex> keep;
        if (origin) keep.push_back(0);
        for (std::size_t i = 1; i <= m; ++i) keep.push_back(static_cast<Vertex>(i));
        return std::make_pair(restrict_to_vertices(full, keep), m);
    };

    StabilizationTrace trace;
    trace.seed = s.seed();
    trace.k = k;
    trace.r = r;
    const auto inner = prefix(2 * r, true).first;
    const auto link = prefix(2 * r, false).first;
    trace.beta_inner = betti_number(inner, k, field);
    trace.beta_link = betti_number(link, k, field);

    for (double rho : rhos) {
        const auto [with_o, m] = prefix(rho, true);
        const auto without = prefix(rho, false).first;
        TraceStep step;
        step.rho = rho;
        step.points = m;
        step.cost = betti_number(with_o, k, field) - betti_number(without, k, field);
        const SimplicialComplex targets[] = {without, inner};
        step.kernel_k = static_cast<std::int64_t>(induced_map_kernel_rank(link, targets, k, field));
        step.kernel_k_minus_1 =
            k >= 1 ? static_cast<std::int64_t>(induced_map_kernel_rank(link, targets, k - 1, field)) : 0;
        step.decomposition_holds =
            step.cost == trace.beta_inner + step.kernel_k + step.kernel_k_minus_1 - trace.beta_link;
        trace.steps.push_back(step);
    }
    return trace;
}

StabilizationTrace weak_stabilization_trace(std::uint64_t seed, double lambda, int d, double r, int k,
                                            std::span<const double> rhos, const FieldSpec& field) {
    if (rhos.empty()) throw std::invalid_argument("empty radius list");
    const double top = *std::max_element(rhos.begin(), rhos.end());
    const auto s = sample_homogeneous_poisson(lambda, Window::ball(d, top), seed);
    return weak_stabilization_trace(s, r, k, rhos, field);
}

// Strong stabilization ---------------------------------------------------------

StrongStabilizationProbe::StrongStabilizationProbe(std::uint64_t seed, double lambda, int d, double r, int k,
                                                   FieldSpec field)
    : r_(r), d_(d), k_(k), field_(field), inner_(d, Window::ball(d, 1.0)) {
    if (!(r > 0)) throw std::invalid_argument("radius must be positive");
    field_.validate();
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt > 8) throw std::runtime_error("clusters at the origin did not fit any sampling window");
        const double window = 40 * r * std::pow(2.0, static_cast<double>(attempt));
        const auto s = sample_homogeneous_poisson(lambda, Window::ball(d, window), derive_seed(seed, "probe", attempt));
        const auto g = build_neighbor_graph(s, 2 * r);

        // Components of the 2r graph with a point within 2r of the origin,
        // i.e. whose balls meet B_O(r).
        std::vector<int> comp(s.size(), -1);
        std::vector<std::uint8_t> touches;
        int count = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (comp[i] >= 0) continue;
            std::vector<std::uint32_t> stack{static_cast<std::uint32_t>(i)};
            comp[i] = count;
            bool near = false;
            while (!stack.empty()) {
                const auto v = stack.back();
                stack.pop_back();
                near = near || norm(s.point(v)) <= 2 * r;
                for (auto w : g.adjacency[v])
                    if (comp[w] < 0) {
                        comp[w] = count;
                        stack.push_back(w);
                    }
            }
            touches.push_back(near);
            ++count;
        }
        double reach = 0.0;
        PointSample cluster = unbounded_sample(d);
        std::size_t clusters = 0;
        for (int c = 0; c < count; ++c) clusters += touches[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < s.size(); ++i)
            if (touches[static_cast<std::size_t>(comp[i])]) {
                reach = std::max(reach, norm(s.point(i)));
                cluster.push_back(s.point(i));
            }
        // A cluster reaching the window edge may continue outside it.
        if (reach > window - 2 * r) continue;

        components_ = clusters;
        radius_ = std::max(4 * r, reach + 4 * r);
        inner_ = restrict_to(s, Window::ball(d, radius_));
        const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
        base_cost_ = add_one_cost(inner_, origin, r, k, field_).cost;
        cluster_cost_ = add_one_cost(cluster, origin, r, k, field_).cost;
        return;
    }
}

std::int64_t StrongStabilizationProbe::cost_with(std::span<const std::vector<double>> adversarial) const {
    PointSample s = inner_;
    s.set_window(Window::ball(d_, std::numeric_limits<double>::max()));
    for (const auto& x : adversarial) {
        if (static_cast<int>(x.size()) != d_) throw std::invalid_argument("dimension mismatch");
        if (norm(x) <= radius_) throw std::invalid_argument("adversarial point inside the stabilization radius");
        s.push_back(x);
    }
    return add_one_cost(s, std::vector<double>(static_cast<std::size_t>(d_), 0.0), r_, k_, field_).cost;
}

bool StrongStabilizationProbe::check(std::span<const std::vector<std::vector<double>>> adversarial_sets) const {
    return std::all_of(adversarial_sets.begin(), adversarial_sets.end(),
                       [&](const auto& x) { return cost_with(x) == base_cost_; });
}

std::vector<std::vector<double>> adversarial_ring(int d, double radius, std::size_t count, double phase) {
    if (d < 2) throw std::invalid_argument("rings need d >= 2");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double a = phase + 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
        std::vector<double> p(static_cast<std::size_t>(d), 0.0);
        p[0] = radius * std::cos(a);
        p[1] = radius * std::sin(a);
        out.push_back(std::move(p));
    }
    return out;
}

// Sphere configurations ----------------------------------------------------------

namespace {

constexpr double kSphereRadius = 1.5;

// Net of the k-sphere of radius rho in the first k + 1 coordinates.
std::vector<std::vector<double>> sphere_net(int k, int d, double rho, double spacing) {
    std::vector<std::vector<double>> out;
    auto point = [&](std::initializer_list<double> head) {
        std::vector<double> p(static_cast<std::size_t>(d), 0.0);
        std::copy(head.begin(), head.end(), p.begin());
        out.push_back(std::move(p));
    };
    const double pi = std::numbers::pi;
    if (k == 1) {
        const int m = std::max(3, static_cast<int>(std::ceil(2 * pi * rho / spacing)));
        for (int i = 0; i < m; ++i) point({rho * std::cos(2 * pi * i / m), rho * std::sin(2 * pi * i / m)});
    } else if (k == 2) {
        const int bands = std::max(2, static_cast<int>(std::ceil(pi * rho / spacing)));
        point({0, 0, rho});
        for (int i = 1; i < bands; ++i) {
            const double theta = pi * i / bands;
            const int m = std::max(3, static_cast<int>(std::ceil(2 * pi * rho * std::sin(theta) / spacing)));
            for (int j = 0; j < m; ++j) {
                const double phi = 2 * pi * (j + 0.5 * (i % 2)) / m;
                point({rho * std::sin(theta) * std::cos(phi), rho * std::sin(theta) * std::sin(phi),
                       rho * std::cos(theta)});
            }
        }
        point({0, 0, -rho});
    } else {
        throw std::invalid_argument("sphere nets are implemented for k = 1 and k = 2");
    }
    return out;
}

// Upper bound on max_u min_i |u - v_i| over the unit k-sphere, from a grid
// of resolution h on that sphere.
double covering_radius(std::span<const std::vector<double>> net, int k, int d) {
    const double h = 0.01;
    const auto probes = sphere_net(k, d, 1.0, h);
    double worst = 0.0;
    for (const auto& u : probes) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& v : net) best = std::min(best, dist(u, v));
        worst = std::max(worst, best);
    }
    // Every point of the unit sphere lies within h of a probe.
    return worst + h;
}

PointSample as_sample(std::span<const std::vector<double>> points, int d) {
    PointSample s = unbounded_sample(d);
    for (const auto& p : points) s.push_back(p);
    return s;
}

}  // namespace

SphereCheck check_sphere_configuration(std::span<const std::vector<double>> points, int k, int d, double r) {
    SphereCheck out;
    out.min_norm = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        out.min_norm = std::min(out.min_norm, norm(p));
        out.max_norm = std::max(out.max_norm, norm(p));
    }
    // B_z(r) misses the closed ball B_O(r/4) iff |z| > 1.25 r.
    out.avoids_inner_ball = !points.empty() && out.min_norm > 1.25 * r;
    out.inside_outer_ball = !points.empty() && out.max_norm <= 2 * r;
    const auto c = build_cech(as_sample(points, d), r, d);
    const auto b = betti_numbers(c);
    out.betti.assign(b.betti.begin(), b.betti.end());
    out.homology_ok = true;
    for (int j = 0; j < d; ++j) {
        const std::int64_t want = (j == 0 || j == k) ? 1 : 0;
        out.homology_ok = out.homology_ok && b.at(static_cast<std::size_t>(j)) == want;
    }
    return out;
}

std::string SphereConfiguration::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "i";
    for (int j = 0; j < d; ++j) out << ",x" << j;
    out << '\n';
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << i;
        for (double v : points[i]) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

std::string SphereConfiguration::manifest_json() const {
    nlohmann::ordered_json j;
    j["k"] = k;
    j["d"] = d;
    j["r"] = r;
    j["m"] = m();
    j["epsilon"] = epsilon;
    j["c_star"] = c_star;
    j["spacing"] = spacing;
    j["refinements"] = refinements;
    j["betti"] = check.betti;
    return j.dump(2);
}

SphereConfiguration build_sphere_configuration(int k, int d, double r) {
    if (k < 1 || k > d - 1) throw std::invalid_argument("need 1 <= k <= d - 1");
    if (!(r > 0)) throw std::invalid_argument("radius must be positive");
    SphereConfiguration cfg;
    cfg.k = k;
    cfg.d = d;
    cfg.r = r;
    double spacing = 1.2;
    for (int refine = 0; refine < 6; ++refine, spacing /= 2) {
        const auto unit = sphere_net(k, d, kSphereRadius, spacing);
        const double cover = covering_radius(unit, k, d);
        const double eps = std::min(0.24, 1.0 - cover);
        std::vector<std::vector<double>> pts = unit;
        for (auto& p : pts)
            for (auto& v : p) v *= r;
        const auto chk = check_sphere_configuration(pts, k, d, r);
        if (!chk.ok() || eps <= 0) continue;
        cfg.points = std::move(pts);
        cfg.spacing = spacing;
        cfg.refinements = refine;
        cfg.epsilon = eps;
        cfg.check = chk;

        // Bisection on the jitter radius c r: a level passes when 20 random
        // jitters of every point keep all invariants.
        double lo = 0.0, hi = 0.5;
        for (int level = 0; level < 12; ++level) {
            const double mid = 0.5 * (lo + hi);
            auto rng = make_rng(0x5be7e5ULL, "jitter", static_cast<std::uint64_t>(level));
            std::normal_distribution<double> gauss;
            std::uniform_real_distribution<double> unif;
            bool pass = true;
            for (int trial = 0; trial < 20 && pass; ++trial) {
                auto moved = cfg.points;
                for (auto& p : moved) {
                    std::vector<double> dir(static_cast<std::size_t>(d));
                    double len = 0;
                    for (auto& v : dir) {
                        v = gauss(rng);
                        len += v * v;
                    }
                    len = std::sqrt(len);
                    const double rad = mid * r * std::pow(unif(rng), 1.0 / d);
                    for (int j = 0; j < d; ++j) p[static_cast<std::size_t>(j)] += rad * dir[static_cast<std::size_t>(j)] / len;
                }
                pass = check_sphere_configuration(moved, k, d, r).ok();
            }
            (pass ? lo : hi) = mid;
        }
        cfg.c_star = lo;
        return cfg;
    }
    throw std::runtime_error("sphere configuration failed after refinement");
}

// Variance lower-bound hypothesis ---------------------------------------------

LowerBoundReport variance_lowerbound_hypothesis_check(std::int64_t n, const DensitySpec& f, int k, double r,
                                                      std::size_t seeds, std::uint64_t master_seed,
                                                      const FieldSpec& field) {
    const Window& supp = f.support();
    const int d = supp.dim();
    if (n < 1 || !(r > 0)) throw std::invalid_argument("need n >= 1 and r > 0");
    LowerBoundReport rep;
    rep.n = n;
    rep.k = k;
    rep.r = r;
    rep.r_n = std::pow(r / static_cast<double>(n), 1.0 / d);

    std::vector<double> x(static_cast<std::size_t>(d));
    const auto lo = supp.lower(), hi = supp.upper();
    for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = 0.5 * (lo[static_cast<std::size_t>(j)] + hi[static_cast<std::size_t>(j)]);
    if (supp.distance_to_boundary(x) < 3 * rep.r_n) throw std::invalid_argument("B_x(3 r_n) is not inside the support");

    const auto sphere = build_sphere_configuration(k, d, rep.r_n);
    rep.m = sphere.m();
    const double omega = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1);
    rep.void_bound = std::exp(-omega * static_cast<double>(n) * std::pow(rep.r_n, d) * f.f_upper());

    double sum = 0, sum2 = 0;
    for (std::size_t t = 0; t < seeds; ++t) {
        const auto p = sample_inhomogeneous_poisson(static_cast<double>(n), f, derive_seed(master_seed, "lowerbound", t));
        std::size_t in_r = 0, in_2r = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double dd = dist(p.point(i), x);
            in_r += dd <= rep.r_n;
            in_2r += dd <= 2 * rep.r_n;
        }
        PointSample s = p;
        s.set_window(Window::ball(d, std::numeric_limits<double>::max()));
        for (const auto& z : sphere.points) {
            std::vector<double> y = x;
            for (int j = 0; j < d; ++j) y[static_cast<std::size_t>(j)] += z[static_cast<std::size_t>(j)];
            s.push_back(y);
        }
        const auto cost = add_one_cost(s, x, rep.r_n, k, field).cost;
        sum += static_cast<double>(cost);
        sum2 += static_cast<double>(cost) * static_cast<double>(cost);
        rep.void_r += in_r == 0;
        rep.void_2r += in_2r == 0;
        rep.void_r_violations += in_r == 0 && cost > -1;
        rep.void_2r_violations += in_2r == 0 && cost > -1;
        if (k == d - 1) rep.sign_violations += cost > 0;
        ++rep.samples;
    }
    if (rep.samples > 0) {
        const double ns = static_cast<double>(rep.samples);
        rep.mean_cost = sum / ns;
        const double var = rep.samples > 1 ? std::max(0.0, (sum2 - ns * rep.mean_cost * rep.mean_cost) / (ns - 1)) : 0.0;
        rep.std_error = std::sqrt(var / ns);
    }
    return rep;
}

// Packing constant ---------------------------------------------------------------

namespace {

double min_pairwise(const std::vector<std::vector<double>>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, dist(pts[i], pts[j]));
    return best;
}

// Projected repulsion on the sphere of radius 2.
std::vector<std::vector<double>> spread(int d, std::size_t m, Rng& rng) {
    std::normal_distribution<double> gauss;
    std::vector<std::vector<double>> pts(m, std::vector<double>(static_cast<std::size_t>(d)));
    auto project = [](std::vector<double>& p) {
        const double len = norm(p);
        for (auto& v : p) v *= 2.0 / len;
    };
    for (auto& p : pts) {
        for (auto& v : p) v = gauss(rng);
        project(p);
    }
    if (m < 2) return pts;
    double step = 0.2;
    std::vector<std::vector<double>> force(m, std::vector<double>(static_cast<std::size_t>(d)));
    for (int it = 0; it < 3000; ++it) {
        for (auto& f : force) std::fill(f.begin(), f.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double dd = std::max(dist(pts[i], pts[j]), 1e-9);
                const double w = std::pow(2.0 / dd, 12) / dd;
                for (int t = 0; t < d; ++t) {
                    const double g = w * (pts[i][static_cast<std::size_t>(t)] - pts[j][static_cast<std::size_t>(t)]) / dd;
                    force[i][static_cast<std::size_t>(t)] += g;
                    force[j][static_cast<std::size_t>(t)] -= g;
                }
            }
        for (std::size_t i = 0; i < m; ++i) {
            const double len = norm(force[i]);
            if (len == 0) continue;
            for (int t = 0; t < d; ++t) pts[i][static_cast<std::size_t>(t)] += step * force[i][static_cast<std::size_t>(t)] / len;
            project(pts[i]);
        }
        step *= 0.998;
    }
    return pts;
}

}  // namespace

PackingResult packing_lower_bound(int d, std::uint64_t seed, int restarts) {
    if (d < 1 || d > 4) throw std::invalid_argument("packing search supports 1 <= d <= 4");
    PackingResult best;
    best.d = d;
    for (std::size_t m = 1; m <= 64; ++m) {
        bool found = false;
        auto rng = make_rng(seed, "packing", m);
        for (int t = 0; t < restarts && !found; ++t) {
            auto pts = d == 1 ? std::vector<std::vector<double>>{} : spread(d, m, rng);
            if (d == 1) {
                if (m > 2) break;
                pts = m == 1 ? std::vector<std::vector<double>>{{2.0}} : std::vector<std::vector<double>>{{-2.0}, {2.0}};
            }
            const double md = m < 2 ? std::numeric_limits<double>::infinity() : min_pairwise(pts);
            // Strict separation with a margin well above rounding.
            if (md > 2.0 + 1e-9 && std::all_of(pts.begin(), pts.end(), [](const auto& p) { return norm(p) <= 2.0 + 1e-12; })) {
                best.points = std::move(pts);
                best.min_distance = md;
                found = true;
            }
        }
        if (!found) break;
    }
    return best;
}

}  // namespace cechlab
