#include "cechlab/point_process.hpp"

#include "cechlab/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cechlab {

namespace {

double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

void require_dim(int dim) {
    if (dim < 1) throw std::invalid_argument("window dimension must be >= 1");
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_doubles(std::string_view text, char sep) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto next = text.find(sep, pos);
        if (next == std::string_view::npos) next = text.size();
        auto tok = text.substr(pos, next - pos);
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
        while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
            tok.remove_suffix(1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
            throw std::invalid_argument("cannot parse number '" + std::string(tok) + "'");
        out.push_back(v);
        pos = next + 1;
    }
    return out;
}

// Uniform draw in w; rejection from the bounding box for balls and for the
// rare rounding onto an open upper face.
void draw_uniform(const Window& w, Rng& rng, std::vector<double>& out) {
    const auto lo = w.lower();
    const auto hi = w.upper();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    out.resize(lo.size());
    do {
        for (std::size_t i = 0; i < lo.size(); ++i) out[i] = lo[i] + u(rng) * (hi[i] - lo[i]);
    } while (!w.contains(out));
}

std::uint64_t poisson_count(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> dist(mean);
    return static_cast<std::uint64_t>(dist(rng));
}

// One iid draw from f by rejection against the uniform proposal on its support.
void draw_from_density(const DensitySpec& f, Rng& rng, std::vector<double>& out) {
    if (f.is_uniform()) {
        draw_uniform(f.support(), rng, out);
        return;
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        draw_uniform(f.support(), rng, out);
        if (u(rng) * f.f_upper() < f(out)) return;
    }
}

extern "C" void zhseqr_(const char* job, const char* compz, const int* n, const int* ilo, const int* ihi,
                        std::complex<double>* h, const int* ldh, std::complex<double>* w, std::complex<double>* z,
                        const int* ldz, std::complex<double>* work, const int* lwork, int* info);

// Eigenvalues of an upper Hessenberg matrix (column-major, overwritten).
int hessenberg_eigenvalues(int n, std::vector<std::complex<double>>& h, std::vector<std::complex<double>>& w) {
    static std::mutex lapack_mutex;
    const std::lock_guard<std::mutex> lock(lapack_mutex);
    const char job = 'E', compz = 'N';
    const int one = 1;
    int info = 0, lwork = -1;
    std::complex<double> query, dummy;
    zhseqr_(&job, &compz, &n, &one, &n, h.data(), &n, w.data(), &dummy, &one, &query, &lwork, &info);
    lwork = std::max(1, static_cast<int>(query.real()));
    std::vector<std::complex<double>> work(static_cast<std::size_t>(lwork));
    zhseqr_(&job, &compz, &n, &one, &n, h.data(), &n, w.data(), &dummy, &one, work.data(), &lwork, &info);
    return info;
}

}  // namespace

// Window --------------------------------------------------------------------

Window Window::cube(int dim, double side) {
    require_dim(dim);
    if (!positive_finite(side)) throw std::invalid_argument("degenerate window: cube side must be > 0");
    Window w;
    w.kind_ = Kind::cube;
    w.dim_ = dim;
    w.side_ = side;
    return w;
}

Window Window::ball(int dim, double radius) {
    require_dim(dim);
    if (!positive_finite(radius)) throw std::invalid_argument("degenerate window: ball radius must be > 0");
    Window w;
    w.kind_ = Kind::ball;
    w.dim_ = dim;
    w.radius_ = radius;
    return w;
}

Window Window::box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in dimension");
    require_dim(static_cast<int>(lo.size()));
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(hi[i] > lo[i]))
            throw std::invalid_argument("degenerate window: box extents must be > 0");
    Window w;
    w.kind_ = Kind::box;
    w.dim_ = static_cast<int>(lo.size());
    w.lo_ = std::move(lo);
    w.hi_ = std::move(hi);
    return w;
}

Window Window::parse(int dim, std::string_view spec) {
    auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("window spec needs kind:value");
    auto kind = spec.substr(0, colon);
    auto vals = parse_doubles(spec.substr(colon + 1), ',');
    if (kind == "cube" && vals.size() == 1) return cube(dim, vals[0]);
    if (kind == "ball" && vals.size() == 1) return ball(dim, vals[0]);
    if (kind == "box" && vals.size() == 2 * static_cast<std::size_t>(dim)) {
        std::vector<double> lo, hi;
        for (int i = 0; i < dim; ++i) {
            lo.push_back(vals[2 * i]);
            hi.push_back(vals[2 * i + 1]);
        }
        return box(lo, hi);
    }
    throw std::invalid_argument("unrecognised window spec '" + std::string(spec) + "'");
}

double Window::volume() const {
    switch (kind_) {
        case Kind::cube: return std::pow(side_, dim_);
        case Kind::ball: return unit_ball_volume(dim_) * std::pow(radius_, dim_);
        case Kind::box: {
            double v = 1.0;
            for (std::size_t i = 0; i < lo_.size(); ++i) v *= hi_[i] - lo_[i];
            return v;
        }
    }
    return 0.0;
}

bool Window::contains(std::span<const double> x) const {
    switch (kind_) {
        case Kind::cube: {
            const double h = side_ / 2.0;
            for (double c : x)
                if (c < -h || c >= h) return false;
            return true;
        }
        case Kind::ball: {
            double s = 0.0;
            for (double c : x) s += c * c;
            return s <= radius_ * radius_;
        }
        case Kind::box:
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] < lo_[i] || x[i] >= hi_[i]) return false;
            return true;
    }
    return false;
}

std::vector<double> Window::lower() const {
    switch (kind_) {
        case Kind::cube: return std::vector<double>(dim_, -side_ / 2.0);
        case Kind::ball: return std::vector<double>(dim_, -radius_);
        case Kind::box: return lo_;
    }
    return {};
}

std::vector<double> Window::upper() const {
    switch (kind_) {
        case Kind::cube: return std::vector<double>(dim_, side_ / 2.0);
        case Kind::ball: return std::vector<double>(dim_, radius_);
        case Kind::box: return hi_;
    }
    return {};
}

double Window::distance_to_boundary(std::span<const double> x) const {
    if (kind_ == Kind::ball) {
        double s = 0.0;
        for (double c : x) s += c * c;
        return std::abs(radius_ - std::sqrt(s));
    }
    const auto lo = lower();
    const auto hi = upper();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i)
        best = std::min({best, std::abs(x[i] - lo[i]), std::abs(hi[i] - x[i])});
    return best;
}

std::string Window::describe() const {
    switch (kind_) {
        case Kind::cube: return "cube:" + fmt_double(side_);
        case Kind::ball: return "ball:" + fmt_double(radius_);
        case Kind::box: {
            std::string s = "box:";
            for (std::size_t i = 0; i < lo_.size(); ++i) {
                if (i) s += ',';
                s += fmt_double(lo_[i]) + "," + fmt_double(hi_[i]);
            }
            return s;
        }
    }
    return {};
}

// ProcessTag ----------------------------------------------------------------

std::string_view ProcessTag::kind_name(Kind k) {
    switch (k) {
        case Kind::poisson: return "poisson";
        case Kind::binomial: return "binomial";
        case Kind::inhom_poisson: return "inhom_poisson";
        case Kind::extended_binomial: return "extended_binomial";
        case Kind::ginibre: return "ginibre";
        case Kind::manual: return "manual";
    }
    return "manual";
}

std::string ProcessTag::describe() const {
    std::string s(kind_name(kind));
    switch (kind) {
        case Kind::poisson: s += "(lambda=" + fmt_double(intensity) + ")"; break;
        case Kind::binomial:
        case Kind::inhom_poisson: s += "(n=" + std::to_string(count) + "," + density + ")"; break;
        case Kind::extended_binomial: s += "(n=" + std::to_string(count) + ")"; break;
        case Kind::ginibre: s += "(N=" + std::to_string(count) + ")"; break;
        case Kind::manual: break;
    }
    return s;
}

// PointSample ---------------------------------------------------------------

PointSample::PointSample(int dim, Window window, std::uint64_t seed, ProcessTag tag)
    : dim_(dim), window_(std::move(window)), seed_(seed), tag_(std::move(tag)) {
    require_dim(dim);
    if (window_.dim() != dim) throw std::invalid_argument("sample and window dimension differ");
}

PointSample::PointSample(int dim, std::vector<double> coords, Window window, std::uint64_t seed,
                         ProcessTag tag)
    : PointSample(dim, std::move(window), seed, std::move(tag)) {
    if (coords.size() % static_cast<std::size_t>(dim) != 0)
        throw std::invalid_argument("coordinate count is not a multiple of the dimension");
    coords_ = std::move(coords);
}

void PointSample::push_back(std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(dim_)) throw std::invalid_argument("point dimension mismatch");
    coords_.insert(coords_.end(), x.begin(), x.end());
}

bool PointSample::is_simple() const {
    std::vector<std::size_t> idx(size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto less = [&](std::size_t a, std::size_t b) {
        auto pa = point(a), pb = point(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    };
    std::sort(idx.begin(), idx.end(), less);
    for (std::size_t i = 1; i < idx.size(); ++i) {
        auto pa = point(idx[i - 1]), pb = point(idx[i]);
        if (std::equal(pa.begin(), pa.end(), pb.begin())) return false;
    }
    return true;
}

// DensitySpec ---------------------------------------------------------------

DensitySpec DensitySpec::uniform(Window support) {
    DensitySpec f(std::move(support));
    f.f_lower_ = f.f_upper_ = 1.0 / f.support_.volume();
    f.label_ = "uniform";
    return f;
}

DensitySpec DensitySpec::tabulated(Window support, std::size_t nodes_per_axis,
                                   std::vector<double> values, std::string label) {
    if (support.kind() == Window::Kind::ball)
        throw std::invalid_argument("tabulated densities need a cube or box support");
    if (nodes_per_axis < 2) throw std::invalid_argument("tabulation needs >= 2 nodes per axis");
    std::size_t expect = 1;
    for (int i = 0; i < support.dim(); ++i) expect *= nodes_per_axis;
    if (values.size() != expect) throw std::invalid_argument("tabulation has the wrong number of values");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("density values must be finite and >= 0");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > 0.0)) throw std::invalid_argument("density is identically zero");
    DensitySpec f(std::move(support));
    f.nodes_ = nodes_per_axis;
    f.values_ = std::move(values);
    f.f_lower_ = lo;
    f.f_upper_ = hi * 1.01;
    f.label_ = std::move(label);
    if (std::abs(f.integral() - 1.0) > 1e-6)
        throw std::invalid_argument("density does not integrate to 1 (integral " + fmt_double(f.integral()) + ")");
    return f;
}

DensitySpec DensitySpec::tabulate(Window support, std::size_t nodes_per_axis,
                                  const std::function<double(std::span<const double>)>& fn,
                                  std::string label) {
    const int d = support.dim();
    const auto lo = support.lower();
    const auto hi = support.upper();
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= nodes_per_axis;
    std::vector<double> values(total), x(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int ax = d - 1; ax >= 0; --ax) {
            const std::size_t j = rem % nodes_per_axis;
            rem /= nodes_per_axis;
            x[ax] = lo[ax] + (hi[ax] - lo[ax]) * static_cast<double>(j) / static_cast<double>(nodes_per_axis - 1);
        }
        values[flat] = fn(x);
    }
    return tabulated(std::move(support), nodes_per_axis, std::move(values), std::move(label));
}

double DensitySpec::operator()(std::span<const double> x) const {
    if (!support_.contains(x)) return 0.0;
    if (is_uniform()) return f_lower_;
    const int d = support_.dim();
    const auto lo = support_.lower();
    const auto hi = support_.upper();
    const double cells = static_cast<double>(nodes_ - 1);
    std::vector<std::size_t> base(d);
    std::vector<double> frac(d);
    for (int ax = 0; ax < d; ++ax) {
        double t = (x[ax] - lo[ax]) / (hi[ax] - lo[ax]) * cells;
        t = std::clamp(t, 0.0, cells);
        auto b = static_cast<std::size_t>(std::floor(t));
        if (b >= nodes_ - 1) b = nodes_ - 2;
        base[ax] = b;
        frac[ax] = t - static_cast<double>(b);
    }
    double acc = 0.0;
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int ax = 0; ax < d; ++ax) {
            const bool up = (corner >> ax) & 1u;
            w *= up ? frac[ax] : 1.0 - frac[ax];
            flat = flat * nodes_ + base[ax] + (up ? 1 : 0);
        }
        acc += w * values_[flat];
    }
    return acc;
}

double DensitySpec::integral() const {
    if (is_uniform()) return 1.0;
    const int d = support_.dim();
    const std::size_t cells = nodes_ - 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= cells;
    // The multilinear interpolant integrates to the corner average per cell.
    double sum = 0.0;
    std::vector<std::size_t> idx(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int ax = d - 1; ax >= 0; --ax) {
            idx[ax] = rem % cells;
            rem /= cells;
        }
        double corner_sum = 0.0;
        for (unsigned corner = 0; corner < (1u << d); ++corner) {
            std::size_t f = 0;
            for (int ax = 0; ax < d; ++ax) f = f * nodes_ + idx[ax] + ((corner >> ax) & 1u);
            corner_sum += values_[f];
        }
        sum += corner_sum / static_cast<double>(1u << d);
    }
    return sum * support_.volume() / static_cast<double>(total);
}

double DensitySpec::ball_mass(std::span<const double> x, double radius, std::size_t cells_per_axis) const {
    const int d = support_.dim();
    if (is_uniform()) {
        // Exact when the ball lies inside the support.
        bool inside = support_.contains(x) && support_.distance_to_boundary(x) >= radius;
        if (inside) return unit_ball_volume(d) * std::pow(radius, d) * f_lower_;
    }
    const double h = 2.0 * radius / static_cast<double>(cells_per_axis);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= cells_per_axis;
    std::vector<double> y(d);
    double sum = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double r2 = 0.0;
        for (int ax = d - 1; ax >= 0; --ax) {
            const std::size_t j = rem % cells_per_axis;
            rem /= cells_per_axis;
            const double off = -radius + (static_cast<double>(j) + 0.5) * h;
            y[ax] = x[ax] + off;
            r2 += off * off;
        }
        if (r2 <= radius * radius) sum += (*this)(y);
    }
    return sum * std::pow(h, d);
}

// WindowSequence ------------------------------------------------------------

WindowSequence::WindowSequence(int dim, Shape shape) : dim_(dim), shape_(shape) {
    require_dim(dim);
    const double lead = shape == Shape::cube ? std::sqrt(static_cast<double>(dim))
                                             : 2.0 * std::pow(unit_ball_volume(dim), -1.0 / dim);
    b1_ = std::max(lead, 1.0);
}

WindowSequence WindowSequence::cubes(int dim) { return WindowSequence(dim, Shape::cube); }
WindowSequence WindowSequence::balls(int dim) { return WindowSequence(dim, Shape::ball); }

Window WindowSequence::at(std::int64_t n) const {
    if (n < 1) throw std::invalid_argument("window sequence index must be >= 1");
    const double v = static_cast<double>(n);
    if (shape_ == Shape::cube) return Window::cube(dim_, std::pow(v, 1.0 / dim_));
    return Window::ball(dim_, std::pow(v / unit_ball_volume(dim_), 1.0 / dim_));
}

double WindowSequence::boundary_layer_volume(std::int64_t n, double r) const {
    const Window w = at(n);
    if (shape_ == Shape::cube) {
        const double s = w.side();
        return std::pow(s + 2.0 * r, dim_) - std::pow(std::max(s - 2.0 * r, 0.0), dim_);
    }
    const double R = w.radius();
    return unit_ball_volume(dim_) * (std::pow(R + r, dim_) - std::pow(std::max(R - r, 0.0), dim_));
}

// Samplers ------------------------------------------------------------------

PointSample sample_homogeneous_poisson(double intensity, const Window& w, std::uint64_t seed) {
    if (!positive_finite(intensity)) throw std::invalid_argument("intensity must be > 0");
    ProcessTag tag{ProcessTag::Kind::poisson, intensity, 0, {}};
    PointSample s(w.dim(), w, seed, tag);
    auto count_rng = make_rng(seed, "count");
    auto coord_rng = make_rng(seed, "coords");
    const auto n = poisson_count(intensity * w.volume(), count_rng);
    std::vector<double> x;
    for (std::uint64_t i = 0; i < n; ++i) {
        draw_uniform(w, coord_rng, x);
        s.push_back(x);
    }
    return s;
}

PointSample sample_binomial(std::int64_t n, const DensitySpec& f, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("binomial count must be >= 0");
    ProcessTag tag{ProcessTag::Kind::binomial, 0.0, n, f.label()};
    PointSample s(f.support().dim(), f.support(), seed, tag);
    auto rng = make_rng(seed, "coords");
    std::vector<double> x;
    for (std::int64_t i = 0; i < n; ++i) {
        draw_from_density(f, rng, x);
        s.push_back(x);
    }
    return s;
}

PointSample sample_inhomogeneous_poisson(double n, const DensitySpec& f, std::uint64_t seed) {
    if (!positive_finite(n)) throw std::invalid_argument("intensity scale n must be > 0");
    ProcessTag tag{ProcessTag::Kind::inhom_poisson, n, static_cast<std::int64_t>(std::llround(n)), f.label()};
    const Window& w = f.support();
    PointSample s(w.dim(), w, seed, tag);
    auto count_rng = make_rng(seed, "count");
    auto coord_rng = make_rng(seed, "coords");
    auto thin_rng = make_rng(seed, "thin");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto candidates = poisson_count(n * f.f_upper() * w.volume(), count_rng);
    std::vector<double> x;
    for (std::uint64_t i = 0; i < candidates; ++i) {
        draw_uniform(w, coord_rng, x);
        const double keep = u(thin_rng);
        if (f.is_uniform() || keep * f.f_upper() < f(x)) s.push_back(x);
    }
    return s;
}

PointSample sample_extended_binomial(std::int64_t n, const WindowSequence& seq, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("extended binomial count must be >= 1");
    const Window w = seq.at(n);
    ProcessTag tag{ProcessTag::Kind::extended_binomial, 0.0, n, w.describe()};
    PointSample s(w.dim(), w, seed, tag);
    auto rng = make_rng(seed, "coords");
    std::vector<double> x;
    for (std::int64_t i = 0; i < n; ++i) {
        draw_uniform(w, rng, x);
        s.push_back(x);
    }
    return s;
}

std::pair<PointSample, PointSample> sample_coupled_poisson_binomial(std::int64_t n, const DensitySpec& f,
                                                                    std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("coupling needs n >= 1");
    auto count_rng = make_rng(seed, "count");
    auto coord_rng = make_rng(seed, "coords");
    const auto poisson_n = static_cast<std::int64_t>(poisson_count(static_cast<double>(n), count_rng));
    const std::int64_t total = std::max(poisson_n, n);
    const Window& w = f.support();
    PointSample poisson(w.dim(), w, seed,
                        ProcessTag{ProcessTag::Kind::inhom_poisson, static_cast<double>(n), n, f.label()});
    PointSample binomial(w.dim(), w, seed, ProcessTag{ProcessTag::Kind::binomial, 0.0, n, f.label()});
    std::vector<double> x;
    for (std::int64_t i = 0; i < total; ++i) {
        draw_from_density(f, coord_rng, x);
        if (i < poisson_n) poisson.push_back(x);
        if (i < n) binomial.push_back(x);
    }
    return {std::move(poisson), std::move(binomial)};
}

PointSample sample_ginibre(std::size_t n, std::uint64_t seed, std::size_t cap) {
    if (n < 1) throw std::invalid_argument("Ginibre truncation must be >= 1");
    if (n > cap) throw std::invalid_argument("Ginibre truncation exceeds the configured cap");
    auto rng = make_rng(seed, "matrix");
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    // Householder reduction of an iid complex Gaussian matrix: the result is
    // upper Hessenberg with iid complex Gaussians on and above the diagonal
    // and subdiagonal k equal to the norm of an (n-k)-vector of them.
    const int N = static_cast<int>(n);
    std::vector<std::complex<double>> h(n * n);
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i <= j; ++i) {
            const double re = g(rng);
            const double im = g(rng);
            h[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * n] = {re, im};
        }
        if (j + 1 < N) {
            std::gamma_distribution<double> chi2(static_cast<double>(N - j - 1), 1.0);
            h[static_cast<std::size_t>(j + 1) + static_cast<std::size_t>(j) * n] = std::sqrt(chi2(rng));
        }
    }
    std::vector<std::complex<double>> w(n);
    if (hessenberg_eigenvalues(N, h, w) != 0) throw std::runtime_error("Ginibre eigenvalue iteration failed");
    const double scale = 1.0 / std::sqrt(std::numbers::pi);
    std::vector<double> coords;
    coords.reserve(2 * n);
    double max_r = 0.0;
    for (const auto& lambda : w) {
        const auto z = lambda * scale;
        coords.push_back(z.real());
        coords.push_back(z.imag());
        max_r = std::max(max_r, std::abs(z));
    }
    // Edge eigenvalues may fall just outside the bulk disc; the window grows
    // to keep every point inside it.
    const double bulk = std::sqrt(static_cast<double>(n) / std::numbers::pi);
    const double radius = std::max(bulk, std::nextafter(max_r, std::numeric_limits<double>::infinity()));
    ProcessTag tag{ProcessTag::Kind::ginibre, 1.0, static_cast<std::int64_t>(n), {}};
    return PointSample(2, std::move(coords), Window::ball(2, radius), seed, tag);
}

PointSample restrict_to(const PointSample& s, const Window& region) {
    if (region.dim() != s.dim()) throw std::invalid_argument("restriction region has the wrong dimension");
    PointSample out(s.dim(), region, s.seed(), s.tag());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (region.contains(s.point(i))) out.push_back(s.point(i));
    return out;
}

// Serialization -------------------------------------------------------------

std::string to_csv(const PointSample& s) {
    std::string out;
    for (int i = 0; i < s.dim(); ++i) {
        if (i) out += ',';
        out += "x" + std::to_string(i);
    }
    out += '\n';
    for (std::size_t p = 0; p < s.size(); ++p) {
        auto x = s.point(p);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i) out += ',';
            out += fmt_double(x[i]);
        }
        out += '\n';
    }
    return out;
}

std::string to_json_envelope(const PointSample& s) {
    nlohmann::ordered_json j;
    j["dim"] = s.dim();
    j["count"] = s.size();
    j["seed"] = s.seed();
    const Window& w = s.window();
    nlohmann::ordered_json win;
    win["spec"] = w.describe();
    win["volume"] = w.volume();
    j["window"] = win;
    nlohmann::ordered_json tag;
    tag["kind"] = std::string(ProcessTag::kind_name(s.tag().kind));
    tag["intensity"] = s.tag().intensity;
    tag["count"] = s.tag().count;
    tag["density"] = s.tag().density;
    tag["description"] = s.tag().describe();
    j["process_tag"] = tag;
    return j.dump(2) + "\n";
}

PointSample read_csv(std::string_view text, int fallback_dim) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        pos = nl + 1;
    }
    if (lines.empty()) return PointSample(fallback_dim, Window::cube(fallback_dim, 1.0));

    int dim = 0;
    {
        std::size_t p = 0;
        auto header = lines.front();
        while (p <= header.size()) {
            auto c = header.find(',', p);
            if (c == std::string_view::npos) c = header.size();
            auto tok = header.substr(p, c - p);
            if (tok != "x" + std::to_string(dim)) throw std::invalid_argument("CSV header must be x0,...,x{d-1}");
            ++dim;
            p = c + 1;
        }
    }
    std::vector<double> coords;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto vals = parse_doubles(lines[li], ',');
        if (vals.size() != static_cast<std::size_t>(dim))
            throw std::invalid_argument("CSV row " + std::to_string(li + 1) + " has the wrong arity");
        for (double v : vals)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate in CSV");
        coords.insert(coords.end(), vals.begin(), vals.end());
    }
    std::vector<double> lo(dim, -0.5), hi(dim, 0.5);
    if (!coords.empty()) {
        for (int a = 0; a < dim; ++a) {
            double mn = coords[a], mx = coords[a];
            for (std::size_t i = a; i < coords.size(); i += dim) {
                mn = std::min(mn, coords[i]);
                mx = std::max(mx, coords[i]);
            }
            lo[a] = mn - 0.5;
            hi[a] = mx + 0.5;
        }
    }
    PointSample s(dim, std::move(coords), Window::box(lo, hi));
    if (!s.is_simple()) throw std::invalid_argument("CSV contains duplicate points");
    return s;
}

}  // namespace cechlab
