#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cechlab {

/// Observation region. Cubes and boxes are half-open ([-l/2, l/2)^d and
/// [lo, hi) respectively); balls are closed and centered at the origin.
class Window {
public:
    enum class Kind { cube, ball, box };

    static Window cube(int dim, double side);
    static Window ball(int dim, double radius);
    static Window box(std::vector<double> lo, std::vector<double> hi);

    /// Parses "cube:10", "ball:3" or "box:lo0,hi0,lo1,hi1,...".
    static Window parse(int dim, std::string_view spec);

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    double side() const noexcept { return side_; }
    double radius() const noexcept { return radius_; }

    double volume() const;
    bool contains(std::span<const double> x) const;

    /// Axis-aligned bounding box; lower corner inclusive.
    std::vector<double> lower() const;
    std::vector<double> upper() const;

    /// Euclidean distance from an interior point to the window boundary.
    double distance_to_boundary(std::span<const double> x) const;

    std::string describe() const;

    friend bool operator==(const Window&, const Window&) = default;

private:
    Window() = default;
    Kind kind_ = Kind::cube;
    int dim_ = 0;
    double side_ = 0.0;
    double radius_ = 0.0;
    std::vector<double> lo_, hi_;
};

struct ProcessTag {
    enum class Kind { poisson, binomial, inhom_poisson, extended_binomial, ginibre, manual };
    Kind kind = Kind::manual;
    double intensity = 0.0;   // poisson: lambda
    std::int64_t count = 0;   // binomial / extended_binomial: n; ginibre: N; inhom_poisson: n
    std::string density;      // short description of the density, when one is used

    std::string describe() const;
    static std::string_view kind_name(Kind k);
    friend bool operator==(const ProcessTag&, const ProcessTag&) = default;
};

/// A finite point configuration in R^d with its provenance.
class PointSample {
public:
    PointSample(int dim, Window window, std::uint64_t seed = 0, ProcessTag tag = {});
    PointSample(int dim, std::vector<double> coords, Window window, std::uint64_t seed = 0,
                ProcessTag tag = {});

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return coords_.size() / static_cast<std::size_t>(dim_); }
    bool empty() const noexcept { return coords_.empty(); }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& coords() const noexcept { return coords_; }

    const Window& window() const noexcept { return window_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const ProcessTag& tag() const noexcept { return tag_; }

    void push_back(std::span<const double> x);
    void set_window(Window w) { window_ = std::move(w); }
    void set_tag(ProcessTag t) { tag_ = std::move(t); }

    /// True when no two points coincide exactly.
    bool is_simple() const;

    friend bool operator==(const PointSample&, const PointSample&) = default;

private:
    int dim_;
    std::vector<double> coords_;
    Window window_;
    std::uint64_t seed_;
    ProcessTag tag_;
};

/// Probability density with compact support, either uniform or tabulated on
/// a regular grid over a box support and evaluated by multilinear
/// interpolation.
class DensitySpec {
public:
    static DensitySpec uniform(Window support);

    /// `values` holds nodes_per_axis^d samples in row-major order (last axis
    /// fastest) at the grid nodes spanning the support box, inclusive.
    static DensitySpec tabulated(Window support, std::size_t nodes_per_axis,
                                 std::vector<double> values, std::string label = "tabulated");

    /// Tabulates `fn` on the grid and validates the result.
    static DensitySpec tabulate(Window support, std::size_t nodes_per_axis,
                                const std::function<double(std::span<const double>)>& fn,
                                std::string label = "tabulated");

    const Window& support() const noexcept { return support_; }
    bool is_uniform() const noexcept { return values_.empty(); }
    double operator()(std::span<const double> x) const;

    /// Infimum and (inflated) supremum over the support.
    double f_lower() const noexcept { return f_lower_; }
    double f_upper() const noexcept { return f_upper_; }

    /// 0 < f_* <= f^* < inf, the condition the Poisson/binomial limit
    /// theorems assume.
    bool bounded_below() const noexcept { return f_lower_ > 0.0; }

    /// Exact integral of the interpolant over the support.
    double integral() const;

    /// Mass of the closed ball B_x(radius), by midpoint quadrature.
    double ball_mass(std::span<const double> x, double radius, std::size_t cells_per_axis = 64) const;

    const std::string& label() const noexcept { return label_; }

private:
    explicit DensitySpec(Window support) : support_(std::move(support)) {}
    Window support_;
    std::size_t nodes_ = 0;
    std::vector<double> values_;
    double f_lower_ = 0.0;
    double f_upper_ = 0.0;
    std::string label_;
};

/// Sequence of regions B_n with |B_n| = n exactly.
class WindowSequence {
public:
    enum class Shape { cube, ball };

    static WindowSequence cubes(int dim);
    static WindowSequence balls(int dim);

    Window at(std::int64_t n) const;
    int dim() const noexcept { return dim_; }
    Shape shape() const noexcept { return shape_; }

    /// Constant b_1 with diam(B_n) <= b_1 n^{b_1} for every n >= 1.
    double diameter_constant() const noexcept { return b1_; }

    /// Volume of the r-neighbourhood of the boundary of B_n.
    double boundary_layer_volume(std::int64_t n, double r) const;

private:
    WindowSequence(int dim, Shape shape);
    int dim_;
    Shape shape_;
    double b1_;
};

inline constexpr std::size_t kDefaultGinibreCap = 2048;

PointSample sample_homogeneous_poisson(double intensity, const Window& w, std::uint64_t seed);
PointSample sample_binomial(std::int64_t n, const DensitySpec& f, std::uint64_t seed);
PointSample sample_inhomogeneous_poisson(double n, const DensitySpec& f, std::uint64_t seed);
PointSample sample_extended_binomial(std::int64_t n, const WindowSequence& seq, std::uint64_t seed);

/// Coupled pair (Poisson(n) prefix, first n points) of a single iid stream.
std::pair<PointSample, PointSample> sample_coupled_poisson_binomial(std::int64_t n,
                                                                    const DensitySpec& f,
                                                                    std::uint64_t seed);

/// Eigenvalues of an N x N standard complex Gaussian matrix scaled by
/// 1/sqrt(pi): a unit-intensity determinantal configuration in the disc of
/// radius sqrt(N/pi).
PointSample sample_ginibre(std::size_t n, std::uint64_t seed, std::size_t cap = kDefaultGinibreCap);

PointSample restrict_to(const PointSample& s, const Window& region);

// Serialization ------------------------------------------------------------

std::string to_csv(const PointSample& s);
std::string to_json_envelope(const PointSample& s);

/// Reads a header-first CSV of coordinates. An empty input yields an empty
/// sample of dimension `fallback_dim`. Throws std::invalid_argument on
/// malformed input.
PointSample read_csv(std::string_view text, int fallback_dim = 2);

}  // namespace cechlab
