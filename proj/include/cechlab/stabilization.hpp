#pragma once

#include "cechlab/complex.hpp"
#include "cechlab/homology.hpp"
#include "cechlab/point_process.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cechlab {

// Add-one cost -------------------------------------------------------------

struct AddOneCostRecord {
    std::vector<double> x;
    int k = 0;
    double r = 0.0;
    std::int64_t cost = 0;
    /// Points of the sample in the closed ball B_x(2r).
    std::size_t local_count = 0;
    /// New k- and (k+1)-simplices (the star of x).
    std::size_t star_k = 0;
    std::size_t star_k_plus_1 = 0;
    bool verified = false;

    /// 2 * local_count^(k+1).
    double bound() const;
    bool within_bound() const;
};

/// Reusable state for repeated add-one costs against one sample: the Cech
/// complex of the sample and reduced boundary matrices in dimensions k and
/// k + 1. Each query appends the star of x to copies of the reductions.
class AddOneCostContext {
public:
    AddOneCostContext(PointSample s, double r, int k, FieldSpec field = {});

    /// beta_k(C(s + {x}, r)) - beta_k(C(s, r)). With `verify`, also rebuilds
    /// the enlarged complex from scratch and throws std::logic_error on any
    /// disagreement. Throws std::invalid_argument if x is a sample point.
    AddOneCostRecord cost(std::span<const double> x, bool verify = false) const;

    const PointSample& sample() const noexcept { return sample_; }
    const SimplicialComplex& complex() const noexcept { return complex_; }
    std::int64_t base_betti() const noexcept { return base_betti_; }

private:
    PointSample sample_;
    double r_;
    int k_;
    FieldSpec field_;
    SimplicialComplex complex_;
    ColumnReducer reduce_k_, reduce_k1_;
    std::int64_t base_betti_ = 0;
};

AddOneCostRecord add_one_cost(const PointSample& s, std::span<const double> x, double r, int k,
                              const FieldSpec& field = {}, bool verify = false);

// Weak stabilization ---------------------------------------------------------

struct TraceStep {
    double rho = 0.0;
    std::int64_t cost = 0;
    std::int64_t kernel_k = 0;          // beta(N_k^rho)
    std::int64_t kernel_k_minus_1 = 0;  // beta(N_{k-1}^rho)
    std::size_t points = 0;             // |P n B_O(rho)|
    /// cost == beta_k(K'') + kernel_k + kernel_k_minus_1 - beta_k(L).
    bool decomposition_holds = false;
};

struct StabilizationTrace {
    std::uint64_t seed = 0;
    int k = 0;
    double r = 0.0;
    std::vector<TraceStep> steps;
    /// beta_k of K'' = C((P n B_O(2r)) + {O}, r) and L = C(P n B_O(2r), r).
    std::int64_t beta_inner = 0;
    std::int64_t beta_link = 0;

    std::int64_t terminal_value() const;
    /// Smallest rho after which the cost stays constant to the end.
    double stabilization_radius() const;
    /// False when the last step still changes the cost.
    bool stabilized() const;
    bool kernels_monotone() const;
    /// Count of consecutive step pairs where either kernel rank decreases.
    std::size_t kernel_monotonicity_violations() const;
    bool decomposition_holds() const;

    /// seed,rho,cost,kernel_k,kernel_k_minus_1
    std::string to_csv(bool header = true) const;
};

/// Trace of D_O beta_k(P n B_O(rho)) over ascending rho for one
/// configuration. Points at the origin are rejected.
StabilizationTrace weak_stabilization_trace(const PointSample& s, double r, int k, std::span<const double> rhos,
                                            const FieldSpec& field = {});

/// As above for a Poisson(lambda) sample on B_O(max rho) in dimension d.
StabilizationTrace weak_stabilization_trace(std::uint64_t seed, double lambda, int d, double r, int k,
                                            std::span<const double> rhos, const FieldSpec& field = {});

// Strong stabilization ---------------------------------------------------------

/// Probe of strong stabilization at subcritical r. The constructor samples
/// P, finds the components of the Boolean model meeting B_O(r) and fixes a
/// radius S with d(x, C) > 3r outside B_O(S).
class StrongStabilizationProbe {
public:
    StrongStabilizationProbe(std::uint64_t seed, double lambda, int d, double r, int k, FieldSpec field = {});

    double radius() const noexcept { return radius_; }
    std::size_t component_count() const noexcept { return components_; }
    /// D_O beta_k(P n B_O(S)).
    std::int64_t base_cost() const noexcept { return base_cost_; }
    /// beta_k(C + B_O(r)) - beta_k(C) computed from the clusters alone.
    std::int64_t cluster_cost() const noexcept { return cluster_cost_; }
    const PointSample& inner_sample() const noexcept { return inner_; }

    /// D_O beta_k((P n B_O(S)) + X). Throws std::invalid_argument if a point
    /// of X lies in B_O(S).
    std::int64_t cost_with(std::span<const std::vector<double>> adversarial) const;

    /// True when every set gives the base cost.
    bool check(std::span<const std::vector<std::vector<double>>> adversarial_sets) const;

private:
    double r_;
    int d_, k_;
    FieldSpec field_;
    PointSample inner_;
    double radius_ = 0.0;
    std::size_t components_ = 0;
    std::int64_t base_cost_ = 0;
    std::int64_t cluster_cost_ = 0;
};

/// `count` points evenly spaced on the circle of the given radius in the
/// first two coordinates, rotated by `phase` radians.
std::vector<std::vector<double>> adversarial_ring(int d, double radius, std::size_t count, double phase = 0.0);

// Sphere configurations ----------------------------------------------------------

struct SphereCheck {
    std::vector<std::int64_t> betti;  // beta_0 .. beta_{d-1}
    double min_norm = 0.0;
    double max_norm = 0.0;
    bool homology_ok = false;
    bool avoids_inner_ball = false;  // every B_z(r) misses B_O(r/4)
    bool inside_outer_ball = false;  // every z in B_O(2r)
    bool ok() const { return homology_ok && avoids_inner_ball && inside_outer_ball; }
};

SphereCheck check_sphere_configuration(std::span<const std::vector<double>> points, int k, int d, double r);

struct SphereConfiguration {
    int k = 0;
    int d = 0;
    double r = 0.0;
    std::vector<std::vector<double>> points;
    /// Net spacing on the radius-1.5 sphere before scaling.
    double spacing = 0.0;
    int refinements = 0;
    /// Thickening of the unit k-sphere covered by the unit balls.
    double epsilon = 0.0;
    /// Largest relative jitter radius under which the invariants held.
    double c_star = 0.0;
    SphereCheck check;

    std::size_t m() const noexcept { return points.size(); }
    std::string to_csv() const;
    std::string manifest_json() const;
};

/// Throws std::invalid_argument unless 1 <= k <= d - 1, and
/// std::runtime_error if no refinement passes.
SphereConfiguration build_sphere_configuration(int k, int d, double r);

/// Variance lower-bound hypothesis ---------------------------------------------

struct LowerBoundReport {
    std::int64_t n = 0;
    int k = 0;
    double r = 0.0;
    double r_n = 0.0;
    std::size_t m = 0;
    std::size_t samples = 0;
    double mean_cost = 0.0;
    double std_error = 0.0;
    /// Realizations with P_n(B_x(2 r_n)) = 0 and P_n(B_x(r_n)) = 0.
    std::size_t void_2r = 0;
    std::size_t void_r = 0;
    /// exp(-r_* f^*) with r_* = omega_d n r_n^d.
    double void_bound = 0.0;
    /// Realizations with a void event and D_x beta_k > -1.
    std::size_t void_2r_violations = 0;
    std::size_t void_r_violations = 0;
    /// For k = d - 1: realizations with D_x beta_k > 0.
    std::size_t sign_violations = 0;

    double void_r_frequency() const { return samples ? static_cast<double>(void_r) / samples : 0.0; }
    double void_2r_frequency() const { return samples ? static_cast<double>(void_2r) / samples : 0.0; }
};

LowerBoundReport variance_lowerbound_hypothesis_check(std::int64_t n, const DensitySpec& f, int k, double r,
                                                      std::size_t seeds, std::uint64_t master_seed,
                                                      const FieldSpec& field = {});

// Packing constant ---------------------------------------------------------------

struct PackingResult {
    int d = 0;
    /// Points in the closed ball B_O(2) with pairwise distances > 2.
    std::vector<std::vector<double>> points;
    double min_distance = 0.0;
    std::size_t count() const noexcept { return points.size(); }
};

/// Largest configuration found by randomized repulsion; a certified lower
/// bound on the number of pairwise non-adjacent neighbours a point can have.
PackingResult packing_lower_bound(int d, std::uint64_t seed = 1, int restarts = 40);

}  // namespace cechlab
