#pragma once

#include "cechlab/point_process.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cechlab {

inline constexpr int kMaxDim = 8;

struct Ball {
    std::vector<double> center;
    double radius = 0.0;
    /// Input indices of the points on the boundary that determine the ball.
    std::vector<std::size_t> support;
};

/// Smallest enclosing ball (move-to-front Welzl). Throws on empty input.
Ball min_enclosing_ball(std::span<const std::vector<double>> points);

/// Squared radius of the smallest ball enclosing `count` points of dimension
/// `dim` given by pointers. Allocation-free; used on the hot path.
double min_enclosing_radius2(const double* const* points, int count, int dim);

/// Closed-ball Cech predicate: the radius-r balls around the points share a
/// common point iff the minimum enclosing ball has radius <= r.
bool cech_simplex_test(std::span<const std::vector<double>> points, double r);
bool cech_simplex_test(const double* const* points, int count, int dim, double r);

/// Distance-threshold graph; an edge (i, j) exists iff ||x_i - x_j|| <= cutoff.
struct NeighborGraph {
    std::size_t vertex_count = 0;
    double cutoff = 0.0;
    /// adjacency[i] sorted ascending; contains both directions.
    std::vector<std::vector<std::uint32_t>> adjacency;

    std::size_t edge_count() const;
    /// Edges as (i, j) with i < j, lexicographically sorted.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;
    std::string to_edge_csv() const;
};

NeighborGraph build_neighbor_graph(const PointSample& s, double cutoff);

/// Flood fill of the complement of the union of closed radius-r balls,
/// discretised on a regular grid over a cube or box window. A cell is
/// vacant when some point of it lies outside every ball, and two adjacent
/// vacant cells are joined when their shared face has such a point. For
/// d <= 2 both tests are exact (corners, circle-edge and circle-circle
/// points; chord intervals); for d = 3 they sample the cell and face.
class VacancyGrid {
public:
    VacancyGrid(const PointSample& s, double r, const Window& w, double cells_per_r);

    int dim() const noexcept { return dim_; }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    /// True when the closed cell lies inside the union of balls.
    bool occupied(std::size_t flat) const { return occupied_[flat] != 0; }
    std::size_t cell_count() const noexcept { return occupied_.size(); }

    struct Components {
        std::size_t bounded = 0;
        std::size_t touches_boundary = 0;
    };
    Components components() const;

    /// Binary PGM (P5) for d = 2: occupied cells black, vacant white.
    std::string to_pgm() const;

private:
    bool vacant_point(const double* y, std::span<const std::uint32_t> balls, std::span<const std::uint32_t> skip) const;
    std::vector<double> cell_lower(std::size_t flat) const;
    bool cell_has_vacancy(std::size_t flat) const;
    bool face_has_vacancy(std::size_t a_cell, std::size_t b_cell, int axis) const;

    int dim_;
    double r_;
    std::vector<double> lo_, h_;
    std::vector<double> points_;
    std::vector<std::size_t> shape_, stride_;
    std::vector<std::uint8_t> occupied_;
    /// Balls meeting each partly covered cell.
    std::unordered_map<std::size_t, std::vector<std::uint32_t>> balls_;
};

inline constexpr double kMinCellsPerRadius = 8.0;

VacancyGrid::Components vacant_component_count(const PointSample& s, double r, const Window& w,
                                               double cells_per_r);

}  // namespace cechlab
