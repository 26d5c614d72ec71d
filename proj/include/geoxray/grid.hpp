#pragma once

#include <optional>
#include <vector>

#include "geoxray/common.hpp"

namespace geoxray {

// Uniform node-centred Cartesian grid. Node (i, j) sits at
// (xmin + i*dx, ymin + j*dy); storage is row-major with y outer.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double xmin = -1.0;
    double xmax = 1.0;
    double ymin = -1.0;
    double ymax = 1.0;

    static Grid2D square(int n, double half_extent = 1.0) {
        return {n, n, -half_extent, half_extent, -half_extent, half_extent};
    }

    double dx() const { return (xmax - xmin) / (nx - 1); }
    double dy() const { return (ymax - ymin) / (ny - 1); }
    double x(int i) const { return xmin + i * dx(); }
    double y(int j) const { return ymin + j * dy(); }
    Vec2 node(int i, int j) const { return {x(i), y(j)}; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    bool operator==(const Grid2D&) const = default;

    // Throws ParameterError unless the grid has at least `min_points` per axis
    // and a positive extent.
    void validate(int min_points = 2) const;
};

// A function on the plane sampled on a Grid2D. Off-grid values come from
// bilinear interpolation; outside the grid extent the field is zero.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(Grid2D grid);
    ScalarField(Grid2D grid, std::vector<double> values);

    static ScalarField from_function(const Grid2D& grid, const FieldFunction& f);

    const Grid2D& grid() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& at(int i, int j) { return values_[grid_.index(i, j)]; }
    double at(int i, int j) const { return values_[grid_.index(i, j)]; }

    double sample(Vec2 p) const;
    FieldFunction sampler() const;

    // Discrete L2 norm over the grid (node quadrature, Euclidean area).
    double l2_norm() const;
    // Same, restricted to nodes with |x| <= radius.
    double l2_norm_in_disk(double radius) const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator*=(double s);

private:
    Grid2D grid_;
    std::vector<double> values_;
};

ScalarField operator-(const ScalarField& a, const ScalarField& b);

// ||a - b|| / ||b|| over nodes with |x| <= radius (both fields on one grid).
double relative_l2_error(const ScalarField& approx, const ScalarField& exact, double radius = 1e300);

}  // namespace geoxray
