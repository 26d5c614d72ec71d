#include "geoxray/grid.hpp"

#include <cmath>

namespace geoxray {

void Grid2D::validate(int min_points) const {
    if (nx < min_points || ny < min_points)
        throw ParameterError("grid needs at least " + std::to_string(min_points) + " nodes per axis");
    if (!(xmax > xmin) || !(ymax > ymin)) throw ParameterError("grid extent must be positive");
}

ScalarField::ScalarField(Grid2D grid) : grid_(grid), values_(grid.size(), 0.0) { grid_.validate(); }

ScalarField::ScalarField(Grid2D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.size() != grid_.size()) throw ParameterError("field value count does not match grid");
}

ScalarField ScalarField::from_function(const Grid2D& grid, const FieldFunction& f) {
    ScalarField out(grid);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) out.at(i, j) = f(grid.node(i, j));
    return out;
}

double ScalarField::sample(Vec2 p) const {
    const double fx = (p.x - grid_.xmin) / grid_.dx();
    const double fy = (p.y - grid_.ymin) / grid_.dy();
    if (!(fx >= 0.0) || !(fy >= 0.0) || fx > grid_.nx - 1 || fy > grid_.ny - 1) return 0.0;
    int i = static_cast<int>(fx);
    int j = static_cast<int>(fy);
    if (i >= grid_.nx - 1) i = grid_.nx - 2;
    if (j >= grid_.ny - 1) j = grid_.ny - 2;
    const double tx = fx - i;
    const double ty = fy - j;
    const double* row0 = &values_[grid_.index(i, j)];
    const double* row1 = row0 + grid_.nx;
    return (1.0 - ty) * ((1.0 - tx) * row0[0] + tx * row0[1]) + ty * ((1.0 - tx) * row1[0] + tx * row1[1]);
}

FieldFunction ScalarField::sampler() const {
    return [self = *this](Vec2 p) { return self.sample(p); };
}

double ScalarField::l2_norm() const {
    std::vector<double> sq(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k) sq[k] = values_[k] * values_[k];
    return std::sqrt(pairwise_sum(sq) * grid_.dx() * grid_.dy());
}

double ScalarField::l2_norm_in_disk(double radius) const {
    std::vector<double> sq;
    sq.reserve(values_.size());
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i)
            if (norm(grid_.node(i, j)) <= radius) sq.push_back(at(i, j) * at(i, j));
    return std::sqrt(pairwise_sum(sq) * grid_.dx() * grid_.dy());
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    if (!(o.grid_ == grid_)) throw ParameterError("field grids differ");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    ScalarField out = b;
    out *= -1.0;
    out += a;
    return out;
}

double relative_l2_error(const ScalarField& approx, const ScalarField& exact, double radius) {
    const ScalarField diff = approx - exact;
    const double denom = exact.l2_norm_in_disk(radius);
    const double num = diff.l2_norm_in_disk(radius);
    if (denom == 0.0) return num;
    return num / denom;
}

}  // namespace geoxray
