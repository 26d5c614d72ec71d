#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "geoxray/common.hpp"

namespace geoxray {

// Value and derivatives (up to second order) of the conformal factor lambda.
struct LambdaJet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d11 = 0.0;
    double d12 = 0.0;
    double d22 = 0.0;
};

// Samples of lambda on a uniform grid (row-major, y outer, x inner).
struct LambdaGrid {
    int nx = 0;
    int ny = 0;
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;
    std::vector<double> values;

    double dx() const { return (xmax - xmin) / (nx - 1); }
    double dy() const { return (ymax - ymin) / (ny - 1); }
};

// Christoffel symbols Gamma^l_{jk}, indexed [l][j][k] with 0-based indices.
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

// A conformal metric g = exp(2 lambda) * delta on (a neighbourhood of) the
// closed unit disk. Immutable; copies share the underlying representation.
class ConformalMetric {
public:
    enum class Kind { Analytic, Gridded };

    // Builtin registry.
    static ConformalMetric euclidean();
    // lambda = c0 + a*x1 + b*x2 (constant and linear factors).
    static ConformalMetric affine(double c0, double a, double b);
    // lambda = ln(2k / (1 + k^2 |x|^2)): stereographic chart of the unit sphere,
    // the disk is a cap of polar radius 2*atan(k). K = 1.
    static ConformalMetric sphere_cap(double k);
    // lambda = ln(2R / (R^2 - |x|^2)): Poincare disk of radius R, K = -1.
    // R = 1 is the standard factor ln(2 / (1 - |x|^2)), singular on |x| = 1.
    static ConformalMetric hyperbolic(double radius = 1.0);
    // lambda = A * exp(-|x - c|^2 / w^2).
    static ConformalMetric gaussian_bump(double amplitude, double width, Vec2 center = {});
    // Bicubic interpolation of node data with 4th-order central differences.
    // The grid must contain the unit disk with a margin of at least 2 cells.
    static ConformalMetric gridded(LambdaGrid grid);

    // Parses "euclidean", "affine:c0,a,b", "cap:k", "hyperbolic[:R]",
    // "bump:A,w[,cx,cy]" or "grid:<path>".
    static ConformalMetric parse(const std::string& spec);

    Kind kind() const;
    const std::string& name() const;
    // The string that parse() maps back to this metric (for manifests).
    std::string spec() const;
    nlohmann::json describe() const;

    // True when lambda and its derivatives can be evaluated at p.
    bool contains(Vec2 p) const;
    // Throws DomainError outside the domain or when a value is non-finite.
    LambdaJet jet(Vec2 p) const;
    double lambda(Vec2 p) const { return jet(p).value; }

    // Analytic-kind parameters (empty for gridded metrics).
    const std::vector<double>& params() const;

private:
    struct Impl;
    explicit ConformalMetric(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

// (g_{jk} v^j v^k)^{1/2}.
double metric_norm(const ConformalMetric& g, Vec2 x, Vec2 v);
// g-inner product of two tangent vectors at x.
double metric_inner(const ConformalMetric& g, Vec2 x, Vec2 u, Vec2 v);

// Christoffel symbols from the general formula
// Gamma^l_{jk} = 1/2 g^{lm} (d_j g_{km} + d_k g_{jm} - d_m g_{jk}).
Christoffel christoffel(const ConformalMetric& g, Vec2 x);
Christoffel christoffel_from_jet(const LambdaJet& jet);

// K = -exp(-2 lambda) (d11 lambda + d22 lambda).
double gaussian_curvature(const ConformalMetric& g, Vec2 x);
inline double gaussian_curvature_from_jet(const LambdaJet& j) {
    return -std::exp(-2.0 * j.value) * (j.d11 + j.d22);
}

}  // namespace geoxray
