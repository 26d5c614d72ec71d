#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "json.hpp"

#include "geoxray/geodesic.hpp"
#include "geoxray/grid.hpp"
#include "geoxray/metric.hpp"
#include "geoxray/simplicity.hpp"

namespace geoxray {

// Inward boundary states (beta, alpha): boundary point (cos beta, sin beta),
// direction theta = beta + pi + alpha, alpha measured from the inner normal.
// beta_i = 2 pi i / nbeta, alpha_j = -pi/2 + (j + 1/2) pi / nalpha.
struct FanGeometry {
    int nbeta = 0;
    int nalpha = 0;

    double beta(int i) const { return kTwoPi * i / nbeta; }
    double alpha(int j) const { return -0.5 * kPi + (j + 0.5) * kPi / nalpha; }
    double dbeta() const { return kTwoPi / nbeta; }
    double dalpha() const { return kPi / nalpha; }
    // mu = -<v, nu>_g for the unit vector v of sample (., j).
    double mu(int j) const { return std::cos(alpha(j)); }
    PhaseState state(int i, int j) const;
    std::size_t size() const { return static_cast<std::size_t>(nbeta) * nalpha; }
    void validate() const;
};

// Bilinear interpolation stencil on the fan: periodic in beta, alpha clamped
// to the sampled range.
struct FanLookup {
    std::array<std::size_t, 4> idx{};
    std::array<double, 4> w{};
};
FanLookup fan_lookup(const FanGeometry& fan, double beta, double alpha);

// Transform values on the fan, row-major with beta outer. mask[k] != 0 marks
// trapped or failed samples (their values are 0 and they are excluded).
struct FanBeamData {
    FanGeometry fan;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    int trapped = 0;
    int failed = 0;

    FanBeamData() = default;
    explicit FanBeamData(FanGeometry f);

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * fan.nalpha + j; }
    double& at(int i, int j) { return values[index(i, j)]; }
    double at(int i, int j) const { return values[index(i, j)]; }
    // Bilinear lookup, periodic in beta, alpha clamped to the sampled range.
    double sample(double beta, double alpha) const;
    double max_abs() const;
};

struct XrayOptions {
    double tol = 1e-6;         // integrator tolerance (step = tol^(1/4))
    double quad_step = 0.0;    // arc-length quadrature spacing; 0 picks half a grid cell
    double t_max = kDefaultTrapTime;
};

// If(beta, alpha) = int_0^tau f(gamma(t)) dt.
FanBeamData xray_forward(const ConformalMetric& g, const FieldFunction& f, FanGeometry fan,
                         const XrayOptions& opt = {});
FanBeamData xray_forward(const ConformalMetric& g, const ScalarField& f, FanGeometry fan, XrayOptions opt = {});

// Euclidean oracle on the fan: the straight line of sample (beta, alpha) is
// the Radon line with s = sin(alpha), direction angle beta + pi + alpha.
FanBeamData radon_fan_oracle(const FieldFunction& f, FanGeometry fan, double quad_step);

// Boundary sample lookup for the geodesic through (x, theta): traced
// backward to the boundary. Returns nullopt when trapped.
struct FanCoordinate {
    double beta = 0.0;
    double alpha = 0.0;
};
std::optional<FanCoordinate> backward_fan_coordinate(const ConformalMetric& g, const PhaseState& s, double t_max,
                                                     double step);

// I*h(x) = int_{S_x} h#(x, v) d theta at grid nodes inside the unit disk,
// with n_dir equally spaced directions; trapped directions are skipped.
struct BackprojectionResult {
    ScalarField field;
    std::size_t skipped = 0;
};
BackprojectionResult xray_backproject_counted(const ConformalMetric& g, const FanBeamData& h, const Grid2D& grid,
                                              int n_dir, const XrayOptions& opt = {});
ScalarField xray_backproject(const ConformalMetric& g, const FanBeamData& h, const Grid2D& grid, int n_dir,
                             const XrayOptions& opt = {});

// The traced backprojection above with the boundary lookups precomputed,
// for repeated application to different data on one fan.
class XrayBackprojector {
public:
    XrayBackprojector(const ConformalMetric& g, const Grid2D& grid, FanGeometry fan, int n_dir,
                      const XrayOptions& opt = {});
    ScalarField apply(const FanBeamData& h) const;
    std::size_t skipped() const { return skipped_; }
    const Grid2D& grid() const { return grid_; }

private:
    Grid2D grid_;
    FanGeometry fan_;
    int n_dir_ = 0;
    std::size_t skipped_ = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> B_;
};

// (a, b) on the inward boundary with measure mu * exp(lambda) d beta d alpha.
double fan_pairing(const ConformalMetric& g, const FanBeamData& a, const FanBeamData& b);
// (a, b) in L2(M, dV_g) over grid nodes with |x| <= radius.
double volume_pairing(const ConformalMetric& g, const ScalarField& a, const ScalarField& b, double radius = 1.0);

enum class NormalMode { Composition, Polar };

struct NormalOperatorOptions {
    NormalMode mode = NormalMode::Composition;
    int nbeta = 90;
    int nalpha = 90;
    int n_dir = 0;  // 0 picks 2 * nalpha
    XrayOptions xray;
    bool require_simple = true;  // polar mode only
};

// I*I f on the grid of f (zero outside the unit disk).
ScalarField normal_operator(const ConformalMetric& g, const ScalarField& f, const NormalOperatorOptions& opt = {});

// Precomputed discretization of I on bilinear nodal functions of `grid`
// (rows: fan samples, columns: grid nodes), with fan weights
// W = mu exp(lambda(beta)) d beta d alpha and node masses M = exp(2 lambda) dx dy.
class XrayOperator {
public:
    XrayOperator(const ConformalMetric& g, const Grid2D& grid, FanGeometry fan, const XrayOptions& opt = {});

    const Grid2D& grid() const { return grid_; }
    const FanGeometry& fan() const { return fan_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    // Nodes treated as unknowns (inside the unit disk).
    const std::vector<std::uint8_t>& unknowns() const { return unknown_; }
    std::size_t nonzeros() const { return static_cast<std::size_t>(A_.nonZeros()); }
    // exp(2 lambda) dx dy at unknown nodes, 0 elsewhere.
    const std::vector<double>& masses() const { return mass_; }

    FanBeamData forward(const ScalarField& f) const;
    // M^{-1} A^T W d: the exact adjoint of forward() for the weighted pairings.
    ScalarField adjoint(const FanBeamData& d) const;
    ScalarField normal(const ScalarField& f) const { return adjoint(forward(f)); }

private:
    Grid2D grid_;
    FanGeometry fan_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> A_;
    std::vector<double> weight_;  // per fan sample
    std::vector<double> mass_;    // per grid node
    std::vector<std::uint8_t> mask_;
    std::vector<std::uint8_t> unknown_;
};

struct InversionOptions {
    int max_iter = 80;
    double tol = 1e-8;  // relative residual
    bool override_simplicity = false;
    int simplicity_samples = 16;
    XrayOptions xray;
};

struct InversionResult {
    ScalarField f;
    std::vector<double> residuals;  // ||I*I f_k - I*d||_M, k = 0, 1, ...
    int iterations = 0;
    bool converged = false;
    bool stagnated = false;
    std::optional<SimplicityReport> simplicity;
};

// Minimizes ||I*I f - I*d|| over nodal fields supported in the disk with the
// conjugate residual method (residual norms are nonincreasing).
InversionResult invert_normal_cg(const ConformalMetric& g, const FanBeamData& d, const Grid2D& grid,
                                 const InversionOptions& opt = {});
InversionResult invert_normal_cg(const XrayOperator& op, const FanBeamData& d, const InversionOptions& opt);

// Odd pair on the cap lambda = ln(2k/(1+k^2|x|^2)), k > 1: a smooth bump of
// radius `width` at p = (1/k, 0) minus its image under the cap's antipodal
// map A(x) = -x / (k^2 |x|^2).
FieldFunction antipodal_odd_pair(double k, double width);

struct CounterexampleReport {
    double norm_f = 0.0;      // L1 norm of f
    double max_If = 0.0;      // max |If| over the fan
    double max_I_abs = 0.0;   // max I|f| over the fan
    double ratio = 0.0;       // max_If / max_I_abs, 0 when f = 0
    int trapped = 0;
    nlohmann::json to_json() const;
};

CounterexampleReport cancellation_ratio(const ConformalMetric& g, const FieldFunction& f, FanGeometry fan,
                                        const XrayOptions& opt);
// Requires k > 1. `metric` defaults to the cap itself; passing the Euclidean
// metric gives the contrast run.
CounterexampleReport counterexample_demo(double k, double width, FanGeometry fan = {90, 90},
                                         std::optional<ConformalMetric> metric = std::nullopt,
                                         const XrayOptions& opt = {1e-6, 0.004, kDefaultTrapTime});

}  // namespace geoxray
