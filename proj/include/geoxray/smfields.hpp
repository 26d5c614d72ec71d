#pragma once

#include <functional>
#include <vector>

#include "json.hpp"

#include "geoxray/grid.hpp"
#include "geoxray/metric.hpp"
#include "geoxray/xray.hpp"

namespace geoxray {


// Tensor grid on the unit sphere bundle: n x n nodes over [-E, E]^2 times
// ntheta angles theta_k = -pi + 2 pi (k + 1) / ntheta, so theta in (-pi, pi].
struct SMGrid {
    int n = 0;
    int ntheta = 0;
    double extent = 1.0;

    double h() const { return 2.0 * extent / (n - 1); }
    double x(int i) const { return -extent + i * h(); }
    Vec2 node(int i, int j) const { return {x(i), x(j)}; }
    double dtheta() const { return kTwoPi / ntheta; }
    double theta(int k) const { return -kPi + (k + 1) * dtheta(); }
    std::size_t size() const { return static_cast<std::size_t>(n) * n * ntheta; }
    // theta innermost.
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(j) * n + i) * ntheta + k;
    }
    bool operator==(const SMGrid&) const = default;
    void validate() const;
    // Width of the collar |x| > 1 - collar() on which compactly supported
    // fields must vanish (3 cells).
    double collar() const { return 3.0 * h(); }
};

class SMField {
public:
    SMField() = default;
    explicit SMField(SMGrid grid);
    static SMField from_function(const SMGrid& grid, const SMFunction& u);

    const SMGrid& grid() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double& at(int i, int j, int k) { return values_[grid_.index(i, j, k)]; }
    double at(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
    // Bilinear in x, linear periodic in theta; zero off the x-grid.
    double sample(Vec2 x, double theta) const;

    SMField& operator+=(const SMField& o);
    SMField& operator-=(const SMField& o);
    SMField& operator*=(double s);

private:
    SMGrid grid_;
    std::vector<double> values_;
};

SMField operator-(SMField a, const SMField& b);

// Stencil calculus for one metric on one grid. x-derivatives: 4th-order
// central differences (values off the grid count as 0); theta-derivatives:
// 4th-order periodic differences. Nodes where the metric is undefined get
// zero coefficients.
//   X  = e^{-lambda} (cos t d1 + sin t d2 + (-d1 lambda sin t + d2 lambda cos t) d_t)
//   X⊥ = -e^{-lambda} (-sin t d1 + cos t d2 - (d1 lambda cos t + d2 lambda sin t) d_t)
//   V  = d_t
class SMCalculus {
public:
    SMCalculus(const ConformalMetric& g, SMGrid grid);

    const SMGrid& grid() const { return grid_; }
    const ConformalMetric& metric() const { return g_; }

    SMField X(const SMField& u) const;
    SMField Xperp(const SMField& u) const;
    SMField V(const SMField& u) const;
    // Pointwise multiplication by the Gaussian curvature K(x).
    SMField K(const SMField& u) const;

    // (u, w) = int int u w e^{2 lambda} d theta dx (node quadrature).
    double inner(const SMField& u, const SMField& w) const;
    double norm(const SMField& u) const;
    // Same, restricted to nodes with |x| <= radius.
    double norm_in_disk(const SMField& u, double radius) const;

    // Throws SupportError unless u vanishes at every node with
    // |x| > 1 - collar.
    void check_support(const SMField& u) const;

private:
    SMField combine(const SMField& u, bool perp) const;

    ConformalMetric g_;
    SMGrid grid_;
    std::vector<double> emlam_;  // e^{-lambda}
    std::vector<double> l1_;
    std::vector<double> l2_;
    std::vector<double> e2lam_;
    std::vector<double> K_;
};

SMField apply_X(const ConformalMetric& g, const SMField& u);
SMField apply_V(const ConformalMetric& g, const SMField& u);
SMField apply_Xperp(const ConformalMetric& g, const SMField& u);
double inner_product(const SMField& u, const SMField& w, const ConformalMetric& g);

inline constexpr double kResidualFloor = 1e-14;

// Each residual is normalized by the largest norm among its terms.
struct CommutatorResiduals {
    double r1 = 0.0;  // [X, V] u - X⊥ u
    double r2 = 0.0;  // [V, X⊥] u - X u
    double r3 = 0.0;  // [X, X⊥] u + K V u
    nlohmann::json to_json() const { return {{"r1", r1}, {"r2", r2}, {"r3", r3}}; }
};
CommutatorResiduals commutator_residuals(const SMCalculus& c, const SMField& u);
CommutatorResiduals commutator_residuals(const ConformalMetric& g, const SMField& u);

struct SkewResiduals {
    double x = 0.0;  // |(Xu, w) + (u, Xw)| / (||u|| ||w||)
    double v = 0.0;
};
SkewResiduals skew_adjointness(const SMCalculus& c, const SMField& u, const SMField& w);

struct PestovReport {
    double lhs = 0.0;             // ||VXu||^2
    double rhs = 0.0;             // ||XVu||^2 - (K Vu, Vu) + ||Xu||^2
    double curvature_term = 0.0;  // -(K Vu, Vu)
    double rel_residual = 0.0;
    nlohmann::json to_json() const;
};
PestovReport pestov_residual(const SMCalculus& c, const SMField& u);
PestovReport pestov_residual(const ConformalMetric& g, const SMField& u);

struct SantaloReport {
    double volume_side = 0.0;
    double fan_side = 0.0;
    double rel_residual = 0.0;
    int trapped = 0;
    nlohmann::json to_json() const;
};
// int_SM w dSigma against int_{inward boundary} [int_0^tau w(phi_t) dt] mu.
// Trapped fan samples are an error unless w vanishes identically.
SantaloReport santalo_residual(const ConformalMetric& g, const SMField& w, FanGeometry fan,
                               const XrayOptions& opt = {});

// u^f(x, theta) = int_0^tau f(phi_t(x, theta)) dt.
double primitive(const ConformalMetric& g, const FieldFunction& f, const PhaseState& s, const XrayOptions& opt);
SMField primitive_field(const ConformalMetric& g, const FieldFunction& f, const SMGrid& grid,
                        const XrayOptions& opt, int* trapped = nullptr);

struct TransportReport {
    double residual = 0.0;           // ||X u^f + f|| / ||f|| on |x| <= 1 - collar
    double boundary_mismatch = 0.0;  // relative L2 of u^f vs If on the fan
    int trapped = 0;
    nlohmann::json to_json() const;
};
TransportReport primitive_and_transport_check(const ConformalMetric& g, const FieldFunction& f, const SMGrid& grid,
                                              FanGeometry fan = {64, 64}, const XrayOptions& opt = {1e-8, 0.0,
                                                                                                   kDefaultTrapTime});

}  // namespace geoxray
