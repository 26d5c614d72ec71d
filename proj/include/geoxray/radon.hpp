#pragma once

#include <vector>

#include "geoxray/common.hpp"
#include "geoxray/grid.hpp"

namespace geoxray {

// Parallel-beam data Rf(s, omega) on the line s*omega_perp + t*omega with
// omega = (cos phi, sin phi), omega_perp its counter-clockwise rotation.
// s_i = -S + 2S i/(ns-1), phi_j = 2 pi j / nomega (full circle).
// Storage is row-major with s outer: values[i * nomega + j].
struct Sinogram {
    int ns = 0;
    int nomega = 0;
    double S = 1.0;
    std::vector<double> values;

    Sinogram() = default;
    Sinogram(int ns, int nomega, double S);

    double ds() const { return 2.0 * S / (ns - 1); }
    double s(int i) const { return -S + i * ds(); }
    double angle(int j) const { return kTwoPi * j / nomega; }
    Vec2 omega(int j) const { return unit(angle(j)); }
    Vec2 omega_perp(int j) const { return {-std::sin(angle(j)), std::cos(angle(j))}; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * nomega + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * nomega + j]; }
    // Linear interpolation in s at angle index j; zero for |s| > S.
    double sample(double s, int j) const;
    void validate() const;
};

// Integral of f over the line {s omega_perp + t omega : |t| <= half_length}
// by the composite trapezoid rule with step <= quad_step.
double line_integral(const FieldFunction& f, double s, double phi, double half_length, double quad_step);

// Rf sampled on an (ns x nomega) sinogram, field sampled bilinearly.
// Lines are integrated across the grid's bounding circle.
Sinogram radon_forward(const ScalarField& f, int ns, int nomega, double quad_step, double S = 1.0);
// Same for an analytic function supported in |x| <= support_radius.
Sinogram radon_forward(const FieldFunction& f, double support_radius, int ns, int nomega, double quad_step,
                       double S = 1.0);

// R*h(y) = int_{S^1} h(y . omega_perp, omega) d omega, trapezoid in omega.
ScalarField backproject(const Sinogram& h, const Grid2D& grid);

// f = (1/4pi) R* |D_s| Rf with a band-limited (Ram-Lak) ramp filter applied
// by zero-padded FFT convolution. Requires ns >= 32.
Sinogram ramp_filter(const Sinogram& h);
ScalarField fbp_invert(const Sinogram& h, const Grid2D& grid);

struct FourierSliceReport {
    double max_abs = 0.0;
    double rel_l2 = 0.0;
    int n_sigma = 0;
    int n_angles = 0;
};

// Compares the s-Fourier transform of the sinogram with the 2D Fourier
// transform of f (exact transform of its bilinear interpolant) at
// sigma * omega_perp, using every `angle_stride`-th angle.
// Convention: fhat(xi) = int exp(-i x.xi) f(x) dx.
FourierSliceReport fourier_slice_residual(const ScalarField& f, const Sinogram& sino, int angle_stride = 0);

// 4 pi |D|^{-1} f, i.e. convolution with 2/|x|, evaluated on f's grid by
// zero-padded FFT with cell-averaged kernel weights.
ScalarField inverse_abs_derivative(const ScalarField& f);

struct NormalOperatorReport {
    double rel_mismatch = 0.0;
    double interior_radius = 0.0;
    ScalarField normal;  // R*Rf
    ScalarField oracle;  // 4 pi |D|^{-1} f
};

NormalOperatorReport normal_operator_residual(const ScalarField& f, int ns = 0, int nomega = 0,
                                              double interior_radius = 0.9);

struct StabilityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};

// lhs = ||f||_{L2}, rhs = 2^{-1/2} ||(1 + sigma^2)^{1/4} (Rf)~||_{L2(R x S^1)}.
StabilityReport stability_residual(const ScalarField& f, int ns = 256, int nomega = 360, double slack = 0.01);

}  // namespace geoxray
