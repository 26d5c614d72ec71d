#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geoxray/fft.hpp"
#include "geoxray/grid.hpp"
#include "geoxray/metric.hpp"
#include "geoxray/xray.hpp"

namespace geoxray {

using SpacetimeFunction = std::function<double(Vec2, double)>;
using TimeProfile = std::function<double(double)>;

// A real potential q(x, t), vanishing outside the open disk and outside
// [t_min, t_max].
class SpacetimePotential {
public:
    // q(x, t) = q0(x) psi(t).
    static SpacetimePotential separable(FieldFunction q0, TimeProfile psi, double t_min, double t_max);
    // Trilinear interpolation of samples on grid x [t_min, t_max] (nt nodes),
    // values indexed ((k * ny + j) * nx + i) for time node k.
    static SpacetimePotential gridded(const Grid2D& grid, double t_min, double t_max, int nt,
                                      std::vector<double> values);
    static SpacetimePotential general(SpacetimeFunction q, double t_min, double t_max);

    double operator()(Vec2 x, double t) const { return q_(x, t); }
    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }
    bool is_separable() const { return static_cast<bool>(q0_); }
    // Q(x) = int q(x, t) dt (exact factorization for separable potentials,
    // 2000-interval trapezoid rule in t otherwise).
    FieldFunction time_integral() const;
    // q(x, t - a).
    SpacetimePotential shifted(double a) const;

private:
    SpacetimeFunction q_;
    FieldFunction q0_;
    TimeProfile psi_;
    double t_min_ = 0.0;
    double t_max_ = 0.0;
};

// sigma_k = min + k (max - min) / (n - 1).
struct SigmaGrid {
    int n = 0;
    double min = 0.0;
    double max = 0.0;

    double step() const { return (max - min) / (n - 1); }
    double at(int k) const { return min + k * step(); }
    void validate() const;
};

// Smallest sigma window holding every nonzero value: [t_min - l_max, t_max].
SigmaGrid required_sigma_bounds(const SpacetimePotential& q, double max_chord, int n);

// Lq(gamma, sigma) for every fan ray (outer) and sigma (inner).
struct LightRayData {
    FanGeometry fan;
    SigmaGrid sigma;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;  // per ray
    std::vector<double> chord;       // per ray (exit time)
    int trapped = 0;

    double at(std::size_t ray, int k) const { return values[ray * sigma.n + k]; }
    double max_chord() const;
};

LightRayData lightray_forward(const ConformalMetric& g, const SpacetimePotential& q, const SigmaGrid& sigma,
                              FanGeometry fan, const XrayOptions& opt);

// Per-ray sigma integrals by the trapezoid rule on the sigma grid.
std::vector<double> sigma_integrals(const LightRayData& d);
// Per-ray sigma Fourier transform int exp(-i rho sigma) Lq d sigma, same rule.
std::vector<Complex> sigma_fourier(const LightRayData& d, double rho);

struct FubiniReport {
    double residual = 0.0;  // ||int Lq dsigma - I[Q]|| / ||I[Q]|| over unmasked rays
    std::vector<double> lhs;
    FanBeamData rhs;
    SigmaGrid required;
};

// Refuses (ParameterError naming the required bounds) when `sigma` does not
// cover [t_min - l_max, t_max].
FubiniReport sigma_fubini_check(const ConformalMetric& g, const SpacetimePotential& q, FanGeometry fan,
                                const SigmaGrid& sigma, const XrayOptions& opt);

std::vector<Complex> sigma_fourier_slice(const ConformalMetric& g, const SpacetimePotential& q, FanGeometry fan,
                                         const SigmaGrid& sigma, double rho, const XrayOptions& opt);

// Replacing q(x, t) by q(x, t - a) must shift Lq(gamma, sigma) to
// Lq(gamma, sigma - a). grid_shift_error compares against an exact grid shift
// (a rounded to a whole number of sigma steps); resample_error compares the
// shift by `a` against linear interpolation of the unshifted samples, whose
// error bound (h^2 / 8) max|Lq''| is estimated from second differences.
struct TranslationReport {
    double shift = 0.0;
    double grid_shift = 0.0;
    double grid_shift_error = 0.0;  // max abs, relative to max |Lq|
    double resample_error = 0.0;    // max abs, relative to max |Lq|
    double interpolation_bound = 0.0;
    bool within_tolerance() const { return resample_error <= interpolation_bound; }
};
TranslationReport time_translation_check(const ConformalMetric& g, const SpacetimePotential& q, FanGeometry fan,
                                         const SigmaGrid& sigma, double a, const XrayOptions& opt);

}  // namespace geoxray
