#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "geoxray/grid.hpp"
#include "geoxray/lightray.hpp"
#include "geoxray/xray.hpp"

namespace geoxray {

enum class PhantomKind { Zero, GaussianBump, BumpMixture, DiskIndicator, OddAntipodalPair, SeparableSpacetime, TwoBump };

std::string to_string(PhantomKind k);
PhantomKind phantom_kind_from_string(const std::string& s);

// Parameters by kind (unused fields are ignored):
//   gaussian_bump       center, width, amplitude
//   bump_mixture        count, seed (centers, widths, amplitudes drawn)
//   disk_indicator      center, radius, amplitude
//   odd_antipodal_pair  center (p), width, amplitude: b(x - p) - b(x + p)
//   separable_spacetime spatial gaussian bump x Gaussian pulse in t
//   two_bump            fixed pair of smooth bumps (amplitude scales both):
//                       b(x - (0.35, 0.1); 0.3) + 0.7 b(x - (-0.3, -0.25); 0.35)
//                       (t_center, t_width), truncated at 8 t_width
struct PhantomSpec {
    PhantomKind kind = PhantomKind::GaussianBump;
    Vec2 center{};
    double width = 0.3;
    double amplitude = 1.0;
    double radius = 0.5;
    int count = 4;
    std::uint64_t seed = 0;
    double margin = 0.1;
    double t_center = 0.0;
    double t_width = 0.5;
    Grid2D grid = Grid2D::square(128);

    nlohmann::json to_json() const;
    static PhantomSpec from_json(const nlohmann::json& j);
    // "kind[:k=v,k=v...]" with keys cx, cy, width, amplitude, radius, count,
    // seed, margin, tc, tw, n (grid nodes per axis).
    static PhantomSpec parse(const std::string& s);
    // Throws ParameterError when the support leaves |x| <= 1 - margin.
    void validate() const;
};

// C-infinity bump exp(1 - 1/(1 - |y|^2/w^2)) on |y| < w (peak 1 at 0).
double smooth_bump(Vec2 y, double w);
// (1 - |y|^2 / w^2)^p inside |y| < w: C^(p-1), with tame high derivatives.
double poly_bump(Vec2 y, double w, int p);

FieldFunction phantom_function(const PhantomSpec& spec);
ScalarField generate(const PhantomSpec& spec);
SpacetimePotential generate_spacetime(const PhantomSpec& spec);

// Outer radius of the phantom's support.
double support_radius(const PhantomSpec& spec);

// Seeded smooth function on SM: sum_k a_k b_k(x) * T_k(theta) with bumps
// supported in |x| <= 1 - margin and trigonometric polynomials of degree <= 3.
SMFunction sm_bump_mixture(std::uint64_t seed, int count = 3, double margin = 0.15);

// Seeded smooth function of the fan coordinates (periodic in beta).
using FanFunction = std::function<double(double beta, double alpha)>;
FanFunction fan_trig_mixture(std::uint64_t seed, int modes = 3);
FanBeamData sample_fan(const FanFunction& h, FanGeometry fan);

}  // namespace geoxray
