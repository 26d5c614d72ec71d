#include "doctest.h"

#include <cmath>
#include <complex>

#include "geoxray/lightray.hpp"
#include "geoxray/phantoms.hpp"

using namespace geoxray;

namespace {

PhantomSpec pulse_spec() {
    return PhantomSpec::parse("separable_spacetime:cx=0.1,cy=-0.05,width=0.25,tc=0.5,tw=0.3");
}

const XrayOptions kOpt{1e-8, 0.005, kDefaultTrapTime};

// Straight-line oracle for lambda = 0: composite Simpson rule in t.
template <class F>
auto line_integral(const FanGeometry& fan, int i, int j, F integrand) {
    const PhaseState s = fan.state(i, j);
    const double len = 2.0 * fan.mu(j);
    const Vec2 v = unit(s.theta);
    const int n = 4000;
    const double h = len / n;
    decltype(integrand(Vec2{}, 0.0)) acc{};
    for (int k = 0; k <= n; ++k) {
        const double t = k * h;
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * integrand(s.x + t * v, t);
    }
    return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("the zero potential has a zero transform") {
    const auto q = SpacetimePotential::separable([](Vec2) { return 0.0; }, [](double) { return 1.0; }, 0.0, 1.0);
    const LightRayData d = lightray_forward(ConformalMetric::sphere_cap(0.5), q, {20, -3.0, 1.0}, {8, 8}, kOpt);
    for (double v : d.values) CHECK(v == 0.0);
    CHECK(d.trapped == 0);
}

TEST_CASE("a time-independent window reduces to the geodesic X-ray transform") {
    const PhantomSpec s = pulse_spec();
    const FieldFunction q0 = phantom_function(s);
    const auto q = SpacetimePotential::separable(q0, [](double) { return 1.0; }, -10.0, 10.0);
    const auto g = ConformalMetric::gaussian_bump(0.2, 0.4);
    const FanGeometry fan{12, 10};
    const LightRayData d = lightray_forward(g, q, {5, -5.0, 5.0}, fan, kOpt);
    const FanBeamData x = xray_forward(g, q0, fan, kOpt);
    for (std::size_t r = 0; r < fan.size(); ++r)
        for (int k = 0; k < 5; ++k) CHECK(std::abs(d.at(r, k) - x.values[r]) < 1e-12);
}

TEST_CASE("separable potential matches a straight-line quadrature") {
    const PhantomSpec s = pulse_spec();
    const SpacetimePotential q = generate_spacetime(s);
    const FieldFunction q0 = phantom_function(s);
    const FanGeometry fan{8, 7};
    const SigmaGrid sigma{9, -2.0, 1.0};
    const LightRayData d = lightray_forward(ConformalMetric::euclidean(), q, sigma, fan, kOpt);
    for (int i = 0; i < fan.nbeta; ++i)
        for (int j = 0; j < fan.nalpha; ++j)
            for (int k = 0; k < sigma.n; ++k) {
                const double sg = sigma.at(k);
                const double ref = line_integral(fan, i, j, [&](Vec2 x, double t) {
                    const double u = (t + sg - s.t_center) / s.t_width;
                    return q0(x) * std::exp(-u * u);
                });
                CHECK(std::abs(d.at(i * fan.nalpha + j, k) - ref) < 1e-6);
            }
}

TEST_CASE("sigma integral equals the X-ray transform of the time integral") {
    const SpacetimePotential q = generate_spacetime(pulse_spec());
    const auto g = ConformalMetric::sphere_cap(0.5);
    const FanGeometry fan{24, 24};
    const double chord = xray_forward(g, [](Vec2) { return 1.0; }, fan, kOpt).max_abs();
    SigmaGrid sigma = required_sigma_bounds(q, chord, 200);
    sigma = {sigma.n, sigma.min - 0.1, sigma.max + 0.1};
    CHECK(sigma_fubini_check(g, q, fan, sigma, kOpt).residual <= 1e-3);
}

TEST_CASE("sigma grids that miss part of the support are refused") {
    const SpacetimePotential q = generate_spacetime(pulse_spec());
    CHECK_THROWS_AS(sigma_fubini_check(ConformalMetric::euclidean(), q, {8, 8}, {50, -1.0, 1.0}, kOpt),
                    ParameterError);
    CHECK_THROWS_AS(sigma_fourier_slice(ConformalMetric::euclidean(), q, {8, 8}, {50, -1.0, 1.0}, 1.0, kOpt),
                    ParameterError);
}

TEST_CASE("zero frequency agrees with the sigma integral") {
    const SpacetimePotential q = generate_spacetime(pulse_spec());
    const auto g = ConformalMetric::hyperbolic(1.5);
    const FanGeometry fan{10, 10};
    const LightRayData d = lightray_forward(g, q, {120, -7.0, 5.0}, fan, kOpt);
    const auto a = sigma_integrals(d);
    const auto b = sigma_fourier(d, 0.0);
    for (std::size_t r = 0; r < fan.size(); ++r) {
        CHECK(std::abs(b[r].real() - a[r]) <= 1e-10 * (1.0 + std::abs(a[r])));
        CHECK(b[r].imag() == 0.0);
    }
}

TEST_CASE("fixed frequency factors through the time profile") {
    // For q = q0(x) psi(t): int e^{-i rho sigma} Lq d sigma = psi^(rho) int q0(gamma(t)) e^{i rho t} dt,
    // with psi^(rho) = sqrt(pi) tw exp(-i rho tc - rho^2 tw^2 / 4) for the Gaussian pulse.
    const PhantomSpec s = pulse_spec();
    const SpacetimePotential q = generate_spacetime(s);
    const FieldFunction q0 = phantom_function(s);
    const FanGeometry fan{6, 5};
    const double rho = 2.0;
    const auto slice = sigma_fourier_slice(ConformalMetric::euclidean(), q, fan, {600, -7.0, 5.0}, rho, kOpt);
    const std::complex<double> psi_hat = std::sqrt(kPi) * s.t_width *
                                         std::exp(std::complex<double>(-rho * rho * s.t_width * s.t_width / 4.0,
                                                                       -rho * s.t_center));
    for (int i = 0; i < fan.nbeta; ++i)
        for (int j = 0; j < fan.nalpha; ++j) {
            const auto line = line_integral(fan, i, j, [&](Vec2 x, double t) {
                return q0(x) * std::polar(1.0, rho * t);
            });
            CHECK(std::abs(slice[i * fan.nalpha + j] - psi_hat * line) < 1e-6);
        }
}

TEST_CASE("time translation shifts the sigma argument") {
    const SpacetimePotential q = generate_spacetime(pulse_spec());
    const TranslationReport r =
        time_translation_check(ConformalMetric::sphere_cap(0.5), q, {12, 12}, {150, -6.0, 4.0}, 0.37, kOpt);
    CHECK(r.grid_shift_error <= 1e-12);
    CHECK(r.within_tolerance());
    CHECK(std::abs(r.grid_shift - 0.37) <= 0.5 * SigmaGrid{150, -6.0, 4.0}.step() + 1e-15);
}
