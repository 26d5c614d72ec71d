#include "doctest.h"

#include <cmath>

#include "geoxray/io.hpp"
#include "geoxray/metric.hpp"
#include "geoxray/rng.hpp"

using namespace geoxray;

namespace {

// Oracle: the general Christoffel formula evaluated on g_{jk} = e^{2 lambda} delta
// with metric derivatives from 4th-order central differences of lambda values.
Christoffel christoffel_by_differences(const ConformalMetric& g, Vec2 x) {
    const double h = 1e-3;
    auto gval = [&](Vec2 p) { return std::exp(2.0 * g.lambda(p)); };
    auto d = [&](int axis) {
        const Vec2 e = axis == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
        return (-gval(x + 2.0 * e) + 8.0 * gval(x + e) - 8.0 * gval(x - e) + gval(x - 2.0 * e)) / (12.0 * h);
    };
    const double dg[2] = {d(0), d(1)};  // d_m of the conformal factor
    const double ginv = 1.0 / gval(x);
    Christoffel c{};
    for (int l = 0; l < 2; ++l)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                // g_{km} = G delta_{km}: d_j g_{kl} + d_k g_{jl} - d_l g_{jk}
                const double t = (k == l ? dg[j] : 0.0) + (j == l ? dg[k] : 0.0) - (j == k ? dg[l] : 0.0);
                c[l][j][k] = 0.5 * ginv * t;
            }
    return c;
}

double laplacian_by_differences(const ConformalMetric& g, Vec2 x) {
    const double h = 1e-3;
    auto l = [&](Vec2 p) { return g.lambda(p); };
    return (l(x + Vec2{h, 0}) + l(x - Vec2{h, 0}) + l(x + Vec2{0, h}) + l(x - Vec2{0, h}) - 4.0 * l(x)) / (h * h);
}

Vec2 random_point(Rng& rng, double r) {
    const double rad = r * std::sqrt(rng.uniform());
    return rad * unit(rng.uniform(0.0, kTwoPi));
}

}  // namespace

TEST_CASE("sphere-cap factor has K = 1 and hyperbolic factor K = -1") {
    Rng rng(2024);
    for (double k : {0.5, 1.0, 1.5}) {
        const auto g = ConformalMetric::sphere_cap(k);
        for (int i = 0; i < 50; ++i) CHECK(gaussian_curvature(g, random_point(rng, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (double R : {1.0, 1.5}) {
        const auto g = ConformalMetric::hyperbolic(R);
        for (int i = 0; i < 50; ++i) CHECK(gaussian_curvature(g, random_point(rng, 0.99)) == doctest::Approx(-1.0).epsilon(1e-10));
    }
}

TEST_CASE("flat factors have zero curvature") {
    Rng rng(5);
    const auto e = ConformalMetric::euclidean();
    const auto a = ConformalMetric::affine(0.3, -0.4, 0.7);
    for (int i = 0; i < 20; ++i) {
        const Vec2 x = random_point(rng, 1.0);
        CHECK(gaussian_curvature(e, x) == 0.0);
        CHECK(std::abs(gaussian_curvature(a, x)) < 1e-15);
    }
}

TEST_CASE("Christoffel symbols from the jet match the general formula") {
    Rng rng(11);
    for (const char* spec : {"cap:0.7", "hyperbolic:1.5", "bump:0.3,0.4,0.1,-0.2", "affine:0.1,0.5,-0.3"}) {
        const auto g = ConformalMetric::parse(spec);
        for (int i = 0; i < 10; ++i) {
            const Vec2 x = random_point(rng, 0.9);
            const Christoffel a = christoffel(g, x);
            const Christoffel b = christoffel_by_differences(g, x);
            for (int l = 0; l < 2; ++l)
                for (int j = 0; j < 2; ++j)
                    for (int k = 0; k < 2; ++k) CHECK(a[l][j][k] == doctest::Approx(b[l][j][k]).epsilon(1e-8));
        }
    }
}

TEST_CASE("bump curvature matches a finite-difference Laplacian of lambda") {
    const auto g = ConformalMetric::gaussian_bump(0.25, 0.35, {0.1, 0.0});
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        const Vec2 x = random_point(rng, 0.8);
        const double oracle = -std::exp(-2.0 * g.lambda(x)) * laplacian_by_differences(g, x);
        CHECK(gaussian_curvature(g, x) == doctest::Approx(oracle).epsilon(1e-5));
    }
}

TEST_CASE("metric norm of the unit vector field is one") {
    const auto g = ConformalMetric::sphere_cap(0.8);
    const Vec2 x{0.3, -0.2};
    const Vec2 v = std::exp(-g.lambda(x)) * unit(0.7);
    CHECK(metric_norm(g, x, v) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(metric_inner(g, x, v, v) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gridded metric reproduces an analytic factor") {
    const auto cap = ConformalMetric::sphere_cap(0.8);
    LambdaGrid lg{121, 121, -1.2, 1.2, -1.2, 1.2, {}};
    // Closed form of the cap factor, evaluated past the analytic metric's domain.
    for (int j = 0; j < lg.ny; ++j)
        for (int i = 0; i < lg.nx; ++i) {
            const double x = lg.xmin + i * lg.dx(), y = lg.ymin + j * lg.dy();
            lg.values.push_back(std::log(1.6 / (1.0 + 0.64 * (x * x + y * y))));
        }
    const auto g = ConformalMetric::gridded(lg);
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
        const Vec2 x = random_point(rng, 1.0);
        const LambdaJet a = g.jet(x), b = cap.jet(x);
        CHECK(std::abs(a.value - b.value) < 1e-6);
        CHECK(std::abs(a.d1 - b.d1) < 1e-4);
        CHECK(std::abs(a.d2 - b.d2) < 1e-4);
        CHECK(gaussian_curvature(g, x) == doctest::Approx(1.0).epsilon(2e-2));
    }
}

TEST_CASE("gridded metric file round trip and parse") {
    LambdaGrid lg{16, 16, -1.5, 1.5, -1.5, 1.5, {}};
    for (int k = 0; k < 256; ++k) lg.values.push_back(0.01 * k - 0.3 + 1e-17 * k);
    const std::string path = "metric_roundtrip.txt";
    write_lambda_grid(path, lg);
    const LambdaGrid back = read_lambda_grid(path);
    CHECK(back.values == lg.values);
    CHECK(back.xmin == lg.xmin);
    const auto g = ConformalMetric::parse("grid:" + path);
    CHECK(g.kind() == ConformalMetric::Kind::Gridded);
}

TEST_CASE("parse and domain errors") {
    CHECK(ConformalMetric::parse("euclidean").name() == "euclidean");
    CHECK(ConformalMetric::parse("cap:0.5").params().at(0) == 0.5);
    CHECK(ConformalMetric::parse("hyperbolic").params().at(0) == 1.0);
    CHECK_THROWS_AS(ConformalMetric::parse("cap:-1"), ParameterError);
    CHECK_THROWS_AS(ConformalMetric::parse("cap"), ParameterError);
    CHECK_THROWS_AS(ConformalMetric::parse("nonsense"), ParameterError);
    CHECK_THROWS_AS(ConformalMetric::parse("grid:/no/such/file"), ParameterError);
    const auto h = ConformalMetric::hyperbolic(1.0);
    CHECK_FALSE(h.contains({1.0, 0.0}));
    CHECK_THROWS_AS(h.jet({1.0, 0.0}), DomainError);
    LambdaGrid small{12, 12, -1.0, 1.0, -1.0, 1.0, std::vector<double>(144, 0.0)};
    CHECK_THROWS_AS(ConformalMetric::gridded(small), ParameterError);
}
