#include "doctest.h"

#include <cmath>

#include "geoxray/geodesic.hpp"
#include "geoxray/rng.hpp"
#include "geoxray/simplicity.hpp"

using namespace geoxray;

namespace {

// Straight-line oracle: distance from x along unit u to the unit circle.
double chord(Vec2 x, Vec2 u) {
    const double b = dot(x, u), c = norm2(x) - 1.0;
    return -b + std::sqrt(b * b - c);
}

}  // namespace

TEST_CASE("lambda = 0 exit points follow the chord formula") {
    const auto e = ConformalMetric::euclidean();
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
        const Vec2 x = 0.95 * std::sqrt(rng.uniform()) * unit(rng.uniform(0.0, kTwoPi));
        const double th = rng.uniform(-kPi, kPi);
        const GeodesicPath p = trace_geodesic(e, {x, th}, kDefaultTrapTime, 1e-10);
        const double tau = chord(x, unit(th));
        CHECK_FALSE(p.trapped);
        CHECK(std::abs(p.exit_time - tau) < 1e-8);
        const Vec2 end = p.end_state().x;
        const Vec2 exact = x + tau * unit(th);
        CHECK(norm(end - exact) < 1e-8);
    }
}

TEST_CASE("exit time through the centre of a cap is 2 atan(k)") {
    for (double k : {0.5, 1.0, 2.0}) {
        const auto t = exit_time(ConformalMetric::sphere_cap(k), {{0.0, 0.0}, 0.4}, kDefaultTrapTime, 1e-10);
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(2.0 * std::atan(k)).epsilon(1e-9));
    }
}

TEST_CASE("exit time through the centre of a hyperbolic disk is 2 atanh(1/R)") {
    const double R = 1.5;
    const auto t = exit_time(ConformalMetric::hyperbolic(R), {{0.0, 0.0}, -1.1}, kDefaultTrapTime, 1e-10);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(2.0 * std::atanh(1.0 / R)).epsilon(1e-9));
}

TEST_CASE("fixed-step RK4 exit times converge at fourth order") {
    const auto g = ConformalMetric::sphere_cap(1.0);
    const double exact = 2.0 * std::atan(1.0);
    std::vector<double> err;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) {
        const TraceOutcome o = trace_segments(g, {{0.0, 0.0}, 0.3}, kDefaultTrapTime, h, [](const FlowPoint&, const FlowPoint&) {});
        err.push_back(std::abs(o.exit_time - exact));
    }
    for (std::size_t i = 1; i < err.size(); ++i) CHECK(std::log2(err[i - 1] / err[i]) == doctest::Approx(4.0).epsilon(0.125));
}

TEST_CASE("unit speed is preserved and the equator of a large cap traps") {
    const double k = 1.5;
    const auto g = ConformalMetric::sphere_cap(k);
    // The circle |x| = 1/k is a great circle of the sphere.
    const GeodesicPath p = trace_geodesic(g, {{1.0 / k, 0.0}, kPi / 2}, 50.0, 1e-10);
    CHECK(p.trapped);
    double dev = 0.0;
    for (const auto& s : p.samples) dev = std::max(dev, std::abs(norm(s.x) - 1.0 / k));
    CHECK(dev < 1e-9);
    CHECK(p.stats.max_speed_drift < 1e-9);
}

TEST_CASE("geodesic flow is reversible") {
    const auto g = ConformalMetric::gaussian_bump(0.3, 0.4);
    const PhaseState s{{0.2, -0.1}, 0.9};
    const PhaseState f = geodesic_flow(g, s, 0.6);
    const PhaseState b = geodesic_flow(g, f, -0.6);
    CHECK(norm(b.x - s.x) < 1e-10);
    CHECK(std::abs(wrap_angle(b.theta - s.theta)) < 1e-10);
}

TEST_CASE("conjugate points: pi on K = 1, none on K <= 0") {
    const auto cap = ConformalMetric::sphere_cap(3.0);
    // Along a diameter of length 4 atan(3) > pi.
    const auto c = conjugate_scan(cap, {{-0.9, 0.0}, 0.0}, kDefaultTrapTime, 1e-10);
    REQUIRE(c.has_value());
    CHECK(std::abs(*c - kPi) < 1e-6);
    for (const char* spec : {"euclidean", "hyperbolic:1.5", "affine:0,0.3,0.1"}) {
        const auto g = ConformalMetric::parse(spec);
        for (int i = 0; i < 12; ++i)
            CHECK_FALSE(conjugate_scan(g, fan_state(0.5 * i, -1.4 + 0.25 * i), kDefaultTrapTime, 1e-8).has_value());
    }
}

TEST_CASE("simplicity classification") {
    CHECK(verify_simplicity(ConformalMetric::euclidean(), 12, 12).simple());
    CHECK(verify_simplicity(ConformalMetric::sphere_cap(0.5), 12, 12).simple());
    const SimplicityReport r = verify_simplicity(ConformalMetric::sphere_cap(1.5), 12, 12);
    CHECK_FALSE(r.simple());
    CHECK_FALSE(r.nontrapping);
    CHECK_FALSE(r.strictly_convex);
    CHECK_FALSE(r.witnesses.empty());
    bool has_trapped = false;
    for (const auto& w : r.witnesses) has_trapped = has_trapped || w.failure_kind == "trapped";
    CHECK(has_trapped);
    CHECK(r.to_json()["nontrapping"] == false);
}

TEST_CASE("second fundamental form of the boundary") {
    // 1 + d_r lambda; on the cap d_r lambda = -2k^2 / (1 + k^2) at r = 1.
    for (double k : {0.5, 1.5}) {
        const double expect = 1.0 - 2.0 * k * k / (1.0 + k * k);
        CHECK(boundary_second_fundamental_form(ConformalMetric::sphere_cap(k), 0.7) == doctest::Approx(expect));
    }
}

TEST_CASE("tracer input validation") {
    const auto e = ConformalMetric::euclidean();
    CHECK_THROWS_AS(trace_segments(e, {{0, 0}, 0}, 1.0, 0.0, [](const FlowPoint&, const FlowPoint&) {}), ParameterError);
    CHECK_THROWS_AS(geodesic_flow(e, {{0.0, 0.0}, 0.0}, 5.0), DomainError);
}
