#include "doctest.h"

#include <cmath>

#include "geoxray/phantoms.hpp"
#include "geoxray/radon.hpp"
#include "geoxray/xray.hpp"

using namespace geoxray;

namespace {

double rel_l2(const FanBeamData& a, const FanBeamData& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        num += std::pow(a.values[k] - b.values[k], 2);
        den += b.values[k] * b.values[k];
    }
    return std::sqrt(num / den);
}

FieldFunction gaussian_phantom() {
    PhantomSpec s;
    s.kind = PhantomKind::GaussianBump;
    s.center = {0.15, -0.1};
    s.width = 0.25;
    return phantom_function(s);
}

const XrayOptions kOpt{1e-6, 0.005, kDefaultTrapTime};

}  // namespace

TEST_CASE("transform of the constant 1 is the chord length") {
    const FanGeometry fan{16, 15};
    const FanBeamData e = xray_forward(ConformalMetric::euclidean(), [](Vec2) { return 1.0; }, fan, kOpt);
    for (int i = 0; i < fan.nbeta; ++i)
        for (int j = 0; j < fan.nalpha; ++j) CHECK(e.at(i, j) == doctest::Approx(2.0 * fan.mu(j)).epsilon(1e-9));
    // Through the centre of cap:k the chord has length 4 atan(k); alpha = 0 is the middle sample.
    const double k = 0.8;
    const FanBeamData c =
        xray_forward(ConformalMetric::sphere_cap(k), [](Vec2) { return 1.0; }, fan, {1e-10, 0.005, kDefaultTrapTime});
    for (int i = 0; i < fan.nbeta; ++i) CHECK(c.at(i, 7) == doctest::Approx(4.0 * std::atan(k)).epsilon(1e-8));
}

TEST_CASE("lambda = 0 fan data agree with the Radon oracle") {
    const FanGeometry fan{90, 90};
    const auto f = gaussian_phantom();
    const FanBeamData d = xray_forward(ConformalMetric::euclidean(), f, fan, kOpt);
    const FanBeamData o = radon_fan_oracle(f, fan, 0.005);
    CHECK(rel_l2(d, o) <= 1e-3);
    // The reparametrized oracle itself against the closed-form Gaussian: s = sin alpha,
    // phi = beta + pi + alpha.
    const double w = 0.2;
    const FanBeamData g = radon_fan_oracle([w](Vec2 x) { return std::exp(-norm2(x) / (w * w)); }, {8, 9}, 1e-3);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 9; ++j) {
            const double s = std::sin(FanGeometry{8, 9}.alpha(j));
            CHECK(g.at(i, j) == doctest::Approx(std::sqrt(kPi) * w * std::exp(-s * s / (w * w))).epsilon(1e-8));
        }
}

TEST_CASE("fan lookup weights form a partition of unity") {
    const FanGeometry fan{12, 10};
    for (double beta : {0.0, 0.3, 6.2, -0.4, 7.0})
        for (double alpha : {-1.6, -0.2, 0.0, 1.0, 1.6}) {
            const FanLookup l = fan_lookup(fan, beta, alpha);
            double s = 0.0;
            for (double w : l.w) {
                CHECK(w >= -1e-15);
                s += w;
            }
            CHECK(s == doctest::Approx(1.0));
            for (auto idx : l.idx) CHECK(idx < fan.size());
        }
}

TEST_CASE("traced backprojection is the adjoint of the transform") {
    const FanGeometry fan{60, 60};
    const Grid2D grid = Grid2D::square(48);
    PhantomSpec p;
    p.kind = PhantomKind::BumpMixture;
    p.seed = 4;
    p.grid = grid;
    const ScalarField f = generate(p);
    const FanBeamData h = sample_fan(fan_trig_mixture(8), fan);
    for (const char* spec : {"euclidean", "cap:0.5"}) {
        const auto g = ConformalMetric::parse(spec);
        const double a = fan_pairing(g, xray_forward(g, f, fan, kOpt), h);
        const double b = volume_pairing(g, f, xray_backproject(g, h, grid, 120, kOpt));
        CHECK(std::abs(a - b) <= 0.02 * std::abs(b));
    }
}

TEST_CASE("discrete operator adjoint is exact") {
    const auto g = ConformalMetric::gaussian_bump(0.2, 0.4);
    const Grid2D grid = Grid2D::square(32);
    const FanGeometry fan{40, 40};
    const XrayOperator op(g, grid, fan, kOpt);
    PhantomSpec p;
    p.kind = PhantomKind::BumpMixture;
    p.seed = 12;
    p.grid = grid;
    const ScalarField f = generate(p);
    const FanBeamData d = sample_fan(fan_trig_mixture(3), fan);
    const double a = fan_pairing(g, op.forward(f), d);
    const double b = volume_pairing(g, f, op.adjoint(d));
    CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));
}

TEST_CASE("Euclidean normal operator matches 4 pi |D|^{-1}") {
    PhantomSpec s;
    s.kind = PhantomKind::GaussianBump;
    s.width = 0.3;
    s.grid = Grid2D::square(48);
    const ScalarField f = generate(s);
    NormalOperatorOptions no;
    no.nbeta = no.nalpha = 60;
    const ScalarField n = normal_operator(ConformalMetric::euclidean(), f, no);
    CHECK(relative_l2_error(n, inverse_abs_derivative(f), 0.9) <= 0.03);
    no.mode = NormalMode::Polar;
    CHECK_THROWS_AS(normal_operator(ConformalMetric::sphere_cap(1.5), f, no), SimplicityError);
}

TEST_CASE("conjugate residual inversion of two bumps") {
    const auto g = ConformalMetric::euclidean();
    PhantomSpec s;
    s.kind = PhantomKind::TwoBump;
    s.grid = Grid2D::square(48);
    const FanBeamData d = xray_forward(g, phantom_function(s), {72, 72}, kOpt);
    InversionOptions io;
    io.xray = kOpt;
    const InversionResult r = invert_normal_cg(g, d, s.grid, io);
    CHECK(relative_l2_error(r.f, generate(s), 1.0) <= 0.05);
    for (std::size_t k = 1; k < r.residuals.size(); ++k) CHECK(r.residuals[k] <= r.residuals[k - 1]);
    CHECK(r.iterations <= 80);
    CHECK_THROWS_AS(invert_normal_cg(ConformalMetric::sphere_cap(1.5), d, s.grid, io), SimplicityError);
}

TEST_CASE("odd antipodal pair cancels on the large cap only") {
    const CounterexampleReport cap = counterexample_demo(1.2, 0.05, {60, 60});
    const CounterexampleReport flat = counterexample_demo(1.2, 0.05, {60, 60}, ConformalMetric::euclidean());
    CHECK(cap.ratio <= 0.05);
    CHECK(flat.ratio >= 0.5);
    CHECK(cap.max_I_abs > 0.0);
}
