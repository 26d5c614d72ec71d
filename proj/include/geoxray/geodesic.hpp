#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "geoxray/common.hpp"
#include "geoxray/metric.hpp"

namespace geoxray {

// A point of the unit sphere bundle in isothermal coordinates: the tangent
// vector is v = exp(-lambda(x)) (cos theta, sin theta), so |v|_g = 1.
struct PhaseState {
    Vec2 x;
    double theta = 0.0;
};

// Coordinate velocity of the unit vector encoded by a phase state.
Vec2 unit_velocity(const ConformalMetric& g, const PhaseState& s);

struct GeodesicSample {
    double t = 0.0;
    Vec2 x;
    Vec2 xdot;
    double theta = 0.0;
};

struct StepStats {
    std::size_t steps = 0;
    double step = 0.0;
    // max | |xdot|_g - 1 | over recorded samples
    double max_speed_drift = 0.0;
};

struct GeodesicPath {
    std::vector<GeodesicSample> samples;
    double exit_time = 0.0;  // equals the last sample time; t_max when trapped
    bool trapped = false;
    StepStats stats;

    // Cubic Hermite interpolation of the position between samples.
    Vec2 position_at(double t) const;
    PhaseState end_state() const;
};

// Fixed RK4 step used for a requested tolerance: tol^(1/4), clamped to
// [1e-4, 0.05].
double step_for_tolerance(double tol);

inline constexpr double kDefaultTrapTime = 100.0;

// Integrates x'' + Gamma(x)(x', x') = 0 from `start` until |x| = 1 (exit,
// refined by bisection to 1e-12 in t) or t = t_max (trapped).
GeodesicPath trace_geodesic(const ConformalMetric& g, const PhaseState& start, double t_max = kDefaultTrapTime,
                            double tol = 1e-10);

// Exit time tau(x, v); nullopt when the geodesic is still inside at t_max.
std::optional<double> exit_time(const ConformalMetric& g, const PhaseState& start, double t_max = kDefaultTrapTime,
                                double tol = 1e-10);

// First positive zero of the scalar Jacobi field J'' + K(gamma) J = 0 with
// J(0) = 0, J'(0) = 1 on (0, min(tau, t_max)], or nullopt.
std::optional<double> conjugate_scan(const ConformalMetric& g, const PhaseState& start,
                                     double t_max = kDefaultTrapTime, double tol = 1e-10);

// The geodesic flow phi_t ignoring the boundary (t may be negative). Throws
// DomainError if the flow leaves the metric's domain.
PhaseState geodesic_flow(const ConformalMetric& g, const PhaseState& start, double t, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Lower-level tracing used by the transforms.

struct FlowPoint {
    double t = 0.0;
    Vec2 x;
    Vec2 xdot;
};

struct TraceOutcome {
    double exit_time = 0.0;
    bool trapped = false;
    FlowPoint end;
    std::size_t steps = 0;
};

// Visits consecutive integrator points (a, b) with b.t > a.t. The final
// segment ends exactly at the exit (or at t_max when trapped).
using SegmentVisitor = std::function<void(const FlowPoint& a, const FlowPoint& b)>;
TraceOutcome trace_segments(const ConformalMetric& g, const PhaseState& start, double t_max, double step,
                            const SegmentVisitor& visit);

// Quadrature nodes along a geodesic: cubic Hermite sub-sampling of each
// integrator step at spacing <= quad_step, composite trapezoid weights.
// visit(t, x, xdot, weight) is called once per node.
using QuadratureVisitor = std::function<void(double t, Vec2 x, Vec2 xdot, double weight)>;
TraceOutcome trace_quadrature(const ConformalMetric& g, const PhaseState& start, double t_max, double step,
                              double quad_step, const QuadratureVisitor& visit);

// Integral of f along the geodesic from `start` to its exit.
struct LineIntegral {
    double value = 0.0;
    double length = 0.0;
    bool trapped = false;
};
LineIntegral integrate_along(const ConformalMetric& g, const PhaseState& start, const FieldFunction& f,
                             double t_max, double step, double quad_step);

}  // namespace geoxray
