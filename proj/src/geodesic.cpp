#include "geoxray/geodesic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace geoxray {

namespace {

constexpr double kRootTol = 1e-12;
constexpr double kBoundarySlack = 1e-12;

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, const State<N>& k) {
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * k[i];
    return out;
}

// Geodesic spray in (x1, x2, u1, u2), optionally extended by the scalar
// Jacobi pair (J, J').
template <std::size_t N>
struct Spray {
    const ConformalMetric& g;

    State<N> operator()(const State<N>& y) const {
        const LambdaJet j = g.jet({y[0], y[1]});
        const Christoffel gam = christoffel_from_jet(j);
        const double u[2] = {y[2], y[3]};
        State<N> d{};
        d[0] = u[0];
        d[1] = u[1];
        for (int l = 0; l < 2; ++l) {
            double a = 0.0;
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) a += gam[l][p][q] * u[p] * u[q];
            d[2 + l] = -a;
        }
        if constexpr (N == 6) {
            d[4] = y[5];
            d[5] = -gaussian_curvature_from_jet(j) * y[4];
        }
        return d;
    }
};

template <std::size_t N>
State<N> rk4(const Spray<N>& f, const State<N>& y, double h) {
    const State<N> k1 = f(y);
    const State<N> k2 = f(axpy(y, 0.5 * h, k1));
    const State<N> k3 = f(axpy(y, 0.5 * h, k2));
    const State<N> k4 = f(axpy(y, h, k3));
    State<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

template <std::size_t N>
std::optional<State<N>> try_rk4(const Spray<N>& f, const State<N>& y, double h) {
    try {
        State<N> out = rk4(f, y, h);
        for (double v : out)
            if (!std::isfinite(v)) return std::nullopt;
        return out;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

template <std::size_t N>
double radius2(const State<N>& y) {
    return y[0] * y[0] + y[1] * y[1];
}

template <std::size_t N>
State<N> initial_state(const ConformalMetric& g, const PhaseState& s) {
    const Vec2 u = unit_velocity(g, s);
    State<N> y{};
    y[0] = s.x.x;
    y[1] = s.x.y;
    y[2] = u.x;
    y[3] = u.y;
    if constexpr (N == 6) {
        y[4] = 0.0;
        y[5] = 1.0;
    }
    return y;
}

template <std::size_t N>
FlowPoint to_point(double t, const State<N>& y) {
    return {t, {y[0], y[1]}, {y[2], y[3]}};
}

void check_start(const PhaseState& s, double t_max) {
    if (!(t_max > 0.0)) throw ParameterError("t_max must be positive");
    if (!(norm2(s.x) <= 1.0 + 1e-9)) throw ParameterError("start point lies outside the closed unit disk");
}

bool leaves_immediately(const ConformalMetric& g, const PhaseState& s) {
    return norm2(s.x) >= 1.0 - kBoundarySlack && dot(s.x, unit_velocity(g, s)) >= 0.0;
}

// Sub-step in (0, h] at which the flow reaches |x| = 1: Illinois iteration
// on |x(sigma)|^2 - 1, bisecting whenever the trial step fails (which
// counts as "outside").
template <std::size_t N>
std::pair<double, State<N>> exit_substep(const Spray<N>& f, const State<N>& y, double h) {
    constexpr double kFlat = 1e-15;
    double lo = 0.0, hi = h;
    State<N> y_lo = y;
    double g_lo = radius2(y) - 1.0;
    auto y_hi = try_rk4(f, y, h);
    double g_hi = y_hi ? radius2(*y_hi) - 1.0 : 0.0;
    bool hi_valid = y_hi.has_value();
    // A start on the circle gives g_lo = 0; move lo strictly inside first.
    while (g_lo > -kFlat && hi - lo > kRootTol) {
        const double mid = 0.5 * (lo + hi);
        auto ym = try_rk4(f, y, mid);
        if (ym && radius2(*ym) - 1.0 <= 0.0) {
            lo = mid;
            y_lo = *ym;
            g_lo = radius2(*ym) - 1.0;
        } else {
            hi = mid;
            hi_valid = ym.has_value();
            if (ym) g_hi = radius2(*ym) - 1.0;
        }
    }
    int side = 0;
    for (int it = 0; it < 200 && hi - lo > kRootTol; ++it) {
        double c = 0.5 * (lo + hi);
        if (hi_valid && g_hi > g_lo) c = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
        auto yc = try_rk4(f, y, c);
        if (!yc) {
            hi = c;
            hi_valid = false;
            side = 0;
            continue;
        }
        const double gc = radius2(*yc) - 1.0;
        if (std::abs(gc) < kFlat) return {c, *yc};
        if (gc < 0.0) {
            lo = c;
            g_lo = gc;
            y_lo = *yc;
            if (side == -1) g_hi *= 0.5;
            side = -1;
        } else {
            hi = c;
            g_hi = gc;
            hi_valid = true;
            if (side == 1) g_lo *= 0.5;
            side = 1;
        }
    }
    if (lo == 0.0) return {0.0, y};
    return {lo, y_lo};
}

}  // namespace

Vec2 unit_velocity(const ConformalMetric& g, const PhaseState& s) {
    return std::exp(-g.lambda(s.x)) * unit(s.theta);
}

double step_for_tolerance(double tol) {
    if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
    return std::clamp(std::pow(tol, 0.25), 1e-4, 0.05);
}

TraceOutcome trace_segments(const ConformalMetric& g, const PhaseState& start, double t_max, double step,
                            const SegmentVisitor& visit) {
    check_start(start, t_max);
    if (!(step > 0.0)) throw ParameterError("integrator step must be positive");
    const Spray<4> f{g};
    State<4> y = initial_state<4>(g, start);
    TraceOutcome out;
    if (leaves_immediately(g, start)) {
        out.end = to_point(0.0, y);
        return out;
    }
    double t = 0.0;
    while (true) {
        const double h = std::min(step, t_max - t);
        if (h <= 0.0) {
            out.trapped = true;
            out.exit_time = t;
            out.end = to_point(t, y);
            return out;
        }
        auto y1 = try_rk4(f, y, h);
        ++out.steps;
        if (y1 && radius2(*y1) <= 1.0) {
            visit(to_point(t, y), to_point(t + h, *y1));
            t += h;
            y = *y1;
            continue;
        }
        if (!y1 && radius2(y) < 0.81)
            throw IntegrationError("geodesic integration failed away from the boundary");
        auto [s, ye] = exit_substep(f, y, h);
        if (s > 0.0) visit(to_point(t, y), to_point(t + s, ye));
        out.exit_time = t + s;
        out.end = to_point(t + s, ye);
        return out;
    }
}

TraceOutcome trace_quadrature(const ConformalMetric& g, const PhaseState& start, double t_max, double step,
                              double quad_step, const QuadratureVisitor& visit) {
    if (!(quad_step > 0.0)) throw ParameterError("quadrature step must be positive");
    bool have_pending = false;
    FlowPoint pending;
    double pending_w = 0.0;
    auto emit = [&](const FlowPoint& p, double w) {
        if (have_pending) visit(pending.t, pending.x, pending.xdot, pending_w);
        pending = p;
        pending_w = w;
        have_pending = true;
    };
    auto segment = [&](const FlowPoint& a, const FlowPoint& b) {
        const double h = b.t - a.t;
        const int m = std::max(1, static_cast<int>(std::ceil(h / quad_step - 1e-9)));
        const double d = h / m;
        if (!have_pending) emit(a, 0.0);
        for (int q = 1; q <= m; ++q) {
            pending_w += 0.5 * d;
            FlowPoint p;
            if (q == m) {
                p = b;
            } else {
                const double s = static_cast<double>(q) / m;
                const double s2 = s * s;
                const double s3 = s2 * s;
                const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
                const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
                const double e00 = (6 * s2 - 6 * s) / h, e10 = 3 * s2 - 4 * s + 1;
                const double e01 = (-6 * s2 + 6 * s) / h, e11 = 3 * s2 - 2 * s;
                p.t = a.t + q * d;
                p.x = h00 * a.x + (h10 * h) * a.xdot + h01 * b.x + (h11 * h) * b.xdot;
                p.xdot = e00 * a.x + e10 * a.xdot + e01 * b.x + e11 * b.xdot;
            }
            emit(p, 0.5 * d);
        }
    };
    TraceOutcome out = trace_segments(g, start, t_max, step, segment);
    if (have_pending) visit(pending.t, pending.x, pending.xdot, pending_w);
    return out;
}

LineIntegral integrate_along(const ConformalMetric& g, const PhaseState& start, const FieldFunction& f,
                             double t_max, double step, double quad_step) {
    LineIntegral r;
    double acc = 0.0;
    const TraceOutcome o = trace_quadrature(g, start, t_max, step, quad_step,
                                            [&](double, Vec2 x, Vec2, double w) { acc += w * f(x); });
    r.value = acc;
    r.length = o.exit_time;
    r.trapped = o.trapped;
    return r;
}

GeodesicPath trace_geodesic(const ConformalMetric& g, const PhaseState& start, double t_max, double tol) {
    const double h = step_for_tolerance(tol);
    GeodesicPath path;
    path.stats.step = h;
    auto record = [&](const FlowPoint& p) {
        const double speed = std::exp(g.lambda(p.x)) * norm(p.xdot);
        path.stats.max_speed_drift = std::max(path.stats.max_speed_drift, std::abs(speed - 1.0));
        path.samples.push_back({p.t, p.x, p.xdot, std::atan2(p.xdot.y, p.xdot.x)});
    };
    const TraceOutcome o = trace_segments(g, start, t_max, h, [&](const FlowPoint& a, const FlowPoint& b) {
        if (path.samples.empty()) record(a);
        record(b);
    });
    if (path.samples.empty()) record(o.end);
    path.exit_time = o.exit_time;
    path.trapped = o.trapped;
    path.stats.steps = o.steps;
    return path;
}

Vec2 GeodesicPath::position_at(double t) const {
    if (samples.empty()) throw ParameterError("empty geodesic path");
    if (t <= samples.front().t) return samples.front().x;
    if (t >= samples.back().t) return samples.back().x;
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const GeodesicSample& s) { return v < s.t; });
    const GeodesicSample& b = *it;
    const GeodesicSample& a = *(it - 1);
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * a.x + ((s3 - 2 * s2 + s) * h) * a.xdot + (-2 * s3 + 3 * s2) * b.x +
           ((s3 - s2) * h) * b.xdot;
}

PhaseState GeodesicPath::end_state() const {
    const GeodesicSample& s = samples.back();
    return {s.x, s.theta};
}

std::optional<double> exit_time(const ConformalMetric& g, const PhaseState& start, double t_max, double tol) {
    const TraceOutcome o =
        trace_segments(g, start, t_max, step_for_tolerance(tol), [](const FlowPoint&, const FlowPoint&) {});
    if (o.trapped) return std::nullopt;
    return o.exit_time;
}

std::optional<double> conjugate_scan(const ConformalMetric& g, const PhaseState& start, double t_max, double tol) {
    check_start(start, t_max);
    if (leaves_immediately(g, start)) return std::nullopt;
    const double step = step_for_tolerance(tol);
    const Spray<6> f{g};
    State<6> y = initial_state<6>(g, start);
    double t = 0.0;
    // Bisection for the zero of J inside a step of length h.
    auto jacobi_root = [&](const State<6>& y0, double h) {
        double lo = 0.0, hi = h;
        while (hi - lo > kRootTol) {
            const double mid = 0.5 * (lo + hi);
            auto ym = try_rk4(f, y0, mid);
            if (ym && (*ym)[4] > 0.0) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    while (t < t_max) {
        const double h = std::min(step, t_max - t);
        auto y1 = try_rk4(f, y, h);
        double limit = h;
        State<6> y_end;
        bool exits = false;
        if (y1 && radius2(*y1) <= 1.0) {
            y_end = *y1;
        } else {
            if (!y1 && radius2(y) < 0.81)
                throw IntegrationError("Jacobi integration failed away from the boundary");
            auto [s, ye] = exit_substep(f, y, h);
            limit = s;
            y_end = ye;
            exits = true;
        }
        // J > 0 on (0, t]; a sign change within the step marks the first zero.
        if (t > 0.0 || limit > 0.0) {
            if (y_end[4] <= 0.0 && limit > 0.0) {
                const double r = jacobi_root(y, limit);
                return t + r;
            }
        }
        if (exits) return std::nullopt;
        t += h;
        y = y_end;
    }
    return std::nullopt;
}

PhaseState geodesic_flow(const ConformalMetric& g, const PhaseState& start, double t, double tol) {
    if (t == 0.0) return start;
    if (t < 0.0) {
        PhaseState rev = geodesic_flow(g, {start.x, start.theta + kPi}, -t, tol);
        return {rev.x, wrap_angle(rev.theta + kPi)};
    }
    const double step = step_for_tolerance(tol);
    const Spray<4> f{g};
    State<4> y = initial_state<4>(g, start);
    const int n = std::max(1, static_cast<int>(std::ceil(t / step - 1e-12)));
    const double h = t / n;
    for (int i = 0; i < n; ++i) y = rk4(f, y, h);
    return {{y[0], y[1]}, std::atan2(y[3], y[2])};
}

}  // namespace geoxray
