#include "geoxray/smfields.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>

namespace geoxray {

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void SMGrid::validate() const {
    if (n < 8) throw ParameterError("SM grid needs at least 8 nodes per axis, got " + std::to_string(n));
    if (ntheta < 8) throw ParameterError("SM grid needs at least 8 angles, got " + std::to_string(ntheta));
    if (!(extent >= 1.0)) throw ParameterError("SM grid must cover the closed unit disk");
}

SMField::SMField(SMGrid grid) : grid_(grid) {
    grid_.validate();
    values_.assign(grid_.size(), 0.0);
}

SMField SMField::from_function(const SMGrid& grid, const SMFunction& u) {
    SMField out(grid);
    std::vector<double> th(grid.ntheta);
    for (int k = 0; k < grid.ntheta; ++k) th[k] = grid.theta(k);
    parallel_for(grid.n, [&](int j) {
        for (int i = 0; i < grid.n; ++i) {
            const Vec2 x = grid.node(i, j);
            for (int k = 0; k < grid.ntheta; ++k) out.at(i, j, k) = u(x, th[k]);
        }
    });
    return out;
}

double SMField::sample(Vec2 x, double theta) const {
    const SMGrid& g = grid_;
    const double fx = (x.x + g.extent) / g.h();
    const double fy = (x.y + g.extent) / g.h();
    if (!(fx >= 0.0 && fy >= 0.0 && fx <= g.n - 1 && fy <= g.n - 1)) return 0.0;
    const int i0 = std::min(static_cast<int>(fx), g.n - 2);
    const int j0 = std::min(static_cast<int>(fy), g.n - 2);
    const double ax = fx - i0;
    const double ay = fy - j0;
    double ft = (theta + kPi) / g.dtheta() - 1.0;
    ft -= g.ntheta * std::floor(ft / g.ntheta);
    const int k0 = static_cast<int>(ft) % g.ntheta;
    const double at_ = ft - std::floor(ft);
    const int k1 = (k0 + 1) % g.ntheta;
    auto val = [&](int i, int j) { return (1.0 - at_) * at(i, j, k0) + at_ * at(i, j, k1); };
    return (1.0 - ay) * ((1.0 - ax) * val(i0, j0) + ax * val(i0 + 1, j0)) +
           ay * ((1.0 - ax) * val(i0, j0 + 1) + ax * val(i0 + 1, j0 + 1));
}

SMField& SMField::operator+=(const SMField& o) {
    if (!(grid_ == o.grid_)) throw ParameterError("SM field grids differ");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

SMField& SMField::operator-=(const SMField& o) {
    if (!(grid_ == o.grid_)) throw ParameterError("SM field grids differ");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
}

SMField& SMField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

SMField operator-(SMField a, const SMField& b) { return a -= b; }

SMCalculus::SMCalculus(const ConformalMetric& g, SMGrid grid) : g_(g), grid_(grid) {
    grid_.validate();
    const std::size_t nn = static_cast<std::size_t>(grid_.n) * grid_.n;
    emlam_.assign(nn, 0.0);
    l1_.assign(nn, 0.0);
    l2_.assign(nn, 0.0);
    e2lam_.assign(nn, 0.0);
    K_.assign(nn, 0.0);
    for (int j = 0; j < grid_.n; ++j)
        for (int i = 0; i < grid_.n; ++i) {
            const Vec2 x = grid_.node(i, j);
            if (!g_.contains(x)) continue;
            const LambdaJet jet = g_.jet(x);
            const std::size_t p = static_cast<std::size_t>(j) * grid_.n + i;
            emlam_[p] = std::exp(-jet.value);
            l1_[p] = jet.d1;
            l2_[p] = jet.d2;
            e2lam_[p] = std::exp(2.0 * jet.value);
            K_[p] = gaussian_curvature_from_jet(jet);
        }
}

namespace {

// 4th-order central difference weights for offsets -2..2, without 1/h.
constexpr double kD[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};

struct AngleTables {
    std::vector<double> c, s;
    explicit AngleTables(const SMGrid& g) : c(g.ntheta), s(g.ntheta) {
        for (int k = 0; k < g.ntheta; ++k) {
            c[k] = std::cos(g.theta(k));
            s[k] = std::sin(g.theta(k));
        }
    }
};

// d/dx along one spatial axis at node (i, j), writing ntheta values.
void spatial_derivative(const SMField& u, int i, int j, int axis, double* out) {
    const SMGrid& g = u.grid();
    const int nt = g.ntheta;
    std::fill(out, out + nt, 0.0);
    const double inv_h = 1.0 / g.h();
    for (int o = -2; o <= 2; ++o) {
        if (o == 0) continue;
        const int ii = axis == 0 ? i + o : i;
        const int jj = axis == 1 ? j + o : j;
        if (ii < 0 || jj < 0 || ii >= g.n || jj >= g.n) continue;
        const double w = kD[o + 2] * inv_h;
        const double* src = &u.values()[g.index(ii, jj, 0)];
        for (int k = 0; k < nt; ++k) out[k] += w * src[k];
    }
}

void angular_derivative(const SMField& u, int i, int j, double* out) {
    const SMGrid& g = u.grid();
    const int nt = g.ntheta;
    const double inv = 1.0 / g.dtheta();
    const double* src = &u.values()[g.index(i, j, 0)];
    for (int k = 0; k < nt; ++k) {
        const int km2 = (k - 2 + nt) % nt, km1 = (k - 1 + nt) % nt;
        const int kp1 = (k + 1) % nt, kp2 = (k + 2) % nt;
        out[k] = inv * (kD[0] * src[km2] + kD[1] * src[km1] + kD[3] * src[kp1] + kD[4] * src[kp2]);
    }
}

}  // namespace

SMField SMCalculus::combine(const SMField& u, bool perp) const {
    if (!(u.grid() == grid_)) throw ParameterError("SM field grid does not match the calculus grid");
    SMField out(grid_);
    const AngleTables tab(grid_);
    const int nt = grid_.ntheta;
    parallel_for(grid_.n, [&](int j) {
        std::vector<double> d1(nt), d2(nt), dt(nt);
        for (int i = 0; i < grid_.n; ++i) {
            const std::size_t p = static_cast<std::size_t>(j) * grid_.n + i;
            const double e = emlam_[p];
            if (e == 0.0) continue;
            spatial_derivative(u, i, j, 0, d1.data());
            spatial_derivative(u, i, j, 1, d2.data());
            angular_derivative(u, i, j, dt.data());
            double* dst = &out.values()[grid_.index(i, j, 0)];
            const double a1 = l1_[p], a2 = l2_[p];
            for (int k = 0; k < nt; ++k) {
                const double c = tab.c[k], s = tab.s[k];
                if (!perp)
                    dst[k] = e * (c * d1[k] + s * d2[k] + (-a1 * s + a2 * c) * dt[k]);
                else
                    dst[k] = -e * (-s * d1[k] + c * d2[k] - (a1 * c + a2 * s) * dt[k]);
            }
        }
    });
    return out;
}

SMField SMCalculus::X(const SMField& u) const { return combine(u, false); }
SMField SMCalculus::Xperp(const SMField& u) const { return combine(u, true); }

SMField SMCalculus::V(const SMField& u) const {
    if (!(u.grid() == grid_)) throw ParameterError("SM field grid does not match the calculus grid");
    SMField out(grid_);
    parallel_for(grid_.n, [&](int j) {
        for (int i = 0; i < grid_.n; ++i) angular_derivative(u, i, j, &out.values()[grid_.index(i, j, 0)]);
    });
    return out;
}

SMField SMCalculus::K(const SMField& u) const {
    SMField out = u;
    for (int j = 0; j < grid_.n; ++j)
        for (int i = 0; i < grid_.n; ++i) {
            const double kv = K_[static_cast<std::size_t>(j) * grid_.n + i];
            double* dst = &out.values()[grid_.index(i, j, 0)];
            for (int k = 0; k < grid_.ntheta; ++k) dst[k] *= kv;
        }
    return out;
}

double SMCalculus::inner(const SMField& u, const SMField& w) const {
    if (!(u.grid() == grid_) || !(w.grid() == grid_)) throw ParameterError("SM field grid mismatch");
    std::vector<double> rows(grid_.n, 0.0);
    parallel_for(grid_.n, [&](int j) {
        double acc = 0.0;
        for (int i = 0; i < grid_.n; ++i) {
            const double wt = e2lam_[static_cast<std::size_t>(j) * grid_.n + i];
            if (wt == 0.0) continue;
            const double* a = &u.values()[grid_.index(i, j, 0)];
            const double* b = &w.values()[grid_.index(i, j, 0)];
            double s = 0.0;
            for (int k = 0; k < grid_.ntheta; ++k) s += a[k] * b[k];
            acc += wt * s;
        }
        rows[j] = acc;
    });
    return pairwise_sum(rows) * grid_.h() * grid_.h() * grid_.dtheta();
}

double SMCalculus::norm(const SMField& u) const { return std::sqrt(std::max(0.0, inner(u, u))); }

double SMCalculus::norm_in_disk(const SMField& u, double radius) const {
    double acc = 0.0;
    for (int j = 0; j < grid_.n; ++j)
        for (int i = 0; i < grid_.n; ++i) {
            if (norm2(grid_.node(i, j)) > radius * radius) continue;
            const double wt = e2lam_[static_cast<std::size_t>(j) * grid_.n + i];
            const double* a = &u.values()[grid_.index(i, j, 0)];
            double s = 0.0;
            for (int k = 0; k < grid_.ntheta; ++k) s += a[k] * a[k];
            acc += wt * s;
        }
    return std::sqrt(acc * grid_.h() * grid_.h() * grid_.dtheta());
}

void SMCalculus::check_support(const SMField& u) const {
    const double r = 1.0 - grid_.collar();
    for (int j = 0; j < grid_.n; ++j)
        for (int i = 0; i < grid_.n; ++i) {
            const Vec2 x = grid_.node(i, j);
            if (norm2(x) <= r * r) continue;
            for (int k = 0; k < grid_.ntheta; ++k)
                if (u.at(i, j, k) != 0.0)
                    throw SupportError("SM field is nonzero at x = (" + format_number(x.x) + ", " +
                                       format_number(x.y) + "), inside the 3-cell boundary collar");
        }
}

SMField apply_X(const ConformalMetric& g, const SMField& u) { return SMCalculus(g, u.grid()).X(u); }
SMField apply_V(const ConformalMetric& g, const SMField& u) { return SMCalculus(g, u.grid()).V(u); }
SMField apply_Xperp(const ConformalMetric& g, const SMField& u) { return SMCalculus(g, u.grid()).Xperp(u); }
double inner_product(const SMField& u, const SMField& w, const ConformalMetric& g) {
    return SMCalculus(g, u.grid()).inner(u, w);
}

namespace {

double relative(double diff, std::initializer_list<double> terms) {
    double scale = 0.0;
    for (double t : terms) scale = std::max(scale, t);
    return diff / std::max(scale, kResidualFloor);
}

}  // namespace

CommutatorResiduals commutator_residuals(const SMCalculus& c, const SMField& u) {
    c.check_support(u);
    const SMField Xu = c.X(u), Vu = c.V(u), Pu = c.Xperp(u);
    const SMField XVu = c.X(Vu), VXu = c.V(Xu);
    const SMField VPu = c.V(Pu), PVu = c.Xperp(Vu);
    const SMField XPu = c.X(Pu), PXu = c.Xperp(Xu);
    const SMField KVu = c.K(Vu);
    CommutatorResiduals r;
    {
        SMField d = XVu - VXu;
        d -= Pu;
        r.r1 = relative(c.norm(d), {c.norm(XVu), c.norm(VXu), c.norm(Pu)});
    }
    {
        SMField d = VPu - PVu;
        d -= Xu;
        r.r2 = relative(c.norm(d), {c.norm(VPu), c.norm(PVu), c.norm(Xu)});
    }
    {
        SMField d = XPu - PXu;
        d += KVu;
        r.r3 = relative(c.norm(d), {c.norm(XPu), c.norm(PXu), c.norm(KVu)});
    }
    return r;
}

CommutatorResiduals commutator_residuals(const ConformalMetric& g, const SMField& u) {
    return commutator_residuals(SMCalculus(g, u.grid()), u);
}

SkewResiduals skew_adjointness(const SMCalculus& c, const SMField& u, const SMField& w) {
    c.check_support(u);
    c.check_support(w);
    const double scale = std::max(c.norm(u) * c.norm(w), kResidualFloor);
    SkewResiduals r;
    r.x = std::abs(c.inner(c.X(u), w) + c.inner(u, c.X(w))) / scale;
    r.v = std::abs(c.inner(c.V(u), w) + c.inner(u, c.V(w))) / scale;
    return r;
}

nlohmann::json PestovReport::to_json() const {
    return {{"lhs", lhs}, {"rhs", rhs}, {"curvature_term", curvature_term}, {"rel_residual", rel_residual}};
}

PestovReport pestov_residual(const SMCalculus& c, const SMField& u) {
    c.check_support(u);
    const SMField Xu = c.X(u), Vu = c.V(u);
    const SMField VXu = c.V(Xu), XVu = c.X(Vu);
    PestovReport r;
    r.lhs = c.inner(VXu, VXu);
    const double xv = c.inner(XVu, XVu);
    const double xu = c.inner(Xu, Xu);
    r.curvature_term = -c.inner(c.K(Vu), Vu);
    r.rhs = xv + r.curvature_term + xu;
    r.rel_residual = relative(std::abs(r.lhs - r.rhs), {r.lhs, xv, std::abs(r.curvature_term), xu});
    return r;
}

PestovReport pestov_residual(const ConformalMetric& g, const SMField& u) {
    return pestov_residual(SMCalculus(g, u.grid()), u);
}

nlohmann::json SantaloReport::to_json() const {
    return {{"volume_side", volume_side}, {"fan_side", fan_side}, {"rel_residual", rel_residual},
            {"trapped", trapped}};
}

SantaloReport santalo_residual(const ConformalMetric& g, const SMField& w, FanGeometry fan, const XrayOptions& opt) {
    fan.validate();
    const SMCalculus c(g, w.grid());
    c.check_support(w);
    SantaloReport r;
    {
        SMField one(w.grid());
        std::fill(one.values().begin(), one.values().end(), 1.0);
        r.volume_side = c.inner(w, one);
    }
    XrayOptions xo = opt;
    if (!(xo.quad_step > 0.0)) xo.quad_step = 0.5 * w.grid().h();
    const double step = step_for_tolerance(xo.tol);
    std::vector<double> rows(fan.nbeta, 0.0);
    std::atomic<int> trapped{0};
    parallel_for(fan.nbeta, [&](int i) {
        const double eb = std::exp(g.lambda(unit(fan.beta(i))));
        std::vector<double> per(fan.nalpha, 0.0);
        for (int j = 0; j < fan.nalpha; ++j) {
            double acc = 0.0;
            const TraceOutcome o = trace_quadrature(g, fan.state(i, j), xo.t_max, step, xo.quad_step,
                                                    [&](double, Vec2 x, Vec2 xdot, double wt) {
                                                        acc += wt * w.sample(x, std::atan2(xdot.y, xdot.x));
                                                    });
            if (o.trapped) ++trapped;
            per[j] = acc * fan.mu(j) * eb;
        }
        rows[i] = pairwise_sum(per);
    });
    r.fan_side = pairwise_sum(rows) * fan.dbeta() * fan.dalpha();
    r.trapped = trapped.load();
    r.rel_residual = std::abs(r.volume_side - r.fan_side) /
                     std::max({std::abs(r.volume_side), std::abs(r.fan_side), kResidualFloor});
    return r;
}

double primitive(const ConformalMetric& g, const FieldFunction& f, const PhaseState& s, const XrayOptions& opt) {
    if (norm2(s.x) >= 1.0) return 0.0;
    if (!(opt.quad_step > 0.0)) throw ParameterError("quadrature step must be positive");
    const LineIntegral li = integrate_along(g, s, f, opt.t_max, step_for_tolerance(opt.tol), opt.quad_step);
    if (li.trapped) throw SimplicityError("geodesic from (" + format_number(s.x.x) + ", " + format_number(s.x.y) +
                                          ", theta=" + format_number(s.theta) + ") is trapped");
    return li.value;
}

SMField primitive_field(const ConformalMetric& g, const FieldFunction& f, const SMGrid& grid,
                        const XrayOptions& opt, int* trapped) {
    SMField out(grid);
    XrayOptions xo = opt;
    if (!(xo.quad_step > 0.0)) xo.quad_step = 0.5 * grid.h();
    const double step = step_for_tolerance(xo.tol);
    std::atomic<int> n_trapped{0};
    parallel_for(grid.n, [&](int j) {
        for (int i = 0; i < grid.n; ++i) {
            const Vec2 x = grid.node(i, j);
            if (norm2(x) >= 1.0) continue;
            for (int k = 0; k < grid.ntheta; ++k) {
                const LineIntegral li = integrate_along(g, {x, grid.theta(k)}, f, xo.t_max, step, xo.quad_step);
                if (li.trapped) ++n_trapped;
                out.at(i, j, k) = li.value;
            }
        }
    });
    if (trapped) *trapped = n_trapped.load();
    return out;
}

nlohmann::json TransportReport::to_json() const {
    return {{"residual", residual}, {"boundary_mismatch", boundary_mismatch}, {"trapped", trapped}};
}

TransportReport primitive_and_transport_check(const ConformalMetric& g, const FieldFunction& f, const SMGrid& grid,
                                              FanGeometry fan, const XrayOptions& opt) {
    fan.validate();
    const SMCalculus c(g, grid);
    TransportReport r;
    XrayOptions xo = opt;
    if (!(xo.quad_step > 0.0)) xo.quad_step = 0.5 * grid.h();
    const SMField u = primitive_field(g, f, grid, xo, &r.trapped);

    // X u^f + f on the interior, where every stencil node lies in the disk.
    SMField res = c.X(u);
    const double rin = 1.0 - grid.collar();
    SMField fx(grid);
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            const Vec2 x = grid.node(i, j);
            if (norm2(x) > rin * rin) {
                for (int k = 0; k < grid.ntheta; ++k) res.at(i, j, k) = 0.0;
                continue;
            }
            const double fv = f(x);
            for (int k = 0; k < grid.ntheta; ++k) {
                fx.at(i, j, k) = fv;
                res.at(i, j, k) += fv;
            }
        }
    r.residual = c.norm(res) / std::max(c.norm(fx), kResidualFloor);

    // Boundary values: u^f at a point pushed a fixed distance along the
    // geodesic, plus the integral over the pushed segment, against If.
    const FanBeamData If = xray_forward(g, f, fan, xo);
    constexpr double kPush = 0.1;
    const double step = step_for_tolerance(xo.tol);
    std::vector<double> diff2(fan.nbeta, 0.0), ref2(fan.nbeta, 0.0);
    parallel_for(fan.nbeta, [&](int i) {
        for (int j = 0; j < fan.nalpha; ++j) {
            if (If.mask[If.index(i, j)]) continue;
            double head = 0.0;
            PhaseState inner{};
            bool inside = true;
            const TraceOutcome o = trace_quadrature(g, fan.state(i, j), kPush, step, xo.quad_step,
                                                    [&](double, Vec2 x, Vec2, double wt) { head += wt * f(x); });
            if (!o.trapped) inside = false;  // exited before the push distance
            if (inside) inner = {o.end.x, std::atan2(o.end.xdot.y, o.end.xdot.x)};
            const double ub = inside ? primitive(g, f, inner, xo) + head : head;
            const double ref = If.at(i, j);
            diff2[i] += (ub - ref) * (ub - ref) * fan.mu(j);
            ref2[i] += ref * ref * fan.mu(j);
        }
    });
    r.boundary_mismatch = std::sqrt(pairwise_sum(diff2) / std::max(pairwise_sum(ref2), kResidualFloor));
    return r;
}

}  // namespace geoxray
