#include "geoxray/xray.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoxray/radon.hpp"

namespace geoxray {

void FanGeometry::validate() const {
    if (nbeta < 4 || nalpha < 4) throw ParameterError("fan needs at least 4 samples per axis");
}

PhaseState FanGeometry::state(int i, int j) const { return fan_state(beta(i), alpha(j)); }

FanBeamData::FanBeamData(FanGeometry f) : fan(f) {
    fan.validate();
    values.assign(fan.size(), 0.0);
    mask.assign(fan.size(), 0);
}

FanLookup fan_lookup(const FanGeometry& fan, double beta, double alpha) {
    FanLookup l;
    const double fb = beta / fan.dbeta();
    const double fl = std::floor(fb);
    const double wb = fb - fl;
    int i0 = static_cast<int>(fl) % fan.nbeta;
    if (i0 < 0) i0 += fan.nbeta;
    const int i1 = (i0 + 1) % fan.nbeta;
    double fa = (alpha + 0.5 * kPi) / fan.dalpha() - 0.5;
    fa = std::clamp(fa, 0.0, static_cast<double>(fan.nalpha - 1));
    const int j0 = std::min(static_cast<int>(fa), fan.nalpha - 2);
    const double wa = fa - j0;
    const auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) * fan.nalpha + j; };
    l.idx = {idx(i0, j0), idx(i0, j0 + 1), idx(i1, j0), idx(i1, j0 + 1)};
    l.w = {(1.0 - wb) * (1.0 - wa), (1.0 - wb) * wa, wb * (1.0 - wa), wb * wa};
    return l;
}

double FanBeamData::sample(double beta, double alpha) const {
    const FanLookup l = fan_lookup(fan, beta, alpha);
    double v = 0.0;
    for (int q = 0; q < 4; ++q) v += l.w[q] * values[l.idx[q]];
    return v;
}

double FanBeamData::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

namespace {

double default_quad_step(const Grid2D& g) { return 0.5 * std::min(g.dx(), g.dy()); }

std::vector<std::uint8_t> disk_nodes(const Grid2D& g) {
    std::vector<std::uint8_t> in(g.size(), 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) in[g.index(i, j)] = norm2(g.node(i, j)) <= 1.0 ? 1 : 0;
    return in;
}

// Bilinear hat weights of the four nodes around p (false when outside).
struct Hat {
    std::size_t idx[4];
    double w[4];
};
bool hat_weights(const Grid2D& g, Vec2 p, Hat& h) {
    const double fx = (p.x - g.xmin) / g.dx();
    const double fy = (p.y - g.ymin) / g.dy();
    if (!(fx >= 0.0) || !(fy >= 0.0) || fx > g.nx - 1 || fy > g.ny - 1) return false;
    const int i = std::min(static_cast<int>(fx), g.nx - 2);
    const int j = std::min(static_cast<int>(fy), g.ny - 2);
    const double tx = fx - i, ty = fy - j;
    h.idx[0] = g.index(i, j);
    h.idx[1] = g.index(i + 1, j);
    h.idx[2] = g.index(i, j + 1);
    h.idx[3] = g.index(i + 1, j + 1);
    h.w[0] = (1 - tx) * (1 - ty);
    h.w[1] = tx * (1 - ty);
    h.w[2] = (1 - tx) * ty;
    h.w[3] = tx * ty;
    return true;
}

}  // namespace

FanBeamData xray_forward(const ConformalMetric& g, const FieldFunction& f, FanGeometry fan, const XrayOptions& opt) {
    FanBeamData out(fan);
    if (!(opt.quad_step > 0.0)) throw ParameterError("quadrature step must be positive");
    const double step = step_for_tolerance(opt.tol);
    std::vector<std::uint8_t> status(fan.size(), 0);
    parallel_for(fan.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k / fan.nalpha);
        const int j = static_cast<int>(k % fan.nalpha);
        try {
            const LineIntegral li = integrate_along(g, fan.state(i, j), f, opt.t_max, step, opt.quad_step);
            if (li.trapped) {
                status[k] = 1;
            } else {
                out.values[k] = li.value;
            }
        } catch (const Error&) {
            status[k] = 2;
        }
    });
    for (std::size_t k = 0; k < fan.size(); ++k) {
        if (status[k] == 0) continue;
        out.mask[k] = 1;
        out.values[k] = 0.0;
        if (status[k] == 1) ++out.trapped;
        else ++out.failed;
    }
    return out;
}

FanBeamData xray_forward(const ConformalMetric& g, const ScalarField& f, FanGeometry fan, XrayOptions opt) {
    if (opt.quad_step <= 0.0) opt.quad_step = default_quad_step(f.grid());
    return xray_forward(g, [&f](Vec2 p) { return f.sample(p); }, fan, opt);
}

FanBeamData radon_fan_oracle(const FieldFunction& f, FanGeometry fan, double quad_step) {
    FanBeamData out(fan);
    parallel_for(fan.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k / fan.nalpha);
        const int j = static_cast<int>(k % fan.nalpha);
        const double a = fan.alpha(j);
        out.values[k] = line_integral(f, std::sin(a), fan.beta(i) + kPi + a, std::cos(a), quad_step);
    });
    return out;
}

std::optional<FanCoordinate> backward_fan_coordinate(const ConformalMetric& g, const PhaseState& s, double t_max,
                                                     double step) {
    const TraceOutcome o =
        trace_segments(g, {s.x, s.theta + kPi}, t_max, step, [](const FlowPoint&, const FlowPoint&) {});
    if (o.trapped) return std::nullopt;
    const Vec2 q = o.end.x;
    // Start direction of the forward geodesic: reverse of the exit velocity.
    const double theta_in = std::atan2(-o.end.xdot.y, -o.end.xdot.x);
    double beta = std::atan2(q.y, q.x);
    if (beta < 0.0) beta += kTwoPi;
    return FanCoordinate{beta, wrap_angle(theta_in - beta - kPi)};
}

XrayBackprojector::XrayBackprojector(const ConformalMetric& g, const Grid2D& grid, FanGeometry fan, int n_dir,
                                     const XrayOptions& opt)
    : grid_(grid), fan_(fan), n_dir_(n_dir) {
    if (n_dir < 4) throw ParameterError("backprojection needs at least 4 directions");
    grid_.validate(2);
    fan_.validate();
    const double step = step_for_tolerance(opt.tol);
    const auto inside = disk_nodes(grid_);
    const double dtheta = kTwoPi / n_dir;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(grid_.size());
    std::vector<std::size_t> skipped(grid_.size(), 0);
    parallel_for(grid_.size(), [&](std::size_t k) {
        if (!inside[k]) return;
        const Vec2 x = grid_.node(static_cast<int>(k % grid_.nx), static_cast<int>(k / grid_.nx));
        std::vector<std::pair<std::size_t, double>> entries;
        entries.reserve(4 * static_cast<std::size_t>(n_dir));
        for (int d = 0; d < n_dir; ++d) {
            std::optional<FanCoordinate> c;
            try {
                c = backward_fan_coordinate(g, {x, -kPi + (d + 0.5) * dtheta}, opt.t_max, step);
            } catch (const Error&) {
            }
            if (!c) {
                ++skipped[k];
                continue;
            }
            const FanLookup l = fan_lookup(fan_, c->beta, c->alpha);
            for (int q = 0; q < 4; ++q)
                if (l.w[q] != 0.0) entries.emplace_back(l.idx[q], l.w[q] * dtheta);
        }
        std::sort(entries.begin(), entries.end());
        std::vector<std::pair<std::size_t, double>> merged;
        for (const auto& e : entries) {
            if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
            else merged.push_back(e);
        }
        rows[k] = std::move(merged);
    });
    for (std::size_t s : skipped) skipped_ += s;
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (const auto& [c, v] : rows[k]) trip.emplace_back(static_cast<int>(k), static_cast<int>(c), v);
    B_.resize(static_cast<Eigen::Index>(grid_.size()), static_cast<Eigen::Index>(fan_.size()));
    B_.setFromTriplets(trip.begin(), trip.end());
    B_.makeCompressed();
}

ScalarField XrayBackprojector::apply(const FanBeamData& h) const {
    if (h.fan.nbeta != fan_.nbeta || h.fan.nalpha != fan_.nalpha) throw ParameterError("fan shapes differ");
    Eigen::VectorXd y(static_cast<Eigen::Index>(fan_.size()));
    for (std::size_t k = 0; k < fan_.size(); ++k) y[static_cast<Eigen::Index>(k)] = h.mask[k] ? 0.0 : h.values[k];
    const Eigen::VectorXd x = B_ * y;
    ScalarField out(grid_);
    for (std::size_t k = 0; k < grid_.size(); ++k) out.values()[k] = x[static_cast<Eigen::Index>(k)];
    return out;
}

BackprojectionResult xray_backproject_counted(const ConformalMetric& g, const FanBeamData& h, const Grid2D& grid,
                                              int n_dir, const XrayOptions& opt) {
    const XrayBackprojector bp(g, grid, h.fan, n_dir, opt);
    return {bp.apply(h), bp.skipped()};
}

ScalarField xray_backproject(const ConformalMetric& g, const FanBeamData& h, const Grid2D& grid, int n_dir,
                             const XrayOptions& opt) {
    return xray_backproject_counted(g, h, grid, n_dir, opt).field;
}

double fan_pairing(const ConformalMetric& g, const FanBeamData& a, const FanBeamData& b) {
    if (a.fan.nbeta != b.fan.nbeta || a.fan.nalpha != b.fan.nalpha) throw ParameterError("fan shapes differ");
    const FanGeometry& fan = a.fan;
    std::vector<double> terms(fan.size(), 0.0);
    for (int i = 0; i < fan.nbeta; ++i) {
        const double e = std::exp(g.lambda(unit(fan.beta(i))));
        for (int j = 0; j < fan.nalpha; ++j) {
            const std::size_t k = a.index(i, j);
            if (a.mask[k] || b.mask[k]) continue;
            terms[k] = a.values[k] * b.values[k] * fan.mu(j) * e;
        }
    }
    return pairwise_sum(terms) * fan.dbeta() * fan.dalpha();
}

double volume_pairing(const ConformalMetric& g, const ScalarField& a, const ScalarField& b, double radius) {
    if (!(a.grid() == b.grid())) throw ParameterError("field grids differ");
    const Grid2D& gr = a.grid();
    std::vector<double> terms(gr.size(), 0.0);
    for (int j = 0; j < gr.ny; ++j)
        for (int i = 0; i < gr.nx; ++i) {
            const Vec2 x = gr.node(i, j);
            if (norm(x) > radius) continue;
            terms[gr.index(i, j)] = a.at(i, j) * b.at(i, j) * std::exp(2.0 * g.lambda(x));
        }
    return pairwise_sum(terms) * gr.dx() * gr.dy();
}

ScalarField normal_operator(const ConformalMetric& g, const ScalarField& f, const NormalOperatorOptions& opt) {
    const Grid2D& grid = f.grid();
    const int n_dir = opt.n_dir > 0 ? opt.n_dir : 2 * opt.nalpha;
    XrayOptions xo = opt.xray;
    if (xo.quad_step <= 0.0) xo.quad_step = default_quad_step(grid);
    if (opt.mode == NormalMode::Composition) {
        const FanBeamData d = xray_forward(g, f, {opt.nbeta, opt.nalpha}, xo);
        return xray_backproject(g, d, grid, n_dir, xo);
    }
    if (opt.require_simple) {
        const SimplicityReport rep = verify_simplicity(g, 16, 16, xo.t_max, 1e-6);
        if (!rep.simple()) {
            std::string msg = "polar normal operator needs a simple metric";
            if (!rep.witnesses.empty()) {
                const auto& w = rep.witnesses.front();
                msg += "; witness " + w.failure_kind + " at (" + std::to_string(w.x.x) + ", " +
                       std::to_string(w.x.y) + "), theta " + std::to_string(w.theta);
            }
            throw SimplicityError(msg);
        }
    }
    // I*I f(x) = 2 int_{S_x} int_0^tau f(gamma_{x,theta}(t)) dt dtheta.
    const double step = step_for_tolerance(xo.tol);
    const auto inside = disk_nodes(grid);
    ScalarField out(grid);
    const FieldFunction fs = [&f](Vec2 p) { return f.sample(p); };
    const double dtheta = kTwoPi / n_dir;
    parallel_for(grid.size(), [&](std::size_t k) {
        if (!inside[k]) return;
        const Vec2 x = grid.node(static_cast<int>(k % grid.nx), static_cast<int>(k / grid.nx));
        double acc = 0.0;
        for (int d = 0; d < n_dir; ++d) {
            const LineIntegral li = integrate_along(g, {x, -kPi + (d + 0.5) * dtheta}, fs, xo.t_max, step,
                                                    xo.quad_step);
            if (!li.trapped) acc += li.value;
        }
        out.values()[k] = 2.0 * acc * dtheta;
    });
    return out;
}

XrayOperator::XrayOperator(const ConformalMetric& g, const Grid2D& grid, FanGeometry fan, const XrayOptions& opt)
    : grid_(grid), fan_(fan) {
    grid_.validate(4);
    fan_.validate();
    XrayOptions xo = opt;
    if (xo.quad_step <= 0.0) xo.quad_step = default_quad_step(grid_);
    const double step = step_for_tolerance(xo.tol);
    const std::size_t nrows = fan_.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(nrows);
    mask_.assign(nrows, 0);
    parallel_for(nrows, [&](std::size_t k) {
        const int i = static_cast<int>(k / fan_.nalpha);
        const int j = static_cast<int>(k % fan_.nalpha);
        std::vector<std::pair<std::size_t, double>> entries;
        try {
            const TraceOutcome o = trace_quadrature(g, fan_.state(i, j), xo.t_max, step, xo.quad_step,
                                                    [&](double, Vec2 x, Vec2, double w) {
                                                        Hat h;
                                                        if (!hat_weights(grid_, x, h)) return;
                                                        for (int q = 0; q < 4; ++q)
                                                            if (h.w[q] != 0.0) entries.emplace_back(h.idx[q], w * h.w[q]);
                                                    });
            if (o.trapped) {
                mask_[k] = 1;
                entries.clear();
            }
        } catch (const Error&) {
            mask_[k] = 1;
            entries.clear();
        }
        std::sort(entries.begin(), entries.end());
        std::vector<std::pair<std::size_t, double>> merged;
        for (const auto& e : entries) {
            if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
            else merged.push_back(e);
        }
        rows[k] = std::move(merged);
    });
    std::vector<Eigen::Triplet<double>> trip;
    std::size_t nnz = 0;
    for (const auto& r : rows) nnz += r.size();
    trip.reserve(nnz);
    for (std::size_t k = 0; k < nrows; ++k)
        for (const auto& [c, v] : rows[k]) trip.emplace_back(static_cast<int>(k), static_cast<int>(c), v);
    A_.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(grid_.size()));
    A_.setFromTriplets(trip.begin(), trip.end());
    A_.makeCompressed();

    weight_.assign(nrows, 0.0);
    for (int i = 0; i < fan_.nbeta; ++i) {
        const double e = std::exp(g.lambda(unit(fan_.beta(i))));
        for (int j = 0; j < fan_.nalpha; ++j)
            weight_[static_cast<std::size_t>(i) * fan_.nalpha + j] = fan_.mu(j) * e * fan_.dbeta() * fan_.dalpha();
    }
    unknown_ = disk_nodes(grid_);
    mass_.assign(grid_.size(), 0.0);
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i) {
            const std::size_t k = grid_.index(i, j);
            if (unknown_[k]) mass_[k] = std::exp(2.0 * g.lambda(grid_.node(i, j))) * grid_.dx() * grid_.dy();
        }
}

FanBeamData XrayOperator::forward(const ScalarField& f) const {
    if (!(f.grid() == grid_)) throw ParameterError("field grid does not match the operator grid");
    Eigen::VectorXd x(static_cast<Eigen::Index>(grid_.size()));
    for (std::size_t k = 0; k < grid_.size(); ++k) x[static_cast<Eigen::Index>(k)] = unknown_[k] ? f.values()[k] : 0.0;
    const Eigen::VectorXd y = A_ * x;
    FanBeamData out(fan_);
    for (std::size_t k = 0; k < fan_.size(); ++k) {
        out.values[k] = mask_[k] ? 0.0 : y[static_cast<Eigen::Index>(k)];
        out.mask[k] = mask_[k];
    }
    return out;
}

ScalarField XrayOperator::adjoint(const FanBeamData& d) const {
    if (d.fan.nbeta != fan_.nbeta || d.fan.nalpha != fan_.nalpha) throw ParameterError("fan shapes differ");
    Eigen::VectorXd y(static_cast<Eigen::Index>(fan_.size()));
    for (std::size_t k = 0; k < fan_.size(); ++k)
        y[static_cast<Eigen::Index>(k)] = (mask_[k] || d.mask[k]) ? 0.0 : weight_[k] * d.values[k];
    const Eigen::VectorXd x = A_.transpose() * y;
    ScalarField out(grid_);
    for (std::size_t k = 0; k < grid_.size(); ++k)
        out.values()[k] = unknown_[k] ? x[static_cast<Eigen::Index>(k)] / mass_[k] : 0.0;
    return out;
}

InversionResult invert_normal_cg(const XrayOperator& op, const FanBeamData& d, const InversionOptions& opt) {
    if (opt.max_iter < 1) throw ParameterError("max_iter must be positive");
    const Grid2D& grid = op.grid();
    const std::vector<double>& mass = op.masses();
    const std::size_t n = grid.size();
    auto inner = [&](const ScalarField& u, const ScalarField& v) {
        std::vector<double> t(n);
        for (std::size_t k = 0; k < n; ++k) t[k] = u.values()[k] * v.values()[k] * mass[k];
        return pairwise_sum(t);
    };
    auto axpy = [n](ScalarField& y, double a, const ScalarField& x) {
        for (std::size_t k = 0; k < n; ++k) y.values()[k] += a * x.values()[k];
    };

    InversionResult res;
    const ScalarField b = op.adjoint(d);
    ScalarField x(grid);
    ScalarField r = b;
    ScalarField p = r;
    ScalarField Ar = op.normal(r);
    ScalarField Ap = Ar;
    double rAr = inner(r, Ar);
    const double bnorm = std::sqrt(inner(b, b));
    res.residuals.push_back(bnorm);
    if (bnorm == 0.0) {
        res.converged = true;
        res.f = x;
        return res;
    }
    for (int it = 1; it <= opt.max_iter; ++it) {
        const double ApAp = inner(Ap, Ap);
        if (!(ApAp > 0.0) || !(rAr > 0.0)) {
            res.stagnated = true;
            break;
        }
        const double a = rAr / ApAp;
        ScalarField x_new = x;
        ScalarField r_new = r;
        axpy(x_new, a, p);
        axpy(r_new, -a, Ap);
        const double rn = std::sqrt(inner(r_new, r_new));
        // Conjugate residuals decrease monotonically in exact arithmetic; an
        // increase means roundoff dominates, so keep the previous iterate.
        if (!(rn <= res.residuals.back())) {
            res.stagnated = true;
            break;
        }
        x = std::move(x_new);
        r = std::move(r_new);
        res.residuals.push_back(rn);
        res.iterations = it;
        if (rn <= opt.tol * bnorm) {
            res.converged = true;
            break;
        }
        Ar = op.normal(r);
        const double rAr_new = inner(r, Ar);
        const double beta = rAr_new / rAr;
        rAr = rAr_new;
        for (std::size_t k = 0; k < n; ++k) {
            p.values()[k] = r.values()[k] + beta * p.values()[k];
            Ap.values()[k] = Ar.values()[k] + beta * Ap.values()[k];
        }
    }
    res.f = std::move(x);
    return res;
}

InversionResult invert_normal_cg(const ConformalMetric& g, const FanBeamData& d, const Grid2D& grid,
                                 const InversionOptions& opt) {
    std::optional<SimplicityReport> rep;
    if (!opt.override_simplicity) {
        rep = verify_simplicity(g, opt.simplicity_samples, opt.simplicity_samples, opt.xray.t_max, 1e-6);
        if (!rep->simple())
            throw SimplicityError("inversion refused: metric failed the simplicity check (use the override to force)");
    }
    const XrayOperator op(g, grid, d.fan, opt.xray);
    InversionResult res = invert_normal_cg(op, d, opt);
    res.simplicity = std::move(rep);
    return res;
}

FieldFunction antipodal_odd_pair(double k, double width) {
    if (!(k > 1.0)) throw ParameterError("the odd-pair construction needs a cap beyond the hemisphere (k > 1)");
    if (!(width > 0.0)) throw ParameterError("bump width must be positive");
    const Vec2 p{1.0 / k, 0.0};
    auto bump = [width](Vec2 y) {
        const double s2 = norm2(y) / (width * width);
        return s2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s2)) : 0.0;
    };
    return [=](Vec2 x) {
        const double r2 = norm2(x);
        double v = bump(x - p);
        if (r2 > 0.0) v -= bump((-1.0 / (k * k * r2)) * x - p);
        return v;
    };
}

nlohmann::json CounterexampleReport::to_json() const {
    return {{"norm_f", norm_f}, {"max_If", max_If}, {"max_I_abs", max_I_abs}, {"ratio", ratio}, {"trapped", trapped}};
}

CounterexampleReport cancellation_ratio(const ConformalMetric& g, const FieldFunction& f, FanGeometry fan,
                                        const XrayOptions& opt) {
    CounterexampleReport rep;
    const FanBeamData If = xray_forward(g, f, fan, opt);
    const FanBeamData Iabs = xray_forward(g, [&f](Vec2 x) { return std::abs(f(x)); }, fan, opt);
    rep.max_If = If.max_abs();
    rep.max_I_abs = Iabs.max_abs();
    rep.trapped = If.trapped;
    rep.ratio = rep.max_I_abs > 0.0 ? rep.max_If / rep.max_I_abs : 0.0;
    const Grid2D grid = Grid2D::square(801, 1.0);
    std::vector<double> a(grid.size());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) a[grid.index(i, j)] = std::abs(f(grid.node(i, j)));
    rep.norm_f = pairwise_sum(a) * grid.dx() * grid.dy();
    return rep;
}

CounterexampleReport counterexample_demo(double k, double width, FanGeometry fan,
                                         std::optional<ConformalMetric> metric, const XrayOptions& opt) {
    const FieldFunction f = antipodal_odd_pair(k, width);
    const ConformalMetric g = metric ? *metric : ConformalMetric::sphere_cap(k);
    return cancellation_ratio(g, f, fan, opt);
}

}  // namespace geoxray
