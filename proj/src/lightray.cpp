#include "geoxray/lightray.hpp"

#include <algorithm>
#include <cmath>

namespace geoxray {

namespace {
void check_window(double t_min, double t_max) {
    if (!(t_max > t_min)) throw ParameterError("time support must be a non-empty interval");
}
}  // namespace

SpacetimePotential SpacetimePotential::separable(FieldFunction q0, TimeProfile psi, double t_min, double t_max) {
    check_window(t_min, t_max);
    if (!q0 || !psi) throw ParameterError("separable potential needs both factors");
    SpacetimePotential p;
    p.q0_ = std::move(q0);
    p.psi_ = std::move(psi);
    p.t_min_ = t_min;
    p.t_max_ = t_max;
    p.q_ = [q0 = p.q0_, psi = p.psi_, t_min, t_max](Vec2 x, double t) {
        if (t < t_min || t > t_max) return 0.0;
        return q0(x) * psi(t);
    };
    return p;
}

SpacetimePotential SpacetimePotential::gridded(const Grid2D& grid, double t_min, double t_max, int nt,
                                               std::vector<double> values) {
    check_window(t_min, t_max);
    grid.validate();
    if (nt < 2) throw ParameterError("gridded potential needs at least 2 time nodes");
    if (values.size() != grid.size() * static_cast<std::size_t>(nt))
        throw ParameterError("gridded potential value count does not match its shape");
    auto slices = std::make_shared<std::vector<ScalarField>>();
    for (int k = 0; k < nt; ++k)
        slices->emplace_back(grid, std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(k * grid.size()),
                                                       values.begin() + static_cast<std::ptrdiff_t>((k + 1) * grid.size())));
    SpacetimePotential p;
    p.t_min_ = t_min;
    p.t_max_ = t_max;
    const double dt = (t_max - t_min) / (nt - 1);
    p.q_ = [slices, t_min, t_max, dt, nt](Vec2 x, double t) {
        if (t < t_min || t > t_max) return 0.0;
        const double ft = (t - t_min) / dt;
        const int k = std::min(static_cast<int>(ft), nt - 2);
        const double w = ft - k;
        return (1.0 - w) * (*slices)[k].sample(x) + w * (*slices)[k + 1].sample(x);
    };
    return p;
}

SpacetimePotential SpacetimePotential::general(SpacetimeFunction q, double t_min, double t_max) {
    check_window(t_min, t_max);
    if (!q) throw ParameterError("potential function must be set");
    SpacetimePotential p;
    p.t_min_ = t_min;
    p.t_max_ = t_max;
    p.q_ = [q = std::move(q), t_min, t_max](Vec2 x, double t) {
        if (t < t_min || t > t_max) return 0.0;
        return q(x, t);
    };
    return p;
}

FieldFunction SpacetimePotential::time_integral() const {
    constexpr int kIntervals = 2000;
    const double a = t_min_, b = t_max_;
    const double h = (b - a) / kIntervals;
    if (q0_) {
        double m = 0.5 * (psi_(a) + psi_(b));
        for (int k = 1; k < kIntervals; ++k) m += psi_(a + k * h);
        m *= h;
        return [q0 = q0_, m](Vec2 x) { return m * q0(x); };
    }
    return [q = q_, a, b, h](Vec2 x) {
        double m = 0.5 * (q(x, a) + q(x, b));
        for (int k = 1; k < kIntervals; ++k) m += q(x, a + k * h);
        return m * h;
    };
}

SpacetimePotential SpacetimePotential::shifted(double a) const {
    if (q0_) return separable(q0_, [psi = psi_, a](double t) { return psi(t - a); }, t_min_ + a, t_max_ + a);
    return general([q = q_, a](Vec2 x, double t) { return q(x, t - a); }, t_min_ + a, t_max_ + a);
}

void SigmaGrid::validate() const {
    if (n < 2 || !(max > min)) throw ParameterError("sigma grid needs n >= 2 and max > min");
}

SigmaGrid required_sigma_bounds(const SpacetimePotential& q, double max_chord, int n) {
    return {n, q.t_min() - max_chord, q.t_max()};
}

double LightRayData::max_chord() const {
    double m = 0.0;
    for (double c : chord) m = std::max(m, c);
    return m;
}

LightRayData lightray_forward(const ConformalMetric& g, const SpacetimePotential& q, const SigmaGrid& sigma,
                              FanGeometry fan, const XrayOptions& opt) {
    sigma.validate();
    fan.validate();
    if (!(opt.quad_step > 0.0)) throw ParameterError("quadrature step must be positive");
    LightRayData d;
    d.fan = fan;
    d.sigma = sigma;
    d.values.assign(fan.size() * sigma.n, 0.0);
    d.mask.assign(fan.size(), 0);
    d.chord.assign(fan.size(), 0.0);
    const double step = step_for_tolerance(opt.tol);
    parallel_for(fan.size(), [&](std::size_t r) {
        const int i = static_cast<int>(r / fan.nalpha);
        const int j = static_cast<int>(r % fan.nalpha);
        // The spatial part of each ray is traced once; its quadrature nodes
        // are reused for every sigma.
        std::vector<double> ts, ws;
        std::vector<Vec2> xs;
        TraceOutcome o;
        try {
            o = trace_quadrature(g, fan.state(i, j), opt.t_max, step, opt.quad_step,
                                 [&](double t, Vec2 x, Vec2, double w) {
                                     ts.push_back(t);
                                     xs.push_back(x);
                                     ws.push_back(w);
                                 });
        } catch (const Error&) {
            d.mask[r] = 2;
            return;
        }
        if (o.trapped) {
            d.mask[r] = 1;
            return;
        }
        d.chord[r] = o.exit_time;
        for (int k = 0; k < sigma.n; ++k) {
            const double s = sigma.at(k);
            double acc = 0.0;
            for (std::size_t n = 0; n < ts.size(); ++n) acc += ws[n] * q(xs[n], ts[n] + s);
            d.values[r * sigma.n + k] = acc;
        }
    });
    for (auto& m : d.mask)
        if (m) {
            ++d.trapped;
            m = 1;
        }
    return d;
}

std::vector<double> sigma_integrals(const LightRayData& d) {
    std::vector<double> out(d.fan.size(), 0.0);
    const int n = d.sigma.n;
    for (std::size_t r = 0; r < out.size(); ++r) {
        double acc = 0.5 * (d.at(r, 0) + d.at(r, n - 1));
        for (int k = 1; k < n - 1; ++k) acc += d.at(r, k);
        out[r] = acc * d.sigma.step();
    }
    return out;
}

std::vector<Complex> sigma_fourier(const LightRayData& d, double rho) {
    std::vector<Complex> out(d.fan.size(), 0.0);
    const int n = d.sigma.n;
    std::vector<Complex> phase(n);
    for (int k = 0; k < n; ++k) phase[k] = rho == 0.0 ? Complex(1.0, 0.0) : std::polar(1.0, -rho * d.sigma.at(k));
    for (std::size_t r = 0; r < out.size(); ++r) {
        Complex acc = 0.5 * (d.at(r, 0) * phase[0] + d.at(r, n - 1) * phase[n - 1]);
        for (int k = 1; k < n - 1; ++k) acc += d.at(r, k) * phase[k];
        out[r] = acc * d.sigma.step();
    }
    return out;
}

namespace {
void check_sigma_cover(const LightRayData& d, const SpacetimePotential& q) {
    const SigmaGrid need = required_sigma_bounds(q, d.max_chord(), d.sigma.n);
    if (d.sigma.min > need.min || d.sigma.max < need.max)
        throw ParameterError("sigma grid [" + std::to_string(d.sigma.min) + ", " + std::to_string(d.sigma.max) +
                             "] does not cover the required window [" + std::to_string(need.min) + ", " +
                             std::to_string(need.max) + "]");
}
}  // namespace

FubiniReport sigma_fubini_check(const ConformalMetric& g, const SpacetimePotential& q, FanGeometry fan,
                                const SigmaGrid& sigma, const XrayOptions& opt) {
    const LightRayData d = lightray_forward(g, q, sigma, fan, opt);
    check_sigma_cover(d, q);
    FubiniReport rep;
    rep.required = required_sigma_bounds(q, d.max_chord(), sigma.n);
    rep.lhs = sigma_integrals(d);
    rep.rhs = xray_forward(g, q.time_integral(), fan, opt);
    std::vector<double> num(fan.size(), 0.0), den(fan.size(), 0.0);
    for (std::size_t r = 0; r < fan.size(); ++r) {
        if (d.mask[r] || rep.rhs.mask[r]) continue;
        num[r] = std::pow(rep.lhs[r] - rep.rhs.values[r], 2);
        den[r] = std::pow(rep.rhs.values[r], 2);
    }
    const double nn = std::sqrt(pairwise_sum(num));
    const double dd = std::sqrt(pairwise_sum(den));
    rep.residual = dd > 0.0 ? nn / dd : nn;
    return rep;
}

std::vector<Complex> sigma_fourier_slice(const ConformalMetric& g, const SpacetimePotential& q, FanGeometry fan,
                                         const SigmaGrid& sigma, double rho, const XrayOptions& opt) {
    const LightRayData d = lightray_forward(g, q, sigma, fan, opt);
    check_sigma_cover(d, q);
    return sigma_fourier(d, rho);
}

TranslationReport time_translation_check(const ConformalMetric& g, const SpacetimePotential& q, FanGeometry fan,
                                         const SigmaGrid& sigma, double a, const XrayOptions& opt) {
    sigma.validate();
    const double h = sigma.step();
    TranslationReport rep;
    rep.shift = a;
    const int m = static_cast<int>(std::lround(a / h));
    rep.grid_shift = m * h;
    // Evaluate the unshifted transform on a grid extended by |m| + 1 nodes
    // on both sides so every shifted sample has neighbours.
    const int pad = std::abs(m) + 2;
    const SigmaGrid wide{sigma.n + 2 * pad, sigma.min - pad * h, sigma.max + pad * h};
    const LightRayData base = lightray_forward(g, q, wide, fan, opt);
    const LightRayData exact_shift = lightray_forward(g, q.shifted(rep.grid_shift), sigma, fan, opt);
    const LightRayData shifted = lightray_forward(g, q.shifted(a), sigma, fan, opt);
    double scale = 0.0, grid_err = 0.0, resample_err = 0.0, curv = 0.0;
    for (std::size_t r = 0; r < fan.size(); ++r) {
        if (base.mask[r]) continue;
        for (int k = 0; k < wide.n; ++k) scale = std::max(scale, std::abs(base.at(r, k)));
        for (int k = 1; k + 1 < wide.n; ++k)
            curv = std::max(curv, std::abs(base.at(r, k - 1) - 2.0 * base.at(r, k) + base.at(r, k + 1)));
        for (int k = 0; k < sigma.n; ++k) {
            // Lq_a(sigma_k) = Lq(sigma_k - a); sigma_k sits at wide index k + pad.
            grid_err = std::max(grid_err, std::abs(exact_shift.at(r, k) - base.at(r, k + pad - m)));
            const double pos = k + pad - a / h;
            const int k0 = static_cast<int>(std::floor(pos));
            const double w = pos - k0;
            const double interp = (1.0 - w) * base.at(r, k0) + w * base.at(r, k0 + 1);
            resample_err = std::max(resample_err, std::abs(shifted.at(r, k) - interp));
        }
    }
    const double s = scale > 0.0 ? scale : 1.0;
    rep.grid_shift_error = grid_err / s;
    rep.resample_error = resample_err / s;
    // max|Lq''| h^2 ~ max second difference; the linear-interpolation error
    // is at most an eighth of it. The factor 2 covers the second-difference
    // estimate of the curvature.
    rep.interpolation_bound = 2.0 * curv / 8.0 / s + 1e-12;
    return rep;
}

}  // namespace geoxray
