#include "geoxray/radon.hpp"

#include <algorithm>
#include <cmath>

#include "geoxray/fft.hpp"

namespace geoxray {

Sinogram::Sinogram(int ns_, int nomega_, double S_) : ns(ns_), nomega(nomega_), S(S_) {
    validate();
    values.assign(static_cast<std::size_t>(ns) * nomega, 0.0);
}

void Sinogram::validate() const {
    if (ns < 2 || nomega < 2) throw ParameterError("sinogram needs at least 2 samples per axis");
    if (!(S > 0.0)) throw ParameterError("sinogram half-width S must be positive");
    if (!values.empty() && values.size() != static_cast<std::size_t>(ns) * nomega)
        throw ParameterError("sinogram value count does not match its shape");
}

double Sinogram::sample(double s, int j) const {
    const double fs = (s + S) / ds();
    if (!(fs >= 0.0) || fs > ns - 1) return 0.0;
    int i = static_cast<int>(fs);
    if (i >= ns - 1) i = ns - 2;
    const double w = fs - i;
    return (1.0 - w) * at(i, j) + w * at(i + 1, j);
}

double line_integral(const FieldFunction& f, double s, double phi, double half_length, double quad_step) {
    if (!(quad_step > 0.0)) throw ParameterError("quadrature step must be positive");
    if (half_length <= 0.0) return 0.0;
    const Vec2 w = unit(phi);
    const Vec2 wp{-w.y, w.x};
    const Vec2 base = s * wp;
    const int n = std::max(2, static_cast<int>(std::ceil(2.0 * half_length / quad_step)));
    const double h = 2.0 * half_length / n;
    double acc = 0.5 * (f(base - half_length * w) + f(base + half_length * w));
    for (int k = 1; k < n; ++k) acc += f(base + (-half_length + k * h) * w);
    return acc * h;
}

namespace {

double bounding_radius(const Grid2D& g) {
    const double ax = std::max(std::abs(g.xmin), std::abs(g.xmax));
    const double ay = std::max(std::abs(g.ymin), std::abs(g.ymax));
    return std::hypot(ax, ay);
}

Sinogram forward_impl(const FieldFunction& f, double radius, int ns, int nomega, double quad_step, double S) {
    if (!(quad_step > 0.0)) throw ParameterError("quadrature step must be positive");
    Sinogram out(ns, nomega, S);
    parallel_for(static_cast<std::size_t>(nomega), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < ns; ++i) {
            const double s = out.s(i);
            const double half = radius * radius - s * s;
            out.at(i, j) = half > 0.0 ? line_integral(f, s, out.angle(j), std::sqrt(half), quad_step) : 0.0;
        }
    });
    return out;
}

}  // namespace

Sinogram radon_forward(const ScalarField& f, int ns, int nomega, double quad_step, double S) {
    return forward_impl([&f](Vec2 p) { return f.sample(p); }, bounding_radius(f.grid()), ns, nomega, quad_step,
                        S);
}

Sinogram radon_forward(const FieldFunction& f, double support_radius, int ns, int nomega, double quad_step,
                       double S) {
    if (!(support_radius > 0.0)) throw ParameterError("support radius must be positive");
    return forward_impl(f, support_radius, ns, nomega, quad_step, S);
}

ScalarField backproject(const Sinogram& h, const Grid2D& grid) {
    h.validate();
    ScalarField out(grid);
    std::vector<Vec2> perp(h.nomega);
    for (int j = 0; j < h.nomega; ++j) perp[j] = h.omega_perp(j);
    const double dw = kTwoPi / h.nomega;
    parallel_for(static_cast<std::size_t>(grid.ny), [&](std::size_t jy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Vec2 y = grid.node(ix, static_cast<int>(jy));
            double acc = 0.0;
            for (int j = 0; j < h.nomega; ++j) acc += h.sample(dot(y, perp[j]), j);
            out.at(ix, static_cast<int>(jy)) = acc * dw;
        }
    });
    return out;
}

Sinogram ramp_filter(const Sinogram& h) {
    h.validate();
    if (h.ns < 32) throw ParameterError("ramp filter needs at least 32 s-samples");
    const int L = 2 * h.ns;
    const double ds = h.ds();
    // Band-limited |sigma| kernel at offsets n*ds: pi/(2 ds^2) at 0,
    // -2/(pi n^2 ds^2) for odd n, 0 for even n != 0.
    std::vector<Complex> kernel(L, 0.0);
    for (int k = 0; k < L; ++k) {
        const int n = k <= L / 2 ? k : k - L;
        double v = 0.0;
        if (n == 0) v = kPi / (2.0 * ds * ds);
        else if (n % 2 != 0) v = -2.0 / (kPi * n * n * ds * ds);
        kernel[k] = v * ds;
    }
    Fft fwd({L}, Fft::Direction::Forward);
    Fft inv({L}, Fft::Direction::Inverse);
    fwd.execute(kernel);
    Sinogram out(h.ns, h.nomega, h.S);
    parallel_for(static_cast<std::size_t>(h.nomega), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        std::vector<Complex> buf(L, 0.0);
        for (int i = 0; i < h.ns; ++i) buf[i] = h.at(i, j);
        fwd.execute(buf);
        for (int k = 0; k < L; ++k) buf[k] *= kernel[k];
        inv.execute(buf);
        for (int i = 0; i < h.ns; ++i) out.at(i, j) = buf[i].real() / L;
    });
    return out;
}

ScalarField fbp_invert(const Sinogram& h, const Grid2D& grid) {
    ScalarField out = backproject(ramp_filter(h), grid);
    out *= 1.0 / (4.0 * kPi);
    return out;
}

FourierSliceReport fourier_slice_residual(const ScalarField& f, const Sinogram& sino, int angle_stride) {
    sino.validate();
    const Grid2D& g = f.grid();
    if (sino.ns < 16) throw ParameterError("Fourier slice check needs at least 16 s-samples");
    if (sino.ds() > 4.0 * std::max(g.dx(), g.dy()))
        throw ParameterError("sinogram s-sampling is too coarse for the field grid");
    if (angle_stride <= 0) angle_stride = std::max(1, sino.nomega / 16);
    const int ns = sino.ns;
    const double ds = sino.ds();
    const double dsig = kTwoPi / (ns * ds);
    std::vector<int> angles;
    for (int j = 0; j < sino.nomega; j += angle_stride) angles.push_back(j);

    const int nsig = ns;
    std::vector<double> diff2(angles.size() * nsig), ref2(angles.size() * nsig), absd(angles.size() * nsig);
    auto sinc = [](double u) { return std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u; };
    parallel_for(angles.size(), [&](std::size_t a) {
        const int j = angles[a];
        const Vec2 wp = sino.omega_perp(j);
        std::vector<Complex> row(g.nx);
        for (int k = 0; k < nsig; ++k) {
            const double sigma = (k - nsig / 2) * dsig;
            // s-transform of the sinogram by the trapezoid rule.
            Complex lhs = 0.0;
            for (int i = 0; i < ns; ++i) {
                const double w = (i == 0 || i == ns - 1) ? 0.5 : 1.0;
                lhs += w * sino.at(i, j) * std::polar(1.0, -sigma * sino.s(i));
            }
            lhs *= ds;
            const Vec2 xi = sigma * wp;
            Complex rhs = 0.0;
            std::vector<Complex> ex(g.nx);
            for (int ix = 0; ix < g.nx; ++ix) ex[ix] = std::polar(1.0, -xi.x * g.x(ix));
            for (int iy = 0; iy < g.ny; ++iy) {
                Complex acc = 0.0;
                const double* rowv = &f.values()[g.index(0, iy)];
                for (int ix = 0; ix < g.nx; ++ix) acc += rowv[ix] * ex[ix];
                rhs += acc * std::polar(1.0, -xi.y * g.y(iy));
            }
            const double sx = sinc(0.5 * xi.x * g.dx());
            const double sy = sinc(0.5 * xi.y * g.dy());
            rhs *= g.dx() * g.dy() * sx * sx * sy * sy;
            const std::size_t idx = a * nsig + k;
            diff2[idx] = std::norm(lhs - rhs);
            ref2[idx] = std::norm(rhs);
            absd[idx] = std::abs(lhs - rhs);
        }
    });
    FourierSliceReport r;
    r.n_sigma = nsig;
    r.n_angles = static_cast<int>(angles.size());
    r.max_abs = absd.empty() ? 0.0 : *std::max_element(absd.begin(), absd.end());
    const double num = std::sqrt(pairwise_sum(diff2));
    const double den = std::sqrt(pairwise_sum(ref2));
    r.rel_l2 = den > 1e-300 ? num / den : num;
    return r;
}

ScalarField inverse_abs_derivative(const ScalarField& f) {
    const Grid2D& g = f.grid();
    const double h = g.dx();
    if (std::abs(g.dy() - h) > 1e-12 * h) throw ParameterError("inverse |D| oracle needs square cells");
    const int Lx = 2 * g.nx;
    const int Ly = 2 * g.ny;
    // Cell-averaged weights W(a, b) = int_{cell(a,b)} 2/|y| dy.
    constexpr int kNear = 4;
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    auto weight = [&](int a, int b) {
        if (a == 0 && b == 0) return 2.0 * 4.0 * h * std::log(1.0 + std::sqrt(2.0));
        if (std::abs(a) <= kNear && std::abs(b) <= kNear) {
            double acc = 0.0;
            for (int p = 0; p < 8; ++p)
                for (int q = 0; q < 8; ++q) {
                    const double y1 = (a + 0.5 * gx[p]) * h;
                    const double y2 = (b + 0.5 * gx[q]) * h;
                    acc += gw[p] * gw[q] * 2.0 / std::hypot(y1, y2);
                }
            return acc * 0.25 * h * h;
        }
        return h * h * 2.0 / (h * std::hypot(static_cast<double>(a), static_cast<double>(b)));
    };
    std::vector<Complex> ker(static_cast<std::size_t>(Lx) * Ly, 0.0), buf(ker.size(), 0.0);
    for (int b = 0; b < Ly; ++b) {
        const int bb = b <= Ly / 2 ? b : b - Ly;
        for (int a = 0; a < Lx; ++a) {
            const int aa = a <= Lx / 2 ? a : a - Lx;
            ker[static_cast<std::size_t>(b) * Lx + a] = weight(aa, bb);
        }
    }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) buf[static_cast<std::size_t>(j) * Lx + i] = f.at(i, j);
    Fft fwd({Ly, Lx}, Fft::Direction::Forward);
    Fft inv({Ly, Lx}, Fft::Direction::Inverse);
    fwd.execute(ker);
    fwd.execute(buf);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= ker[k];
    inv.execute(buf);
    ScalarField out(g);
    const double scale = 1.0 / (static_cast<double>(Lx) * Ly);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.at(i, j) = buf[static_cast<std::size_t>(j) * Lx + i].real() * scale;
    return out;
}

NormalOperatorReport normal_operator_residual(const ScalarField& f, int ns, int nomega, double interior_radius) {
    const Grid2D& g = f.grid();
    if (ns <= 0) ns = 2 * g.nx;
    if (nomega <= 0) nomega = 2 * g.nx;
    const double step = 0.5 * std::min(g.dx(), g.dy());
    const double S = std::hypot(std::max(std::abs(g.xmin), std::abs(g.xmax)),
                                std::max(std::abs(g.ymin), std::abs(g.ymax)));
    NormalOperatorReport r;
    r.interior_radius = interior_radius;
    r.normal = backproject(radon_forward(f, ns, nomega, step, S), g);
    r.oracle = inverse_abs_derivative(f);
    r.rel_mismatch = relative_l2_error(r.normal, r.oracle, interior_radius);
    return r;
}

StabilityReport stability_residual(const ScalarField& f, int ns, int nomega, double slack) {
    const Grid2D& g = f.grid();
    StabilityReport r;
    r.lhs = f.l2_norm();
    const double S = std::hypot(std::max(std::abs(g.xmin), std::abs(g.xmax)),
                                std::max(std::abs(g.ymin), std::abs(g.ymax)));
    const Sinogram sino = radon_forward(f, ns, nomega, 0.5 * std::min(g.dx(), g.dy()), S);
    const int L = 4 * ns;
    const double ds = sino.ds();
    const double dsig = kTwoPi / (L * ds);
    Fft fwd({L}, Fft::Direction::Forward);
    std::vector<double> per_angle(nomega);
    parallel_for(static_cast<std::size_t>(nomega), [&](std::size_t jj) {
        std::vector<Complex> buf(L, 0.0);
        for (int i = 0; i < ns; ++i) buf[i] = sino.at(i, static_cast<int>(jj));
        fwd.execute(buf);
        // The phase from s_0 = -S does not affect magnitudes.
        std::vector<double> terms(L);
        for (int k = 0; k < L; ++k) {
            const double sigma = dft_frequency(k, L, ds);
            terms[k] = std::sqrt(1.0 + sigma * sigma) * std::norm(buf[k] * ds);
        }
        per_angle[jj] = pairwise_sum(terms) * dsig;
    });
    r.rhs = std::sqrt(0.5 * pairwise_sum(per_angle) * kTwoPi / nomega);
    r.holds = r.lhs <= r.rhs * (1.0 + slack);
    return r;
}

}  // namespace geoxray
