#include "geoxray/metric.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "geoxray/io.hpp"

namespace geoxray {

namespace {

// Analytic builtins are defined on a neighbourhood of the closed unit disk;
// the integrator may step slightly past |x| = 1 before the exit is refined.
constexpr double kAnalyticDomainRadius = 1.5;

enum class Builtin { Euclidean, Affine, SphereCap, Hyperbolic, GaussianBump };

// Cubic Lagrange weights on nodes -1, 0, 1, 2 at fractional offset t.
std::array<double, 4> cubic_weights(double t) {
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t end = s.find(',', pos);
        if (end == std::string::npos) end = s.size();
        const std::string tok = s.substr(pos, end - pos);
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw ParameterError("bad numeric metric parameter '" + tok + "'");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

}  // namespace

struct ConformalMetric::Impl {
    Kind kind = Kind::Analytic;
    Builtin builtin = Builtin::Euclidean;
    std::vector<double> params;
    std::string name;
    std::string spec;
    LambdaGrid grid;

    bool contains(Vec2 p) const {
        if (kind == Kind::Gridded) {
            const double fx = (p.x - grid.xmin) / grid.dx();
            const double fy = (p.y - grid.ymin) / grid.dy();
            return fx >= 1.0 && fy >= 1.0 && fx <= grid.nx - 3 && fy <= grid.ny - 3;
        }
        const double r2 = norm2(p);
        if (!(r2 <= kAnalyticDomainRadius * kAnalyticDomainRadius)) return false;
        if (builtin == Builtin::Hyperbolic) return r2 < params[0] * params[0];
        return true;
    }

    LambdaJet analytic(Vec2 p) const {
        LambdaJet j;
        switch (builtin) {
            case Builtin::Euclidean:
                break;
            case Builtin::Affine:
                j.value = params[0] + params[1] * p.x + params[2] * p.y;
                j.d1 = params[1];
                j.d2 = params[2];
                break;
            case Builtin::SphereCap: {
                const double k = params[0];
                const double k2 = k * k;
                const double q = 1.0 + k2 * norm2(p);
                j.value = std::log(2.0 * k / q);
                j.d1 = -2.0 * k2 * p.x / q;
                j.d2 = -2.0 * k2 * p.y / q;
                const double c = 4.0 * k2 * k2 / (q * q);
                j.d11 = -2.0 * k2 / q + c * p.x * p.x;
                j.d22 = -2.0 * k2 / q + c * p.y * p.y;
                j.d12 = c * p.x * p.y;
                break;
            }
            case Builtin::Hyperbolic: {
                const double r = params[0];
                const double q = r * r - norm2(p);
                j.value = std::log(2.0 * r / q);
                j.d1 = 2.0 * p.x / q;
                j.d2 = 2.0 * p.y / q;
                const double c = 4.0 / (q * q);
                j.d11 = 2.0 / q + c * p.x * p.x;
                j.d22 = 2.0 / q + c * p.y * p.y;
                j.d12 = c * p.x * p.y;
                break;
            }
            case Builtin::GaussianBump: {
                const double a = params[0];
                const double w2 = params[1] * params[1];
                const Vec2 d = p - Vec2{params[2], params[3]};
                const double v = a * std::exp(-norm2(d) / w2);
                j.value = v;
                j.d1 = -2.0 * d.x / w2 * v;
                j.d2 = -2.0 * d.y / w2 * v;
                j.d11 = (-2.0 / w2 + 4.0 * d.x * d.x / (w2 * w2)) * v;
                j.d22 = (-2.0 / w2 + 4.0 * d.y * d.y / (w2 * w2)) * v;
                j.d12 = 4.0 * d.x * d.y / (w2 * w2) * v;
                break;
            }
        }
        return j;
    }

    double node(int i, int k) const { return grid.values[static_cast<std::size_t>(k) * grid.nx + i]; }

    // First and second differences at a node along one axis, 4th-order
    // central where the stencil fits and 2nd-order otherwise.
    void axis_derivs(int i, int k, bool along_x, double h, double& d, double& dd) const {
        const int n = along_x ? grid.nx : grid.ny;
        const int c = along_x ? i : k;
        auto at = [&](int off) { return along_x ? node(i + off, k) : node(i, k + off); };
        if (c >= 2 && c <= n - 3) {
            d = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
            dd = (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
        } else if (c >= 1 && c <= n - 2) {
            d = (at(1) - at(-1)) / (2.0 * h);
            dd = (at(1) - 2.0 * at(0) + at(-1)) / (h * h);
        } else {
            const int s = c == 0 ? 1 : -1;
            d = s * (-3.0 * at(0) + 4.0 * at(s) - at(2 * s)) / (2.0 * h);
            dd = (at(0) - 2.0 * at(s) + at(2 * s)) / (h * h);
        }
    }

    LambdaJet node_jet(int i, int k) const {
        LambdaJet j;
        j.value = node(i, k);
        axis_derivs(i, k, true, grid.dx(), j.d1, j.d11);
        axis_derivs(i, k, false, grid.dy(), j.d2, j.d22);
        // Mixed derivative: x-difference of y-derivatives.
        auto dy_at = [&](int ii) {
            double d = 0.0, dd = 0.0;
            axis_derivs(ii, k, false, grid.dy(), d, dd);
            return d;
        };
        const double hx = grid.dx();
        if (i >= 2 && i <= grid.nx - 3)
            j.d12 = (-dy_at(i + 2) + 8.0 * dy_at(i + 1) - 8.0 * dy_at(i - 1) + dy_at(i - 2)) / (12.0 * hx);
        else if (i >= 1 && i <= grid.nx - 2)
            j.d12 = (dy_at(i + 1) - dy_at(i - 1)) / (2.0 * hx);
        else {
            const int s = i == 0 ? 1 : -1;
            j.d12 = s * (-3.0 * dy_at(i) + 4.0 * dy_at(i + s) - dy_at(i + 2 * s)) / (2.0 * hx);
        }
        return j;
    }

    LambdaJet gridded(Vec2 p) const {
        const double fx = (p.x - grid.xmin) / grid.dx();
        const double fy = (p.y - grid.ymin) / grid.dy();
        int i = static_cast<int>(std::floor(fx));
        int k = static_cast<int>(std::floor(fy));
        i = std::min(i, grid.nx - 3);
        k = std::min(k, grid.ny - 3);
        const auto wx = cubic_weights(fx - i);
        const auto wy = cubic_weights(fy - k);
        LambdaJet out;
        for (int b = 0; b < 4; ++b) {
            for (int a = 0; a < 4; ++a) {
                const double w = wx[a] * wy[b];
                const LambdaJet n = node_jet(i - 1 + a, k - 1 + b);
                out.value += w * n.value;
                out.d1 += w * n.d1;
                out.d2 += w * n.d2;
                out.d11 += w * n.d11;
                out.d12 += w * n.d12;
                out.d22 += w * n.d22;
            }
        }
        return out;
    }
};

ConformalMetric::ConformalMetric(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

namespace {
std::string format_params(const std::vector<double>& p) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    return os.str();
}
}  // namespace

ConformalMetric ConformalMetric::euclidean() {
    auto impl = std::make_shared<Impl>();
    impl->name = "euclidean";
    impl->spec = "euclidean";
    return ConformalMetric(impl);
}

ConformalMetric ConformalMetric::affine(double c0, double a, double b) {
    auto impl = std::make_shared<Impl>();
    impl->builtin = Builtin::Affine;
    impl->params = {c0, a, b};
    impl->name = "affine";
    impl->spec = "affine:" + format_params(impl->params);
    return ConformalMetric(impl);
}

ConformalMetric ConformalMetric::sphere_cap(double k) {
    if (!(k > 0.0)) throw ParameterError("sphere-cap aperture k must be positive");
    auto impl = std::make_shared<Impl>();
    impl->builtin = Builtin::SphereCap;
    impl->params = {k};
    impl->name = "cap";
    impl->spec = "cap:" + format_params(impl->params);
    return ConformalMetric(impl);
}

ConformalMetric ConformalMetric::hyperbolic(double radius) {
    if (!(radius > 0.0)) throw ParameterError("hyperbolic radius must be positive");
    auto impl = std::make_shared<Impl>();
    impl->builtin = Builtin::Hyperbolic;
    impl->params = {radius};
    impl->name = "hyperbolic";
    impl->spec = "hyperbolic:" + format_params(impl->params);
    return ConformalMetric(impl);
}

ConformalMetric ConformalMetric::gaussian_bump(double amplitude, double width, Vec2 center) {
    if (!(width > 0.0)) throw ParameterError("bump width must be positive");
    auto impl = std::make_shared<Impl>();
    impl->builtin = Builtin::GaussianBump;
    impl->params = {amplitude, width, center.x, center.y};
    impl->name = "bump";
    impl->spec = "bump:" + format_params(impl->params);
    return ConformalMetric(impl);
}

ConformalMetric ConformalMetric::gridded(LambdaGrid grid) {
    if (grid.nx < 8 || grid.ny < 8) throw ParameterError("gridded metric needs at least 8x8 samples");
    if (grid.values.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
        throw ParameterError("gridded metric value count does not match nx*ny");
    if (!(grid.xmax > grid.xmin) || !(grid.ymax > grid.ymin)) throw ParameterError("gridded metric extent is empty");
    const double mx = 2.0 * grid.dx();
    const double my = 2.0 * grid.dy();
    if (grid.xmin > -1.0 - mx || grid.xmax < 1.0 + mx || grid.ymin > -1.0 - my || grid.ymax < 1.0 + my)
        throw ParameterError("gridded metric must contain the unit disk with a margin of at least 2 cells");
    for (double v : grid.values)
        if (!std::isfinite(v)) throw DomainError("gridded metric contains non-finite samples");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Gridded;
    impl->name = "grid";
    impl->spec = "grid";
    impl->grid = std::move(grid);
    return ConformalMetric(impl);
}

ConformalMetric ConformalMetric::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "grid") {
        if (tail.empty()) throw ParameterError("grid metric needs a file path");
        auto m = gridded(read_lambda_grid(tail));
        auto impl = std::make_shared<Impl>(*m.impl_);
        impl->spec = spec;
        return ConformalMetric(impl);
    }
    const std::vector<double> p = tail.empty() ? std::vector<double>{} : parse_numbers(tail);
    auto need = [&](std::size_t lo, std::size_t hi) {
        if (p.size() < lo || p.size() > hi) throw ParameterError("wrong number of parameters for metric '" + spec + "'");
    };
    if (head == "euclidean") {
        need(0, 0);
        return euclidean();
    }
    if (head == "affine") {
        need(3, 3);
        return affine(p[0], p[1], p[2]);
    }
    if (head == "cap" || head == "sphere-cap") {
        need(1, 1);
        return sphere_cap(p[0]);
    }
    if (head == "hyperbolic") {
        need(0, 1);
        return hyperbolic(p.empty() ? 1.0 : p[0]);
    }
    if (head == "bump" || head == "gaussian-bump") {
        need(2, 4);
        Vec2 c{p.size() > 2 ? p[2] : 0.0, p.size() > 3 ? p[3] : 0.0};
        return gaussian_bump(p[0], p[1], c);
    }
    throw ParameterError("unknown metric '" + spec + "'");
}

ConformalMetric::Kind ConformalMetric::kind() const { return impl_->kind; }
const std::string& ConformalMetric::name() const { return impl_->name; }
std::string ConformalMetric::spec() const { return impl_->spec; }
const std::vector<double>& ConformalMetric::params() const { return impl_->params; }

nlohmann::json ConformalMetric::describe() const {
    nlohmann::json j;
    j["name"] = impl_->name;
    j["spec"] = impl_->spec;
    j["kind"] = impl_->kind == Kind::Analytic ? "analytic" : "gridded";
    if (impl_->kind == Kind::Analytic) j["params"] = impl_->params;
    else {
        const auto& g = impl_->grid;
        j["grid"] = {{"nx", g.nx}, {"ny", g.ny}, {"xmin", g.xmin}, {"xmax", g.xmax}, {"ymin", g.ymin}, {"ymax", g.ymax}};
    }
    return j;
}

bool ConformalMetric::contains(Vec2 p) const { return impl_->contains(p); }

LambdaJet ConformalMetric::jet(Vec2 p) const {
    if (!impl_->contains(p)) {
        std::ostringstream os;
        os << "point (" << p.x << ", " << p.y << ") is outside the domain of metric " << impl_->spec;
        throw DomainError(os.str());
    }
    const LambdaJet j = impl_->kind == Kind::Analytic ? impl_->analytic(p) : impl_->gridded(p);
    if (!std::isfinite(j.value) || !std::isfinite(j.d1) || !std::isfinite(j.d2) || !std::isfinite(j.d11) ||
        !std::isfinite(j.d12) || !std::isfinite(j.d22))
        throw DomainError("non-finite conformal factor for metric " + impl_->spec);
    return j;
}

double metric_inner(const ConformalMetric& g, Vec2 x, Vec2 u, Vec2 v) {
    return std::exp(2.0 * g.lambda(x)) * dot(u, v);
}

double metric_norm(const ConformalMetric& g, Vec2 x, Vec2 v) { return std::exp(g.lambda(x)) * norm(v); }

Christoffel christoffel_from_jet(const LambdaJet& jet) {
    // g_{jk} = e^{2 lambda} delta_{jk}; d_m g_{jk} = 2 lambda_m e^{2 lambda} delta_{jk};
    // g^{lm} = e^{-2 lambda} delta_{lm}. The exponentials cancel below.
    const std::array<double, 2> dl{jet.d1, jet.d2};
    auto dg = [&](int m, int j, int k) { return j == k ? 2.0 * dl[m] : 0.0; };
    Christoffel gam{};
    for (int l = 0; l < 2; ++l)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                double s = 0.0;
                for (int m = 0; m < 2; ++m) {
                    if (m != l) continue;
                    s += 0.5 * (dg(j, k, m) + dg(k, j, m) - dg(m, j, k));
                }
                gam[l][j][k] = s;
            }
    return gam;
}

Christoffel christoffel(const ConformalMetric& g, Vec2 x) { return christoffel_from_jet(g.jet(x)); }

double gaussian_curvature(const ConformalMetric& g, Vec2 x) { return gaussian_curvature_from_jet(g.jet(x)); }

}  // namespace geoxray
