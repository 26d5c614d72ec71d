#include "geoxray/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "geoxray/rng.hpp"

namespace geoxray {

namespace {

const std::map<std::string, PhantomKind>& kind_names() {
    static const std::map<std::string, PhantomKind> m = {
        {"zero", PhantomKind::Zero},
        {"gaussian_bump", PhantomKind::GaussianBump},
        {"bump_mixture", PhantomKind::BumpMixture},
        {"disk_indicator", PhantomKind::DiskIndicator},
        {"odd_antipodal_pair", PhantomKind::OddAntipodalPair},
        {"separable_spacetime", PhantomKind::SeparableSpacetime},
        {"two_bump", PhantomKind::TwoBump},
    };
    return m;
}

// Smooth step: 1 on [0, 1/2], 0 on [1, inf), C-infinity in between.
double cutoff(double u) {
    if (u <= 0.5) return 1.0;
    if (u >= 1.0) return 0.0;
    auto e = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    const double a = e(1.0 - u), b = e(u - 0.5);
    return a / (a + b);
}

struct Bump {
    Vec2 c;
    double w;
    double a;
};

std::vector<Bump> mixture_bumps(const PhantomSpec& s) {
    Rng rng(s.seed);
    std::vector<Bump> out;
    for (int k = 0; k < s.count; ++k) {
        const double w = rng.uniform(0.15, 0.3);
        const double reach = 1.0 - s.margin - w;
        const double r = reach * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, kTwoPi);
        const double a = rng.uniform(0.5, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        out.push_back({r * unit(phi), w, a});
    }
    return out;
}

double gaussian_cut_radius(const PhantomSpec& s) { return std::min(4.0 * s.width, 1.0 - s.margin - norm(s.center)); }

}  // namespace

std::string to_string(PhantomKind k) {
    for (const auto& [name, kind] : kind_names())
        if (kind == k) return name;
    return "unknown";
}

PhantomKind phantom_kind_from_string(const std::string& s) {
    std::string key = s;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "gaussian") key = "gaussian_bump";
    if (key == "mixture") key = "bump_mixture";
    if (key == "disk") key = "disk_indicator";
    if (key == "odd_pair") key = "odd_antipodal_pair";
    auto it = kind_names().find(key);
    if (it == kind_names().end()) throw ParameterError("unknown phantom kind '" + s + "'");
    return it->second;
}

double smooth_bump(Vec2 y, double w) {
    const double s2 = norm2(y) / (w * w);
    return s2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s2)) : 0.0;
}

double poly_bump(Vec2 y, double w, int p) {
    const double s2 = norm2(y) / (w * w);
    return s2 < 1.0 ? std::pow(1.0 - s2, p) : 0.0;
}

double support_radius(const PhantomSpec& s) {
    switch (s.kind) {
        case PhantomKind::Zero:
            return 0.0;
        case PhantomKind::GaussianBump:
        case PhantomKind::SeparableSpacetime:
            return norm(s.center) + gaussian_cut_radius(s);
        case PhantomKind::BumpMixture: {
            double r = 0.0;
            for (const Bump& b : mixture_bumps(s)) r = std::max(r, norm(b.c) + b.w);
            return r;
        }
        case PhantomKind::DiskIndicator:
            return norm(s.center) + s.radius;
        case PhantomKind::OddAntipodalPair:
            return norm(s.center) + s.width;
        case PhantomKind::TwoBump:
            return norm(Vec2{-0.3, -0.25}) + 0.35;
    }
    return 0.0;
}

void PhantomSpec::validate() const {
    if (!(margin >= 0.0 && margin < 1.0)) throw ParameterError("phantom margin must lie in [0, 1)");
    if (kind != PhantomKind::Zero && kind != PhantomKind::BumpMixture && kind != PhantomKind::TwoBump &&
        !(width > 0.0))
        throw ParameterError("phantom width must be positive");
    if (kind == PhantomKind::BumpMixture && count < 1) throw ParameterError("bump mixture needs count >= 1");
    if (kind == PhantomKind::DiskIndicator && !(radius > 0.0)) throw ParameterError("disk radius must be positive");
    if ((kind == PhantomKind::GaussianBump || kind == PhantomKind::SeparableSpacetime) &&
        gaussian_cut_radius(*this) < 2.0 * width)
        throw ParameterError("gaussian bump does not fit inside the support margin");
    if (kind == PhantomKind::OddAntipodalPair && !(norm(center) > width))
        throw ParameterError("odd pair bumps overlap: need |center| > width");
    if (kind == PhantomKind::SeparableSpacetime && !(t_width > 0.0))
        throw ParameterError("time width must be positive");
    if (support_radius(*this) > 1.0 - margin + 1e-12)
        throw ParameterError("phantom support leaves the disk of radius 1 - margin");
}

FieldFunction phantom_function(const PhantomSpec& s) {
    s.validate();
    switch (s.kind) {
        case PhantomKind::Zero:
            return [](Vec2) { return 0.0; };
        case PhantomKind::GaussianBump:
        case PhantomKind::SeparableSpacetime: {
            const double rho = gaussian_cut_radius(s);
            return [c = s.center, w = s.width, a = s.amplitude, rho](Vec2 x) {
                const double r2 = norm2(x - c);
                if (r2 >= rho * rho) return 0.0;
                return a * std::exp(-r2 / (w * w)) * cutoff(std::sqrt(r2) / rho);
            };
        }
        case PhantomKind::BumpMixture: {
            const auto bumps = mixture_bumps(s);
            return [bumps](Vec2 x) {
                double v = 0.0;
                for (const Bump& b : bumps) v += b.a * smooth_bump(x - b.c, b.w);
                return v;
            };
        }
        case PhantomKind::DiskIndicator:
            return [c = s.center, r = s.radius, a = s.amplitude](Vec2 x) { return norm2(x - c) <= r * r ? a : 0.0; };
        case PhantomKind::OddAntipodalPair:
            return [p = s.center, w = s.width, a = s.amplitude](Vec2 x) {
                return a * (smooth_bump(x - p, w) - smooth_bump(x + p, w));
            };
        case PhantomKind::TwoBump:
            return [a = s.amplitude](Vec2 x) {
                return a * (smooth_bump(x - Vec2{0.35, 0.1}, 0.3) + 0.7 * smooth_bump(x - Vec2{-0.3, -0.25}, 0.35));
            };
    }
    throw ParameterError("unhandled phantom kind");
}

ScalarField generate(const PhantomSpec& s) { return ScalarField::from_function(s.grid, phantom_function(s)); }

SpacetimePotential generate_spacetime(const PhantomSpec& s) {
    if (s.kind != PhantomKind::SeparableSpacetime)
        throw ParameterError("spacetime potentials need the separable_spacetime kind");
    const FieldFunction q0 = phantom_function(s);
    const double tc = s.t_center, tw = s.t_width;
    return SpacetimePotential::separable(
        q0, [tc, tw](double t) { return std::exp(-(t - tc) * (t - tc) / (tw * tw)); }, tc - 8.0 * tw,
        tc + 8.0 * tw);
}

nlohmann::json PhantomSpec::to_json() const {
    return {{"kind", to_string(kind)},
            {"center", {center.x, center.y}},
            {"width", width},
            {"amplitude", amplitude},
            {"radius", radius},
            {"count", count},
            {"seed", seed},
            {"margin", margin},
            {"t_center", t_center},
            {"t_width", t_width},
            {"grid", {{"nx", grid.nx}, {"ny", grid.ny}, {"xmin", grid.xmin}, {"xmax", grid.xmax},
                      {"ymin", grid.ymin}, {"ymax", grid.ymax}}}};
}

PhantomSpec PhantomSpec::from_json(const nlohmann::json& j) {
    PhantomSpec s;
    try {
        s.kind = phantom_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("center")) s.center = {j["center"].at(0).get<double>(), j["center"].at(1).get<double>()};
        s.width = j.value("width", s.width);
        s.amplitude = j.value("amplitude", s.amplitude);
        s.radius = j.value("radius", s.radius);
        s.count = j.value("count", s.count);
        s.seed = j.value("seed", s.seed);
        s.margin = j.value("margin", s.margin);
        s.t_center = j.value("t_center", s.t_center);
        s.t_width = j.value("t_width", s.t_width);
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            s.grid = {g.at("nx").get<int>(), g.at("ny").get<int>(), g.at("xmin").get<double>(),
                      g.at("xmax").get<double>(), g.at("ymin").get<double>(), g.at("ymax").get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("invalid phantom spec: ") + e.what());
    }
    s.validate();
    return s;
}

PhantomSpec PhantomSpec::parse(const std::string& text) {
    PhantomSpec s;
    const auto colon = text.find(':');
    s.kind = phantom_kind_from_string(text.substr(0, colon));
    if (s.kind == PhantomKind::OddAntipodalPair) {
        s.center = {0.5, 0.0};
        s.width = 0.2;
    }
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ParameterError("phantom parameter '" + item + "' is not key=value");
            const std::string key = item.substr(0, eq);
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(item.substr(eq + 1), &used);
                if (used != item.size() - eq - 1) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw ParameterError("phantom parameter '" + key + "' is not a number");
            }
            if (key == "cx") s.center.x = v;
            else if (key == "cy") s.center.y = v;
            else if (key == "width") s.width = v;
            else if (key == "amplitude") s.amplitude = v;
            else if (key == "radius") s.radius = v;
            else if (key == "count") s.count = static_cast<int>(v);
            else if (key == "seed") s.seed = static_cast<std::uint64_t>(v);
            else if (key == "margin") s.margin = v;
            else if (key == "tc") s.t_center = v;
            else if (key == "tw") s.t_width = v;
            else if (key == "n") s.grid = Grid2D::square(static_cast<int>(v));
            else throw ParameterError("unknown phantom parameter '" + key + "'");
        }
    }
    s.validate();
    return s;
}

SMFunction sm_bump_mixture(std::uint64_t seed, int count, double margin) {
    Rng rng(seed);
    struct Term {
        Vec2 c;
        double w;
        double a;
        double cs[4];
        double sn[4];
    };
    std::vector<Term> terms;
    for (int k = 0; k < count; ++k) {
        Term t{};
        t.w = rng.uniform(0.35, 0.5);
        const double reach = std::max(0.0, 1.0 - margin - t.w);
        t.c = reach * std::sqrt(rng.uniform()) * unit(rng.uniform(0.0, kTwoPi));
        t.a = rng.uniform(0.5, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        for (int m = 0; m < 4; ++m) {
            t.cs[m] = rng.uniform(-1.0, 1.0) / (1 + m);
            t.sn[m] = m == 0 ? 0.0 : rng.uniform(-1.0, 1.0) / (1 + m);
        }
        terms.push_back(t);
    }
    return [terms](Vec2 x, double theta) {
        double v = 0.0;
        for (const Term& t : terms) {
            const double b = poly_bump(x - t.c, t.w, 8);
            if (b == 0.0) continue;
            double trig = 0.0;
            for (int m = 0; m < 4; ++m) trig += t.cs[m] * std::cos(m * theta) + t.sn[m] * std::sin(m * theta);
            v += t.a * b * trig;
        }
        return v;
    };
}

FanFunction fan_trig_mixture(std::uint64_t seed, int modes) {
    Rng rng(seed);
    std::vector<double> c(static_cast<std::size_t>(4 * modes));
    for (double& v : c) v = rng.uniform(-1.0, 1.0);
    const double shift = rng.uniform(0.5, 1.5);
    return [c, modes, shift](double beta, double alpha) {
        double v = shift;
        for (int m = 0; m < modes; ++m) {
            v += c[4 * m] * std::cos((m + 1) * beta) + c[4 * m + 1] * std::sin((m + 1) * beta);
            v += c[4 * m + 2] * std::cos((m + 1) * alpha) + c[4 * m + 3] * std::sin((m + 1) * alpha) * std::cos(beta);
        }
        return v;
    };
}

FanBeamData sample_fan(const FanFunction& h, FanGeometry fan) {
    FanBeamData d(fan);
    for (int i = 0; i < fan.nbeta; ++i)
        for (int j = 0; j < fan.nalpha; ++j) d.at(i, j) = h(fan.beta(i), fan.alpha(j));
    return d;
}

}  // namespace geoxray
