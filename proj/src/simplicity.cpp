#include "geoxray/simplicity.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace geoxray {

double boundary_second_fundamental_form(const ConformalMetric& g, double beta) {
    const Vec2 p = unit(beta);
    const LambdaJet j = g.jet(p);
    return 1.0 + p.x * j.d1 + p.y * j.d2;
}

PhaseState fan_state(double beta, double alpha) { return {unit(beta), wrap_angle(beta + kPi + alpha)}; }

nlohmann::json SimplicityReport::to_json() const {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& s : witnesses) {
        w.push_back({{"x", {s.x.x, s.x.y}},
                     {"theta", s.theta},
                     {"failure_kind", s.failure_kind},
                     {"value", std::isfinite(s.value) ? nlohmann::json(s.value) : nlohmann::json(nullptr)}});
    }
    return {{"strictly_convex", strictly_convex},
            {"nontrapping", nontrapping},
            {"no_conjugate_points", no_conjugate_points},
            {"simple", simple()},
            {"boundary_samples", boundary_samples},
            {"fan_samples", fan_samples},
            {"interior_samples", interior_samples},
            {"failed_samples", failed_samples},
            {"witnesses", w}};
}

SimplicityReport verify_simplicity(const ConformalMetric& g, int n_boundary, int n_angles, double t_max,
                                   double tol, int max_witnesses) {
    if (n_boundary < 8 || n_angles < 8) throw ParameterError("simplicity sampling needs at least 8 per axis");
    SimplicityReport rep;
    rep.boundary_samples = n_boundary;

    enum Kind { Convex = 0, Trapped, Conjugate, Failure, NKinds };
    static const char* names[NKinds] = {"not_convex", "trapped", "conjugate_point", "integration_error"};
    int counts[NKinds] = {0, 0, 0, 0};
    std::vector<SimplicityWitness> found[NKinds];
    auto add = [&](Kind k, const PhaseState& s, double value) {
        ++counts[k];
        if (static_cast<int>(found[k].size()) < max_witnesses)
            found[k].push_back({s.x, s.theta, names[k], value});
    };

    for (int i = 0; i < n_boundary; ++i) {
        const double beta = kTwoPi * i / n_boundary;
        double ii = std::numeric_limits<double>::quiet_NaN();
        try {
            ii = boundary_second_fundamental_form(g, beta);
        } catch (const Error&) {
        }
        if (!(ii > 0.0)) add(Convex, {unit(beta), 0.0}, ii);
    }

    // Per-sample outcomes collected in index order for determinism.
    struct Outcome {
        PhaseState s;
        bool trapped = false;
        bool failed = false;
        double conj = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<PhaseState> fan;
    for (int i = 0; i < n_boundary; ++i)
        for (int j = 0; j < n_angles; ++j) {
            const double beta = kTwoPi * i / n_boundary;
            const double alpha = -0.5 * kPi + (j + 0.5) * kPi / n_angles;
            fan.push_back(fan_state(beta, alpha));
        }
    std::vector<PhaseState> interior;
    for (double r : {0.2, 0.4, 0.6, 0.8})
        for (int i = 0; i < n_boundary; ++i)
            for (int j = 0; j < n_angles; ++j)
                interior.push_back({r * unit(kTwoPi * i / n_boundary), wrap_angle(kTwoPi * j / n_angles)});
    rep.fan_samples = static_cast<int>(fan.size());
    rep.interior_samples = static_cast<int>(interior.size());

    std::vector<Outcome> fan_out(fan.size()), int_out(interior.size());
    parallel_for(fan.size(), [&](std::size_t k) {
        Outcome& o = fan_out[k];
        o.s = fan[k];
        try {
            o.trapped = !exit_time(g, fan[k], t_max, tol).has_value();
            if (auto c = conjugate_scan(g, fan[k], t_max, tol)) o.conj = *c;
        } catch (const Error&) {
            o.failed = true;
        }
    });
    parallel_for(interior.size(), [&](std::size_t k) {
        Outcome& o = int_out[k];
        o.s = interior[k];
        try {
            o.trapped = !exit_time(g, interior[k], t_max, tol).has_value();
        } catch (const Error&) {
            o.failed = true;
        }
    });
    for (const auto* outs : {&fan_out, &int_out})
        for (const Outcome& o : *outs) {
            if (o.failed) add(Failure, o.s, std::numeric_limits<double>::quiet_NaN());
            if (o.trapped) add(Trapped, o.s, t_max);
            if (std::isfinite(o.conj)) add(Conjugate, o.s, o.conj);
        }

    rep.strictly_convex = counts[Convex] == 0;
    rep.nontrapping = counts[Trapped] == 0;
    rep.failed_samples = counts[Failure];
    rep.no_conjugate_points = counts[Conjugate] == 0;
    for (auto& v : found) rep.witnesses.insert(rep.witnesses.end(), v.begin(), v.end());
    return rep;
}

}  // namespace geoxray
