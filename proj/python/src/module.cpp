#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "geoxray/cli.hpp"
#include "geoxray/geodesic.hpp"
#include "geoxray/lightray.hpp"
#include "geoxray/phantoms.hpp"
#include "geoxray/radon.hpp"
#include "geoxray/simplicity.hpp"
#include "geoxray/smfields.hpp"
#include "geoxray/xray.hpp"

namespace py = pybind11;
using namespace geoxray;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Fields cross the boundary as (ny, nx) arrays on [-1, 1]^2, row j at y_j.
ScalarField to_field(const Array& a) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw ParameterError("expected a square 2D array");
    const int n = static_cast<int>(a.shape(0));
    return ScalarField(Grid2D::square(n), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const std::vector<double>& v, py::ssize_t rows, py::ssize_t cols) {
    Array out({rows, cols});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Array to_array(const ScalarField& f) { return to_array(f.values(), f.grid().ny, f.grid().nx); }

FanBeamData to_fan(const Array& a) {
    if (a.ndim() != 2) throw ParameterError("fan data must be a (nbeta, nalpha) array");
    FanBeamData d(FanGeometry{static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1))});
    std::copy(a.data(), a.data() + a.size(), d.values.begin());
    return d;
}

py::dict fan_result(const FanBeamData& d) {
    py::dict r;
    r["values"] = to_array(d.values, d.fan.nbeta, d.fan.nalpha);
    py::array_t<std::uint8_t> mask({d.fan.nbeta, d.fan.nalpha});
    std::copy(d.mask.begin(), d.mask.end(), mask.mutable_data());
    r["mask"] = mask;
    r["trapped"] = d.trapped;
    return r;
}

XrayOptions xray_options(double tol) { return {tol, 0.005, kDefaultTrapTime}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Radon and geodesic X-ray transforms on simple surfaces";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
    py::register_exception<SupportError>(m, "SupportError", base.ptr());
    py::register_exception<SimplicityError>(m, "SimplicityError", base.ptr());
    py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());

    py::class_<ConformalMetric>(m, "Metric")
        .def(py::init([](const std::string& spec) { return ConformalMetric::parse(spec); }), py::arg("spec"))
        .def_property_readonly("name", &ConformalMetric::name)
        .def_property_readonly("spec", &ConformalMetric::spec)
        .def_property_readonly("params", &ConformalMetric::params)
        .def("contains", [](const ConformalMetric& g, double x, double y) { return g.contains({x, y}); })
        .def("lam", [](const ConformalMetric& g, double x, double y) { return g.lambda({x, y}); })
        .def("curvature", [](const ConformalMetric& g, double x, double y) { return gaussian_curvature(g, {x, y}); })
        .def("__repr__", [](const ConformalMetric& g) { return "Metric('" + g.spec() + "')"; });

    m.def(
        "trace",
        [](const ConformalMetric& g, double x, double y, double theta, double t_max, double tol) {
            GeodesicPath p;
            {
                py::gil_scoped_release release;
                p = trace_geodesic(g, {{x, y}, theta}, t_max, tol);
            }
            std::vector<double> rows;
            for (const auto& s : p.samples) rows.insert(rows.end(), {s.t, s.x.x, s.x.y, s.theta});
            py::dict r;
            r["samples"] = to_array(rows, static_cast<py::ssize_t>(p.samples.size()), 4);
            r["exit_time"] = p.exit_time;
            r["trapped"] = p.trapped;
            return r;
        },
        py::arg("metric"), py::arg("x"), py::arg("y"), py::arg("theta"), py::arg("t_max") = kDefaultTrapTime,
        py::arg("tol") = 1e-10);
    m.def(
        "exit_time",
        [](const ConformalMetric& g, double x, double y, double theta, double t_max, double tol) {
            return exit_time(g, {{x, y}, theta}, t_max, tol);
        },
        py::arg("metric"), py::arg("x"), py::arg("y"), py::arg("theta"), py::arg("t_max") = kDefaultTrapTime,
        py::arg("tol") = 1e-10);
    m.def(
        "conjugate_time",
        [](const ConformalMetric& g, double x, double y, double theta, double t_max, double tol) {
            return conjugate_scan(g, {{x, y}, theta}, t_max, tol);
        },
        py::arg("metric"), py::arg("x"), py::arg("y"), py::arg("theta"), py::arg("t_max") = kDefaultTrapTime,
        py::arg("tol") = 1e-10);
    m.def(
        "simplicity_json",
        [](const ConformalMetric& g, int n_boundary, int n_angles) {
            py::gil_scoped_release release;
            return verify_simplicity(g, n_boundary, n_angles).to_json().dump();
        },
        py::arg("metric"), py::arg("n_boundary") = 32, py::arg("n_angles") = 32);

    m.def(
        "phantom",
        [](const std::string& spec, int n) {
            PhantomSpec s = PhantomSpec::parse(spec);
            s.grid = Grid2D::square(n);
            return to_array(generate(s));
        },
        py::arg("spec"), py::arg("n"));

    m.def(
        "radon_forward",
        [](const Array& f, int ns, int nomega) {
            const ScalarField field = to_field(f);
            Sinogram s;
            {
                py::gil_scoped_release release;
                s = radon_forward(field, ns, nomega, 0.5 * field.grid().dx());
            }
            return to_array(s.values, s.ns, s.nomega);
        },
        py::arg("f"), py::arg("ns") = 256, py::arg("nomega") = 360);
    m.def(
        "fbp",
        [](const Array& sino, int n, double S) {
            if (sino.ndim() != 2) throw ParameterError("sinogram must be an (ns, nomega) array");
            Sinogram s(static_cast<int>(sino.shape(0)), static_cast<int>(sino.shape(1)), S);
            std::copy(sino.data(), sino.data() + sino.size(), s.values.begin());
            ScalarField rec;
            {
                py::gil_scoped_release release;
                rec = fbp_invert(s, Grid2D::square(n));
            }
            return to_array(rec);
        },
        py::arg("sinogram"), py::arg("n"), py::arg("S") = 1.0);

    m.def(
        "xray_forward",
        [](const ConformalMetric& g, const Array& f, int nbeta, int nalpha, double tol) {
            const ScalarField field = to_field(f);
            FanBeamData d;
            {
                py::gil_scoped_release release;
                d = xray_forward(g, field, {nbeta, nalpha}, xray_options(tol));
            }
            return fan_result(d);
        },
        py::arg("metric"), py::arg("f"), py::arg("nbeta") = 90, py::arg("nalpha") = 90, py::arg("tol") = 1e-6);
    m.def(
        "xray_backproject",
        [](const ConformalMetric& g, const Array& h, int n, double tol) {
            const FanBeamData d = to_fan(h);
            ScalarField b;
            {
                py::gil_scoped_release release;
                b = xray_backproject(g, d, Grid2D::square(n), 2 * d.fan.nalpha, xray_options(tol));
            }
            return to_array(b);
        },
        py::arg("metric"), py::arg("h"), py::arg("n"), py::arg("tol") = 1e-6);
    m.def(
        "invert",
        [](const ConformalMetric& g, const Array& data, int n, int max_iter, double tol) {
            const FanBeamData d = to_fan(data);
            InversionOptions io;
            io.max_iter = max_iter;
            io.xray = xray_options(tol);
            InversionResult r;
            {
                py::gil_scoped_release release;
                r = invert_normal_cg(g, d, Grid2D::square(n), io);
            }
            py::dict out;
            out["f"] = to_array(r.f);
            out["residuals"] = r.residuals;
            out["iterations"] = r.iterations;
            out["converged"] = r.converged;
            return out;
        },
        py::arg("metric"), py::arg("data"), py::arg("n"), py::arg("max_iter") = 80, py::arg("tol") = 1e-6);

    m.def(
        "commutator_residuals",
        [](const ConformalMetric& g, int n, int ntheta, std::uint64_t seed) {
            py::gil_scoped_release release;
            const SMField u = SMField::from_function({n, ntheta, 1.0}, sm_bump_mixture(seed));
            const CommutatorResiduals r = commutator_residuals(g, u);
            return std::vector<double>{r.r1, r.r2, r.r3};
        },
        py::arg("metric"), py::arg("n") = 65, py::arg("ntheta") = 128, py::arg("seed") = 1);
    m.def(
        "pestov_residual",
        [](const ConformalMetric& g, int n, int ntheta, std::uint64_t seed) {
            py::gil_scoped_release release;
            return pestov_residual(g, SMField::from_function({n, ntheta, 1.0}, sm_bump_mixture(seed))).rel_residual;
        },
        py::arg("metric"), py::arg("n") = 65, py::arg("ntheta") = 128, py::arg("seed") = 1);
    m.def(
        "santalo_residual",
        [](const ConformalMetric& g, int n, int ntheta, int nfan, std::uint64_t seed) {
            py::gil_scoped_release release;
            const SMField w = SMField::from_function({n, ntheta, 1.0}, sm_bump_mixture(seed));
            return santalo_residual(g, w, {nfan, nfan}).rel_residual;
        },
        py::arg("metric"), py::arg("n") = 65, py::arg("ntheta") = 128, py::arg("nfan") = 90, py::arg("seed") = 1);

    m.def(
        "lightray_fubini",
        [](const ConformalMetric& g, const std::string& phantom, int nfan, int nsigma) {
            py::gil_scoped_release release;
            const SpacetimePotential q = generate_spacetime(PhantomSpec::parse(phantom));
            const XrayOptions xo = xray_options(1e-6);
            const double chord = xray_forward(g, [](Vec2) { return 1.0; }, {nfan, nfan}, xo).max_abs();
            SigmaGrid s = required_sigma_bounds(q, chord, nsigma);
            const double pad = 2.0 * s.step();
            s = {s.n, s.min - pad, s.max + pad};
            return sigma_fubini_check(g, q, {nfan, nfan}, s, xo).residual;
        },
        py::arg("metric"), py::arg("phantom") = "separable_spacetime:width=0.25,tc=0.5,tw=0.3",
        py::arg("nfan") = 16, py::arg("nsigma") = 200);

    m.def(
        "run_json",
        [](const std::string& command, const std::string& flags_json) {
            const cli::RunConfig cfg =
                cli::resolve(command, nlohmann::json::object(), nlohmann::json::parse(flags_json));
            cli::RunResult r;
            {
                py::gil_scoped_release release;
                r = cli::run(cfg);
            }
            return py::make_tuple(r.status, r.manifest.dump());
        },
        py::arg("command"), py::arg("flags_json") = "{}");
    m.def("commands", &cli::commands);
}
