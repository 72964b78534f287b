#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "nlab/biharmonic.hpp"
#include "nlab/errors.hpp"
#include "nlab/experiment.hpp"
#include "nlab/frequency.hpp"
#include "nlab/lift.hpp"
#include "nlab/nodal.hpp"

namespace py = pybind11;
using namespace nlab;

namespace {

using Point2 = std::pair<double, double>;
using Point3 = std::tuple<double, double, double>;

Vec2 to_vec(Point2 p) { return {p.first, p.second}; }
Vec3 to_vec(Point3 p) { return {std::get<0>(p), std::get<1>(p), std::get<2>(p)}; }

// Node values as an (ny, nx) array; exterior nodes hold 0.
py::array_t<double> field_array(const ScalarField2D& f) {
    const auto& g = f.grid();
    py::array_t<double> out({g.ny(), g.nx()});
    auto a = out.mutable_unchecked<2>();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) a(j, i) = f.at(i, j);
    return out;
}

py::dict profile_dict(const FrequencyProfile& p) {
    std::vector<double> r, nv, nb, hbar;
    for (const auto& rec : p.records) {
        r.push_back(rec.r);
        nv.push_back(rec.n_volume);
        nb.push_back(rec.n_boundary);
        hbar.push_back(rec.hbar);
    }
    py::dict d;
    d["r"] = r;
    d["n_volume"] = nv;
    d["n_boundary"] = nb;
    d["hbar"] = hbar;
    d["notes"] = p.notes;
    return d;
}

}  // namespace

PYBIND11_MODULE(_nodal_lab, m) {
    m.doc() = "Biharmonic eigenmodes, lifted-pair frequency and nodal-set measurements";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<GridError>(m, "GridError", base.ptr());
    py::register_exception<OutOfSupportError>(m, "OutOfSupportError", base.ptr());
    py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
    py::register_exception<SolverError>(m, "SolverError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::enum_<BCType>(m, "BCType").value("navier", BCType::navier).value("clamped", BCType::clamped);

    py::class_<Domain2D>(m, "Domain2D")
        .def_static("rectangle", [](double a, double b) { return Domain2D::rectangle(a, b); })
        .def_static("lshape", [](double a, double b, double c, double d) { return Domain2D::lshape(a, b, c, d); })
        .def_static("parse_text", &Domain2D::parse_text)
        .def_property_readonly("diameter", &Domain2D::diameter)
        .def_property_readonly("area", &Domain2D::area)
        .def("contains", [](const Domain2D& d, Point2 p) { return d.contains(to_vec(p)); })
        .def("distance_to_boundary", [](const Domain2D& d, Point2 p) { return d.distance_to_boundary(to_vec(p)); })
        .def("distance_to_gamma", [](const Domain2D& d, Point2 p) { return d.distance_to_gamma(to_vec(p)); });

    py::class_<Grid2D, std::shared_ptr<Grid2D>>(m, "Grid2D")
        .def_property_readonly("h", &Grid2D::h)
        .def_property_readonly("nx", &Grid2D::nx)
        .def_property_readonly("ny", &Grid2D::ny)
        .def_property_readonly("interior_count", &Grid2D::interior_count);
    m.def("build_grid", [](const Domain2D& d, double h) { return std::const_pointer_cast<Grid2D>(build_grid(d, h)); },
          py::arg("domain"), py::arg("h"));

    py::class_<ScalarField2D>(m, "ScalarField2D")
        .def_static(
            "sample",
            [](const std::shared_ptr<Grid2D>& g, const std::function<double(double, double)>& f) {
                return ScalarField2D::sample(g, [&f](Vec2 p) { return f(p.x, p.y); });
            },
            py::arg("grid"), py::arg("f"))
        .def("values", &field_array)
        .def("value", [](const ScalarField2D& f, Point2 p) { return f.value(to_vec(p)); })
        .def("bilinear", [](const ScalarField2D& f, Point2 p) { return f.bilinear(to_vec(p)); })
        .def_property_readonly("max_abs", &ScalarField2D::max_abs)
        .def_property_readonly("l2_norm", &ScalarField2D::l2_norm);

    py::class_<EigenPair>(m, "EigenPair")
        .def_readonly("lambda_", &EigenPair::lambda)
        .def_readonly("u", &EigenPair::u)
        .def_readonly("residual", &EigenPair::residual)
        .def_readonly("relative_residual", &EigenPair::relative_residual)
        .def_readonly("analytic", &EigenPair::analytic);

    m.def(
        "solve_modes",
        [](const Domain2D& d, double h, BCType bc, int count) {
            py::gil_scoped_release release;
            return solve_modes(assemble_operator(build_grid(d, h), bc), count);
        },
        py::arg("domain"), py::arg("h"), py::arg("bc"), py::arg("count"));
    m.def(
        "navier_mode",
        [](const Domain2D& d, int k, int l, double h) { return navier_modes_analytic(d, k, l, build_grid(d, h)); },
        py::arg("domain"), py::arg("k"), py::arg("l"), py::arg("h"));

    py::class_<LiftedPair>(m, "LiftedPair")
        .def_property_readonly("lambda_", &LiftedPair::lambda)
        .def_property_readonly("u", &LiftedPair::u)
        .def_property_readonly("v", &LiftedPair::v)
        .def("eval", [](const LiftedPair& lp, Point3 y) {
            const auto s = lp.eval(to_vec(y));
            return std::make_pair(s.g, s.h);
        });
    m.def("lift_pair", &lift_pair, py::arg("pair"));

    m.def(
        "frequency_profile",
        [](const LiftedPair& lp, Point3 center, const std::vector<double>& radii, int order) {
            return profile_dict(frequency_profile(lp, to_vec(center), radii, QuadratureSpec::with_order(order)));
        },
        py::arg("pair"), py::arg("center"), py::arg("radii"), py::arg("order") = 16);

    py::class_<NodalSet>(m, "NodalSet")
        .def_readonly("h", &NodalSet::h)
        .def_property_readonly("segment_count", &NodalSet::segment_count)
        .def_property_readonly("polylines", [](const NodalSet& ns) {
            std::vector<std::vector<Point2>> out;
            for (const auto& line : ns.polylines) {
                auto& o = out.emplace_back();
                for (Vec2 v : line) o.emplace_back(v.x, v.y);
            }
            return out;
        });
    m.def("extract_nodal", &extract_nodal, py::arg("field"), py::arg("threads") = 1);
    m.def(
        "nodal_length",
        [](const NodalSet& ns, std::optional<Point2> center, double radius) {
            return nodal_length(ns, center ? Region::ball(to_vec(*center), radius) : Region::whole());
        },
        py::arg("nodal"), py::arg("center") = py::none(), py::arg("radius") = 0.0);
    m.def(
        "crofton_length",
        [](const ScalarField2D& f, std::size_t lines, std::uint64_t seed, int threads) {
            const auto e = crofton_length(f, Region::whole(), lines, seed, threads);
            return std::make_pair(e.estimate, e.stderr_estimate);
        },
        py::arg("field"), py::arg("lines") = 10000, py::arg("seed") = 12345, py::arg("threads") = 1);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_static("parse_text", &ExperimentConfig::parse_text)
        .def_static("load", &ExperimentConfig::load)
        .def("to_text", &ExperimentConfig::to_text)
        .def("validate", &ExperimentConfig::validate)
        .def_readwrite("h", &ExperimentConfig::h)
        .def_readwrite("modes", &ExperimentConfig::modes)
        .def_readwrite("out", &ExperimentConfig::out)
        .def_readwrite("threads", &ExperimentConfig::threads)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def("__eq__", &ExperimentConfig::operator==);

    // Runs the verification suite; returns (exit code, [(id, pass, vacuous)]).
    m.def(
        "verify",
        [](const ExperimentConfig& c) {
            VerifyResult res;
            {
                py::gil_scoped_release release;
                res = cmd_verify(c);
            }
            std::vector<std::tuple<std::string, bool, bool>> rows;
            for (const auto& r : res.reports) rows.emplace_back(r.id, r.pass, r.vacuous);
            return std::make_pair(res.exit_code(), rows);
        },
        py::arg("config"));
}
