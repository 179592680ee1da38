#include "heightlab/cli.hpp"
#include "heightlab/greenfield.hpp"
#include "heightlab/heights.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace heightlab;

namespace {

Direction direction(const std::string& d) {
    if (d == "+" || d == "plus") return Direction::Plus;
    if (d == "-" || d == "minus") return Direction::Minus;
    throw py::value_error("direction must be '+' or '-'");
}

struct PyFamily {
    SurfaceFamily fam;
    HeightContext ctx;

    explicit PyFamily(const std::string& path) : fam(load_family(path)) {
        validate_family(fam);
        ctx = make_height_context(fam);
    }
    const MarkedSection& section(std::size_t k) const {
        if (k >= fam.sections.size()) throw py::index_error("section index");
        return fam.sections[k];
    }
};

py::dict height_dict(const HeightEstimate& h) {
    py::dict d;
    d["value"] = h.value;
    d["error_bound"] = h.error_bound;
    d["n_used"] = h.n_used;
    d["sequence"] = h.sequence;
    d["fitted_ratio"] = h.fitted_ratio;
    d["partial"] = h.partial;
    d["certified"] = h.certified;
    d["period"] = h.period ? py::cast(*h.period) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_heightlab, m) {
    m.doc() = "Canonical heights, stability and Green potentials for Wehler K3 families";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<MathError>(m, "MathError", PyExc_ArithmeticError);

    m.def(
        "run",
        [](const std::string& command, const std::string& family, int max_n, int max_period, int depth, int grid,
           double gap_eps, std::pair<double, double> radii, uint64_t seed, int threads, bool csv) {
            RunConfig c;
            c.command = parse_command(command);
            c.family_path = family;
            c.max_n = max_n;
            c.max_period = max_period;
            c.depth = depth;
            c.grid = grid;
            c.gap_eps = gap_eps;
            c.r1 = radii.first;
            c.r2 = radii.second;
            c.seed = seed;
            c.threads = threads;
            if (csv) c.output = "out.csv";
            RunResult r;
            {
                py::gil_scoped_release release;
                r = evaluate(c);
            }
            return py::make_tuple(r.exit_code, r.text, r.message);
        },
        py::arg("command"), py::arg("family"), py::arg("max_n") = 5, py::arg("max_period") = 12,
        py::arg("depth") = 10, py::arg("grid") = 512, py::arg("gap_eps") = 1e-3,
        py::arg("radii") = std::pair<double, double>{200, 2000}, py::arg("seed") = 1, py::arg("threads") = 1,
        py::arg("csv") = false, "Runs a CLI command; returns (exit_code, report_text, message).");

    m.def("commands", &command_names);

    m.def(
        "dynamical_degree",
        [](const std::vector<int>& word) { return dynamical_degree(compose_word(wehler_involutions(), word).map).to_double(); },
        py::arg("word"));

    py::class_<PyFamily>(m, "Family")
        .def(py::init<const std::string&>(), py::arg("path"))
        .def_property_readonly("lambda_", [](const PyFamily& f) { return f.ctx.lambda; })
        .def_property_readonly("word", [](const PyFamily& f) { return f.fam.word; })
        .def_property_readonly("num_sections", [](const PyFamily& f) { return f.fam.sections.size(); })
        .def("section_degrees",
             [](const PyFamily& f, std::size_t k) {
                 auto d = f.section(k).degrees();
                 return std::vector<long long>(d.begin(), d.end());
             })
        .def(
            "orbit_degrees",
            [](const PyFamily& f, std::size_t k, const std::string& dir, int max_n) {
                Orbit o;
                {
                    py::gil_scoped_release release;
                    o = compute_orbit(f.fam, f.section(k), direction(dir), max_n);
                }
                std::vector<std::vector<long long>> out;
                for (auto& r : o.records) out.push_back({r.degrees[0], r.degrees[1], r.degrees[2]});
                return out;
            },
            py::arg("section"), py::arg("direction") = "+", py::arg("max_n") = 3)
        .def(
            "canonical_height",
            [](const PyFamily& f, std::size_t k, const std::string& dir, int max_n) {
                HeightEstimate h;
                {
                    py::gil_scoped_release release;
                    h = canonical_height(f.fam, f.ctx, f.section(k), direction(dir), max_n);
                }
                return height_dict(h);
            },
            py::arg("section"), py::arg("direction") = "+", py::arg("max_n") = 3)
        .def(
            "classify",
            [](const PyFamily& f, std::size_t k, double gap_eps, int max_n, int max_period) {
                StabilityVerdict v;
                {
                    py::gil_scoped_release release;
                    v = classify(f.fam, f.ctx, f.section(k), gap_eps, max_n, max_period);
                }
                return v.str();
            },
            py::arg("section"), py::arg("gap_eps") = 1e-3, py::arg("max_n") = 3, py::arg("max_period") = 12)
        .def(
            "green_potential",
            [](const PyFamily& f, std::size_t k, std::complex<double> t, const std::string& dir, int depth) {
                auto g = make_green_context(f.ctx);
                auto ps = green_potential(f.fam, g, specialize(f.section(k), t), direction(dir), depth);
                py::dict d;
                d["u"] = ps.u;
                d["increments"] = ps.increments;
                d["fitted_ratio"] = ps.fitted_ratio;
                d["dropped"] = ps.dropped;
                return d;
            },
            py::arg("section"), py::arg("t"), py::arg("direction") = "+", py::arg("depth") = 12);
}
