#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cechlab/complex.hpp"
#include "cechlab/experiments.hpp"
#include "cechlab/geometry.hpp"
#include "cechlab/homology.hpp"
#include "cechlab/point_process.hpp"
#include "cechlab/stabilization.hpp"

#include <algorithm>

namespace py = pybind11;
using namespace cechlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointSample to_sample(const Array& pts) {
    if (pts.ndim() != 2) throw std::invalid_argument("points must be an (n, d) array");
    const auto n = static_cast<std::size_t>(pts.shape(0));
    const int d = static_cast<int>(pts.shape(1));
    if (d < 1) throw std::invalid_argument("points need at least one coordinate");
    const double* data = pts.data();
    std::vector<double> lo(d, -1.0), hi(d, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            const double v = data[i * d + j];
            lo[j] = i == 0 ? v - 1.0 : std::min(lo[j], v - 1.0);
            hi[j] = i == 0 ? v + 1.0 : std::max(hi[j], v + 1.0);
        }
    PointSample s(d, Window::box(lo, hi));
    for (std::size_t i = 0; i < n; ++i) s.push_back(std::span<const double>(data + i * d, static_cast<std::size_t>(d)));
    return s;
}

Array to_array(const PointSample& s) {
    Array out({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.dim())});
    std::copy(s.coords().begin(), s.coords().end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_cechlab, m) {
    m.doc() = "Random Cech complexes: samplers, homology and experiments";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("sample_poisson", [](double intensity, int dim, double side, std::uint64_t seed) {
        return to_array(sample_homogeneous_poisson(intensity, Window::cube(dim, side), seed));
    }, py::arg("intensity"), py::arg("dim"), py::arg("side"), py::arg("seed"));

    m.def("sample_binomial", [](std::int64_t n, int dim, double side, std::uint64_t seed) {
        return to_array(sample_binomial(n, DensitySpec::uniform(Window::cube(dim, side)), seed));
    }, py::arg("n"), py::arg("dim"), py::arg("side"), py::arg("seed"));

    m.def("sample_ginibre", [](std::size_t n, std::uint64_t seed) {
        return to_array(sample_ginibre(n, seed, std::max(n, kDefaultGinibreCap)));
    }, py::arg("n"), py::arg("seed"));

    m.def("betti_numbers", [](const Array& pts, double r, int k_cap, std::uint32_t field) {
        return betti_numbers(build_cech(to_sample(pts), r, k_cap), FieldSpec{field}).betti;
    }, py::arg("points"), py::arg("r"), py::arg("k_cap") = 2, py::arg("field") = 2);

    m.def("simplex_counts", [](const Array& pts, double r, int k_cap) {
        return count_simplices(build_cech(to_sample(pts), r, k_cap)).counts;
    }, py::arg("points"), py::arg("r"), py::arg("k_cap") = 2);

    m.def("add_one_cost", [](const Array& pts, std::vector<double> x, double r, int k, std::uint32_t field) {
        const auto rec = add_one_cost(to_sample(pts), x, r, k, FieldSpec{field}, true);
        py::dict out;
        out["cost"] = rec.cost;
        out["local_count"] = rec.local_count;
        out["bound"] = rec.bound();
        return out;
    }, py::arg("points"), py::arg("x"), py::arg("r"), py::arg("k"), py::arg("field") = 2);

    m.def("vacant_components", [](const Array& pts, double r, double side, double cells_per_r) {
        auto s = to_sample(pts);
        const Window w = Window::cube(s.dim(), side);
        s.set_window(w);
        const auto c = vacant_component_count(s, r, w, cells_per_r);
        return py::make_tuple(c.bounded, c.touches_boundary);
    }, py::arg("points"), py::arg("r"), py::arg("side"), py::arg("cells_per_r") = 32.0);

    m.def("sphere_configuration", [](int k, int d, double r) {
        const auto c = build_sphere_configuration(k, d, r);
        PointSample s(d, Window::ball(d, 2 * r));
        for (const auto& p : c.points) s.push_back(p);
        py::dict out;
        out["points"] = to_array(s);
        out["epsilon"] = c.epsilon;
        out["c_star"] = c.c_star;
        out["ok"] = c.check.ok();
        out["betti"] = c.check.betti;
        return out;
    }, py::arg("k"), py::arg("d"), py::arg("r"));

    m.def("config_hash", &config_hash, py::arg("text"));

    m.def("run_experiment", [](const std::string& config, unsigned workers) {
        const auto cfg = parse_config(config);
        ExperimentResult r;
        {
            py::gil_scoped_release release;
            r = run_experiment(cfg, workers);
        }
        py::list checks;
        for (const auto& c : r.checks) {
            py::dict d;
            d["name"] = c.name;
            d["passed"] = c.passed;
            d["informational"] = c.informational;
            d["detail"] = c.detail;
            checks.append(d);
        }
        py::dict out;
        out["config_hash"] = cfg.hash;
        out["records_csv"] = records_csv(r);
        out["summary_csv"] = summary_csv(r);
        out["checks"] = checks;
        out["passed"] = r.passed();
        return out;
    }, py::arg("config"), py::arg("workers") = 1);
}
