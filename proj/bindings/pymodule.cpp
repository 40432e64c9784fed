#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpplab/experiments.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_dpplab, m) {
    m.doc() = "Ginibre point process simulation and Poisson approximation bounds";

    m.def(
        "void_probability", [](double r) { return dpplab::void_probability(r).value; },
        py::arg("r"), "P(no Ginibre point in the disk of radius r)");
    m.def("palm_void_probability", &dpplab::palm_void_probability, py::arg("v"),
          "void probability of the disk B_v under the Palm distribution at its center");
    m.def(
        "solve_vn",
        [](double n, double tau) {
            const dpplab::VnSolution s = dpplab::solve_vn(n, tau);
            py::dict d;
            d["n"] = s.n;
            d["tau"] = s.tau;
            d["v_n"] = s.v_n;
            d["residual"] = s.residual;
            d["asymptotic_ratio"] = s.asymptotic_ratio;
            return d;
        },
        py::arg("n"), py::arg("tau"), "radius with n^2 * palm_void(v) = tau");
    m.def(
        "theorem2_rate",
        [](double n, double epsilon, double C) {
            return dpplab::theorem2_rate(n, epsilon, C);
        },
        py::arg("n"), py::arg("epsilon"), py::arg("C"));
    m.def(
        "few_points_log_bound",
        [](double v) { return dpplab::few_points_log_bound(v).log_bound; }, py::arg("v"));
    m.def(
        "sample_ginibre",
        [](double R, uint64_t seed, uint64_t stream) {
            const dpplab::SpectralBasis basis = dpplab::ginibre_disk_basis(R, 1e-8);
            dpplab::RngStream rng(seed, stream);
            const dpplab::PointPattern p = dpplab::sample_dpp(basis, rng);
            std::vector<std::pair<double, double>> out;
            out.reserve(p.size());
            for (const auto& q : p.points) out.emplace_back(q.x, q.y);
            return out;
        },
        py::arg("R"), py::arg("seed"), py::arg("stream") = 0,
        "one Ginibre sample on the disk of radius R, as a list of (x, y)");
    m.def(
        "sample_disk_count",
        [](double r, uint64_t seed, uint64_t stream) {
            dpplab::RngStream rng(seed, stream);
            return dpplab::sample_kostlan_counts(r, rng);
        },
        py::arg("r"), py::arg("seed"), py::arg("stream") = 0,
        "Ginibre count of the disk of radius r via the radial law");
    m.def(
        "run_experiment",
        [](const std::string& config_path) {
            const dpplab::ExperimentReport rep =
                dpplab::run_experiment(dpplab::config_from_json_file(config_path));
            py::dict d;
            d["all_pass"] = rep.all_pass;
            d["report_json"] = rep.to_json();
            return d;
        },
        py::arg("config_path"));
}
