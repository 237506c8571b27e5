#include "cli.hpp"

#include "certheat/hardness.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

namespace py = pybind11;
using namespace certheat;

namespace {

CountingInstance instance(std::vector<long> weights, long target) { return {std::move(weights), target}; }

py::dict record(const BlowupRecord& r) {
    py::dict d;
    d["pipeline"] = to_string(r.pipeline);
    d["n_vars"] = r.n_vars;
    d["precision_bits"] = r.precision_bits;
    d["wall_ms"] = r.wall_ms;
    d["value"] = r.value;
    d["count"] = r.count;
    d["ok"] = r.ok;
    d["error"] = r.error;
    return d;
}

}  // namespace

PYBIND11_MODULE(_certheat, m) {
    m.doc() = "certified Laplace and heat solvers";

    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<InsufficientPrecision>(m, "InsufficientPrecision", PyExc_ArithmeticError);

    m.def("solve_json", &cli::solve_json, py::arg("config"), py::arg("bits") = py::none(),
          py::call_guard<py::gil_scoped_release>());

    m.def("parse_rational", [](const std::string& text) {
        Rational q = cli::parse_rational(text);
        return std::pair{numerator(q).str(), denominator(q).str()};
    });
    m.def("decimal_rendering", [](const std::string& value, long bits) {
        return cli::decimal_rendering(cli::parse_rational(value), bits);
    });

    m.def("verify", [](const std::string& suite, std::uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& c : cli::run_suite(suite, seed)) out.emplace_back(c.name, c.ok, c.detail);
        return out;
    }, py::arg("suite") = "all", py::arg("seed") = 1);

    m.def("brute_force_count", [](std::vector<long> weights, long target, unsigned threads) {
        return brute_force_count(instance(std::move(weights), target), threads);
    }, py::arg("weights"), py::arg("target"), py::arg("threads") = 1);

    m.def("run_pipeline", [](std::vector<long> weights, long target, const std::string& pipeline, long precision) {
        auto r = run_pipeline(instance(std::move(weights), target), parse_pipeline(pipeline), precision);
        py::dict d;
        d["value"] = r.integral.approx().str();
        d["error_exponent"] = r.integral.err_exponent();
        d["count"] = r.count;
        d["precision_bits"] = r.precision_bits;
        return d;
    }, py::arg("weights"), py::arg("target"), py::arg("pipeline") = "neumann", py::arg("precision") = -1);

    m.def("blowup", [](const std::string& pipeline, long min_vars, long max_vars, std::uint64_t seed, int runs) {
        std::mt19937_64 rng(seed);
        std::vector<CountingInstance> family;
        for (long nv = min_vars; nv <= max_vars; ++nv) family.push_back(random_instance(nv, rng));
        py::list out;
        for (const auto& r : measure_blowup(family, parse_pipeline(pipeline), runs)) out.append(record(r));
        return out;
    }, py::arg("pipeline"), py::arg("min_vars"), py::arg("max_vars"), py::arg("seed") = 1, py::arg("runs") = 1);

    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "certheat");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return std::tuple{code, out.str(), err.str()};
    });
}
