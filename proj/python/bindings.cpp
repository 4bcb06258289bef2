#include <cdsolve/cdsolve.hpp>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cdsolve;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

template <class T, class A>
std::vector<T> to_vector(const A& a)
{
    if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
    const auto* p = a.data();
    std::vector<T> out(static_cast<std::size_t>(a.size()));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<T>(p[k]);
    return out;
}

std::optional<std::vector<double>> opt_doubles(const py::object& o)
{
    if (o.is_none()) return std::nullopt;
    return to_vector<double>(DoubleArray::ensure(o));
}

std::optional<std::vector<index_t>> opt_indices(const py::object& o)
{
    if (o.is_none()) return std::nullopt;
    const auto a = IndexArray::ensure(o);
    for (auto v : to_vector<std::int64_t>(a))
        if (v < 0) throw ProblemError(ProblemErrorKind::InvalidBlocks, "block boundaries must be nonnegative");
    return to_vector<index_t>(a);
}

// (rows, cols, indptr, indices, data) of a CSC matrix
std::optional<MatrixInput> opt_matrix(const py::object& o)
{
    if (o.is_none()) return std::nullopt;
    const auto t = o.cast<py::tuple>();
    const auto rows = t[0].cast<index_t>(), cols = t[1].cast<index_t>();
    auto indptr = to_vector<index_t>(IndexArray::ensure(t[2]));
    auto indices = to_vector<index_t>(IndexArray::ensure(t[3]));
    auto data = to_vector<double>(DoubleArray::ensure(t[4]));
    SparseColMatrix m(rows, cols, std::move(indptr), std::move(indices), std::move(data));
    return MatrixInput::from_sparse(std::move(m));
}

std::vector<std::string> atoms(const py::object& o)
{
    if (o.is_none()) return {};
    return o.cast<std::vector<std::string>>();
}

Problem make_problem(const py::dict& kw)
{
    auto get = [&](const char* k) -> py::object { return kw.contains(k) ? py::object(kw[k]) : py::none(); };
    ProblemInputs in;
    in.N = get("N").cast<index_t>();
    in.blocks = opt_indices(get("blocks"));
    in.blocks_f = opt_indices(get("blocks_f"));
    in.blocks_h = opt_indices(get("blocks_h"));
    in.f = atoms(get("f"));
    in.g = atoms(get("g"));
    in.h = atoms(get("h"));
    in.cf = opt_doubles(get("cf"));
    in.cg = opt_doubles(get("cg"));
    in.ch = opt_doubles(get("ch"));
    in.Af = opt_matrix(get("Af"));
    in.Ah = opt_matrix(get("Ah"));
    in.Q = opt_matrix(get("Q"));
    in.bf = opt_doubles(get("bf"));
    in.bg = opt_doubles(get("bg"));
    in.bh = opt_doubles(get("bh"));
    in.Dg = opt_doubles(get("Dg"));
    in.x_init = opt_doubles(get("x_init"));
    in.y_init = opt_doubles(get("y_init"));
    return build_problem(in);
}

SolveOptions make_options(const py::dict& kw)
{
    SolveOptions o;
    for (auto [key, value] : kw) {
        const auto k = key.cast<std::string>();
        if (value.is_none()) continue;
        if (k == "algo") {
            const auto a = parse_algorithm(value.cast<std::string>());
            if (!a) throw py::value_error("algo must be 'pdcd' or 'smartcd'");
            o.algo = *a;
        } else if (k == "sampling") {
            const auto s = parse_sampling(value.cast<std::string>());
            if (!s) throw py::value_error("sampling must be 'uniform' or 'kink_half'");
            o.sampling = *s;
        } else if (k == "max_iter") {
            o.max_iter = value.cast<std::uint64_t>();
        } else if (k == "max_time") {
            o.max_time = value.cast<double>();
        } else if (k == "tol") {
            o.tolerance = value.cast<double>();
        } else if (k == "print_period") {
            o.print_period = value.cast<std::uint64_t>();
        } else if (k == "seed") {
            o.seed = value.cast<std::uint64_t>();
        } else if (k == "safety") {
            o.safety = value.cast<double>();
        } else if (k == "sigma") {
            o.sigma = to_vector<double>(DoubleArray::ensure(value));
        } else if (k == "screening") {
            o.screening = value.cast<bool>();
        } else if (k == "screening_period") {
            o.screening_period = value.cast<std::uint64_t>();
        } else if (k == "refresh_period") {
            o.refresh_period = value.cast<std::uint64_t>();
        } else if (k == "gamma1") {
            o.gamma1 = value.cast<double>();
        } else if (k == "restart_period") {
            o.restart.period = value.cast<std::uint64_t>();
        } else if (k == "restart") {
            const auto kind = value.cast<std::string>();
            if (kind == "doubling") o.restart.kind = RestartPolicy::Kind::Doubling;
            else if (kind == "fixed") o.restart.kind = RestartPolicy::Kind::FixedPeriod;
            else throw py::value_error("restart must be 'doubling' or 'fixed'");
        } else if (k == "verbose") {
            o.verbose = value.cast<bool>();
        } else {
            throw py::type_error("unknown option '" + k + "'");
        }
    }
    return o;
}

py::array_t<double> to_array(const std::vector<double>& v)
{
    const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(v.size())};
    const std::vector<py::ssize_t> strides{static_cast<py::ssize_t>(sizeof(double))};
    return py::array_t<double>(shape, strides, v.data());
}

py::dict run(const Problem& pb, const py::dict& kw)
{
    const SolveOptions opts = make_options(kw);
    Result res;
    {
        py::gil_scoped_release release;
        res = solve(pb, opts);
    }
    py::dict trace;
    auto column = [&](const char* name, auto field) {
        std::vector<double> v;
        for (const auto& r : res.trace.records) v.push_back(static_cast<double>(r.*field));
        trace[name] = to_array(v);
    };
    column("epoch", &TraceRecord::epoch);
    column("elapsed", &TraceRecord::elapsed);
    column("objective", &TraceRecord::objective);
    column("gap", &TraceRecord::gap);
    column("beta", &TraceRecord::beta);
    column("gamma", &TraceRecord::gamma);
    column("infeasibility", &TraceRecord::infeasibility);
    column("screened", &TraceRecord::screened);

    py::dict out;
    out["x"] = to_array(res.x);
    out["y"] = to_array(res.y);
    out["trace"] = trace;
    out["status"] = std::string(to_string(res.status));
    out["iterations"] = res.iterations;
    out["screened"] = std::vector<index_t>(res.screened_blocks);
    out["warnings"] = res.warnings;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    py::register_exception<ProblemError>(m, "ProblemError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<Problem>(m, "_Problem")
        .def_readonly("N", &Problem::N)
        .def_property_readonly("n_blocks", &Problem::num_blocks)
        .def_readonly("warnings", &Problem::warnings)
        .def_property_readonly("duplication", [](const Problem& pb) { return pb.dup.total; });

    m.def("build", [](const py::dict& kw) { return make_problem(kw); });
    m.def("solve", &run);
    m.def("atoms", [] {
        std::vector<std::string> names;
        for (auto n : catalog_names()) names.emplace_back(n);
        return names;
    });
}
