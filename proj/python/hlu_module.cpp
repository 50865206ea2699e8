#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "hlu/core.hpp"
#include "hlu/error.hpp"
#include "hlu/factor.hpp"
#include "hlu/krylov.hpp"
#include "hlu/problems.hpp"
#include "hlu/solve.hpp"
#include "hlu/trace.hpp"

namespace py = pybind11;
using namespace hlu;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a, std::size_t n, const char* what) {
    if (a.ndim() != 1 || std::size_t(a.shape(0)) != n)
        throw ShapeError(std::string(what) + " must be a 1-d array of length " + std::to_string(n));
    return {a.data(), n};
}

Array to_array(const std::vector<double>& v) {
    Array out(py::ssize_t(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

TruncationKind parse_rule(const std::string& s) {
    if (s == "relsigma") return TruncationKind::relative_sigma;
    if (s == "frob") return TruncationKind::frobenius_global;
    throw Error("rule must be 'relsigma' or 'frob'");
}

// Keeps the matrix alive for as long as the factorization is referenced
// from Python, and gives every Python-side solve its own session.
struct PyFactorization {
    std::shared_ptr<const SparseMatrix> matrix;
    std::shared_ptr<const Factorization> f;

    Array solve(const Array& b) const {
        auto in = view(b, f->size(), "b");
        std::vector<double> x(f->size());
        {
            py::gil_scoped_release unlock;
            SolveSession s(*f);
            s.solve(in, x);
        }
        return to_array(x);
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hierarchical LU factorization with extended sparsification";

    // Translators run newest first: the base class goes in first.
    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<SingularPivot>(m, "SingularPivot", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<SparseMatrix, std::shared_ptr<SparseMatrix>>(m, "SparseMatrix")
        .def(py::init([](std::size_t n, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
                         const std::vector<double>& values) {
                 if (rows.size() != cols.size() || rows.size() != values.size())
                     throw ShapeError("rows, cols and values must have equal length");
                 std::vector<Entry> e(rows.size());
                 for (std::size_t k = 0; k < e.size(); ++k) e[k] = {rows[k], cols[k], values[k]};
                 return std::make_shared<SparseMatrix>(n, std::move(e));
             }),
             py::arg("n"), py::arg("rows"), py::arg("cols"), py::arg("values"),
             "Square matrix from coordinate triplets; duplicates are summed.")
        .def_property_readonly("size", &SparseMatrix::size)
        .def_property_readonly("nonzeros", &SparseMatrix::nonzeros)
        .def("matvec", [](const SparseMatrix& a, const Array& x) { return to_array(a.multiply(view(x, a.size(), "x"))); })
        .def("to_dense",
             [](const SparseMatrix& a) {
                 py::array_t<double> out({py::ssize_t(a.size()), py::ssize_t(a.size())});
                 auto d = a.to_dense();
                 for (std::size_t i = 0; i < a.size(); ++i)
                     for (std::size_t j = 0; j < a.size(); ++j) out.mutable_at(i, j) = d(i, j);
                 return out;
             })
        .def("is_symmetric", &SparseMatrix::is_symmetric)
        .def("__repr__", [](const SparseMatrix& a) {
            return "<SparseMatrix n=" + std::to_string(a.size()) + " nnz=" + std::to_string(a.nonzeros()) + ">";
        });

    m.def(
        "generate", [](const std::string& spec, std::uint64_t seed) { return std::make_shared<SparseMatrix>(generate(spec, seed)); },
        py::arg("spec"), py::arg("seed") = 0, "Build a test matrix from a spec such as 'poisson2d:64'.");
    m.def(
        "load_matrix_market", [](const std::string& path) { return std::make_shared<SparseMatrix>(load_matrix_market(path)); },
        py::arg("path"));
    m.def(
        "manufactured_rhs",
        [](const SparseMatrix& a, std::uint64_t seed) {
            auto r = manufactured_rhs(a, seed);
            return py::make_tuple(to_array(r.b), to_array(r.x));
        },
        py::arg("matrix"), py::arg("seed") = 0, "Returns (b, x) with x uniform in [-1, 1) and b = A x.");

    py::class_<PyFactorization>(m, "Factorization")
        .def("solve", &PyFactorization::solve, py::arg("b"))
        .def_property_readonly("size", [](const PyFactorization& p) { return p.f->size(); })
        .def_property_readonly("stats", [](const PyFactorization& p) { return to_python(to_json(p.f->stats())); })
        .def_property_readonly("config", [](const PyFactorization& p) { return to_python(to_json(p.f->config())); });

    m.def(
        "factorize",
        [](std::shared_ptr<SparseMatrix> a, double epsilon, const std::string& rule, std::size_t depth,
           std::size_t target_leaf, std::uint64_t seed, bool instrumentation) {
            FactorConfig cfg;
            cfg.epsilon = epsilon;
            cfg.rule = parse_rule(rule);
            cfg.depth = depth;
            cfg.target_leaf = target_leaf;
            cfg.seed = seed;
            cfg.instrumentation = instrumentation;
            std::shared_ptr<const Factorization> f;
            {
                py::gil_scoped_release unlock;
                f = std::make_shared<const Factorization>(factorize(*a, cfg));
            }
            return PyFactorization{a, f};
        },
        py::arg("matrix"), py::kw_only(), py::arg("epsilon") = 1e-4, py::arg("rule") = "relsigma",
        py::arg("depth") = 0, py::arg("target_leaf") = 32, py::arg("seed") = 0, py::arg("instrumentation") = false);

    m.def(
        "gmres",
        [](const SparseMatrix& a, const Array& b, const PyFactorization* pre, double tol, std::size_t max_iters,
           std::optional<std::size_t> restart) {
            GmresConfig cfg;
            cfg.tol = tol;
            cfg.max_iters = max_iters;
            cfg.restart = restart;
            auto rhs = view(b, a.size(), "b");
            if (pre && pre->f->size() != a.size()) throw ShapeError("preconditioner size does not match the matrix");
            GmresResult r;
            {
                py::gil_scoped_release unlock;
                r = gmres_solve(as_operator(a), pre ? as_preconditioner(*pre->f) : identity_operator(), rhs, cfg);
            }
            py::dict out;
            out["x"] = to_array(r.x);
            out["status"] = to_string(r.status);
            out["iterations"] = r.iterations;
            out["history"] = r.history;
            return out;
        },
        py::arg("matrix"), py::arg("b"), py::arg("preconditioner") = nullptr, py::kw_only(), py::arg("tol") = 1e-14,
        py::arg("max_iters") = 500, py::arg("restart") = py::none(),
        "Left-preconditioned GMRES from x0 = 0. Returns a dict with x, status, iterations, history.");

    m.def(
        "relative_residual",
        [](const SparseMatrix& a, const Array& x, const Array& b) {
            return relative_residual(a, view(x, a.size(), "x"), view(b, a.size(), "b"));
        },
        py::arg("matrix"), py::arg("x"), py::arg("b"));
}
