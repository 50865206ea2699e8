// hlu: factorize, solve and precondition sparse systems from the shell.
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlu/hlu.hpp"
#include "hlu/trace.hpp"

using nlohmann::json;
using namespace hlu;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_not_converged = 2;
constexpr std::size_t trace_limit = 64;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Common {
    std::string gen;
    std::string mtx;
    double eps = 1e-4;
    std::string rule = "relsigma";
    std::size_t depth = 0;
    std::size_t target_leaf = 32;
    std::uint64_t seed = 0;
    std::string out = "json";
    std::string trace_path;
    bool instrument = false;
    std::string rhs = "random";
};

void add_common(CLI::App* app, Common& c, bool with_source = true) {
    if (with_source) {
        auto* g = app->add_option("--gen", c.gen, "Generator, e.g. poisson2d:64,64 or vcp:16,16,16,case=1");
        auto* m = app->add_option("--mtx", c.mtx, "Matrix Market file")->check(CLI::ExistingFile);
        g->excludes(m);
    }
    app->add_option("--eps", c.eps, "Low-rank truncation precision")->check(CLI::Range(1e-300, 1.0));
    app->add_option("--rule", c.rule, "Truncation rule")->check(CLI::IsMember({"relsigma", "frob"}));
    app->add_option("--depth", c.depth, "Tree depth (0: derive from --target-leaf)");
    app->add_option("--target-leaf", c.target_leaf, "Average leaf cluster size")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "Seed for partitioning and generators");
    app->add_option("--out", c.out, "Report format")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--trace", c.trace_path, "Write the step-by-step factorization trace (JSON) to this file");
    app->add_flag("--instrument", c.instrument, "Check distances of created edges and compression consistency");
}

FactorConfig factor_config(const Common& c) {
    FactorConfig cfg;
    cfg.epsilon = c.eps;
    cfg.rule = c.rule == "frob" ? TruncationKind::frobenius_global : TruncationKind::relative_sigma;
    cfg.depth = c.depth;
    cfg.target_leaf = c.target_leaf;
    cfg.seed = c.seed;
    cfg.instrumentation = c.instrument || !c.trace_path.empty();
    return cfg;
}

SparseMatrix load(const Common& c) {
    if (!c.gen.empty()) return generate(c.gen, c.seed);
    if (!c.mtx.empty()) return load_matrix_market(c.mtx);
    throw Error("one of --gen or --mtx is required");
}

struct Rhs {
    std::vector<double> b;
    std::vector<double> x;  // empty when unknown
};

Rhs make_rhs(const SparseMatrix& a, const Common& c) {
    Rhs r;
    if (c.rhs == "random") {
        auto m = manufactured_rhs(a, c.seed + 1);
        r.b = std::move(m.b);
        r.x = std::move(m.x);
    } else if (c.rhs == "ones") {
        r.b.assign(a.size(), 1.0);
    } else {
        std::ifstream in(c.rhs);
        if (!in) throw Error("cannot open right-hand side file " + c.rhs);
        double v = 0.0;
        while (in >> v) r.b.push_back(v);
        if (!in.eof()) throw ParseError("bad number in " + c.rhs);
        if (r.b.size() != a.size())
            throw ShapeError("right-hand side has " + std::to_string(r.b.size()) + " entries, expected " +
                             std::to_string(a.size()));
    }
    return r;
}

json matrix_json(const SparseMatrix& a, const Common& c) {
    return {{"source", c.gen.empty() ? "mtx:" + c.mtx : c.gen}, {"n", a.size()}, {"nonzeros", a.nonzeros()}};
}

void write_trace(const StepTrace& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << json{{"steps", tr.steps()}}.dump(1) << '\n';
}

void print_csv(const std::vector<std::pair<std::string, std::string>>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i].first;
    std::cout << '\n';
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i].second;
    std::cout << '\n';
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

int cmd_solve(const Common& c) {
    const SparseMatrix a = load(c);
    StepTrace tr;
    const auto t0 = Clock::now();
    Factorization f = factorize(a, factor_config(c), c.trace_path.empty() ? nullptr : &tr);
    const double t_factor = since(t0);
    if (!c.trace_path.empty()) write_trace(tr, c.trace_path);

    const Rhs rhs = make_rhs(a, c);
    const auto t1 = Clock::now();
    const std::vector<double> x = solve(f, rhs.b);
    const double t_solve = since(t1);

    json err = nullptr;
    if (!rhs.x.empty()) err = metrics(x, rhs.x, a, rhs.b).relative_error;
    const double res = relative_residual(a, x, rhs.b);
    if (c.out == "csv") {
        print_csv({{"n", std::to_string(a.size())},
                   {"eps", num(c.eps)},
                   {"depth", std::to_string(f.stats().depth)},
                   {"factor_time", num(t_factor)},
                   {"solve_time", num(t_solve)},
                   {"relative_error", err.is_null() ? "" : num(err.get<double>())},
                   {"relative_residual", num(res)},
                   {"auxiliary_variables", std::to_string(f.stats().auxiliary_variables)}});
        return exit_ok;
    }
    json report = {{"command", "solve"},
                   {"config", to_json(f.config())},
                   {"matrix", matrix_json(a, c)},
                   {"rhs", c.rhs},
                   {"factor_time", t_factor},
                   {"solve_time", t_solve},
                   {"relative_error", err},
                   {"relative_residual", res},
                   {"stats", to_json(f.stats())}};
    std::cout << report.dump(2) << '\n';
    return exit_ok;
}

int cmd_precond(const Common& c, const GmresConfig& g, const std::string& history_path) {
    const SparseMatrix a = load(c);
    StepTrace tr;
    const auto t0 = Clock::now();
    Factorization f = factorize(a, factor_config(c), c.trace_path.empty() ? nullptr : &tr);
    const double t_factor = since(t0);
    if (!c.trace_path.empty()) write_trace(tr, c.trace_path);

    const Rhs rhs = make_rhs(a, c);
    const auto t1 = Clock::now();
    GmresResult r = gmres_solve(as_operator(a), as_preconditioner(f), rhs.b, g);
    const double t_gmres = since(t1);

    if (!history_path.empty()) {
        std::ofstream out(history_path);
        if (!out) throw Error("cannot write " + history_path);
        out << history_csv(r);
    }
    json err = nullptr;
    if (!rhs.x.empty()) err = metrics(r.x, rhs.x, a, rhs.b).relative_error;
    const double res = relative_residual(a, r.x, rhs.b);
    if (c.out == "csv") {
        print_csv({{"n", std::to_string(a.size())},
                   {"factor_time", num(t_factor)},
                   {"gmres_time", num(t_gmres)},
                   {"total_time", num(t_factor + t_gmres)},
                   {"iterations", std::to_string(r.iterations)},
                   {"relative_error", err.is_null() ? "" : num(err.get<double>())},
                   {"status", to_string(r.status)}});
    } else {
        json report = {{"command", "precond"},
                       {"config", to_json(f.config())},
                       {"gmres",
                        {{"tol", g.tol},
                         {"max_iters", g.max_iters},
                         {"restart", g.restart ? json(*g.restart) : json(nullptr)}}},
                       {"matrix", matrix_json(a, c)},
                       {"rhs", c.rhs},
                       {"factor_time", t_factor},
                       {"gmres_time", t_gmres},
                       {"total_time", t_factor + t_gmres},
                       {"iterations", r.iterations},
                       {"status", to_string(r.status)},
                       {"preconditioned_residual", r.final_residual()},
                       {"relative_error", err},
                       {"relative_residual", res},
                       {"history", r.history},
                       {"stats", to_json(f.stats())}};
        std::cout << report.dump(2) << '\n';
    }
    return r.converged() ? exit_ok : exit_not_converged;
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t k = x.size();
    if (k < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

int cmd_scaling(const Common& c, const std::vector<std::string>& ladder) {
    json rows = json::array();
    std::vector<double> ns, tf;
    if (c.out == "csv") std::cout << "n,depth,factor_time,solve_time,relative_residual\n";
    for (const std::string& spec : ladder) {
        Common one = c;
        one.gen = spec;
        const SparseMatrix a = load(one);
        const auto t0 = Clock::now();
        Factorization f = factorize(a, factor_config(one));
        const double t_factor = since(t0);
        const Rhs rhs = make_rhs(a, one);
        const auto t1 = Clock::now();
        const std::vector<double> x = solve(f, rhs.b);
        const double t_solve = since(t1);
        const double res = relative_residual(a, x, rhs.b);
        ns.push_back(double(a.size()));
        tf.push_back(t_factor);
        if (c.out == "csv") {
            std::cout << a.size() << ',' << f.stats().depth << ',' << num(t_factor) << ',' << num(t_solve) << ','
                      << num(res) << '\n';
        }
        rows.push_back({{"source", spec},
                        {"n", a.size()},
                        {"depth", f.stats().depth},
                        {"factor_time", t_factor},
                        {"solve_time", t_solve},
                        {"relative_residual", res},
                        {"times", to_json(f.stats())["times"]}});
    }
    if (c.out == "json") {
        FactorConfig cfg = factor_config(c);
        std::cout << json{{"command", "scaling"},
                          {"config", to_json(cfg)},
                          {"rows", rows},
                          {"factor_time_slope", loglog_slope(ns, tf)}}
                         .dump(2)
                  << '\n';
    }
    return exit_ok;
}

int cmd_trace(const Common& c, bool dot) {
    const SparseMatrix a = load(c);
    if (a.size() > trace_limit)
        throw Error("trace is limited to n <= " + std::to_string(trace_limit) + " (got " + std::to_string(a.size()) +
                    ")");
    FactorConfig cfg = factor_config(c);
    cfg.instrumentation = true;
    StepTrace tr;
    Factorization f = factorize(a, cfg, &tr);
    if (dot) {
        for (const std::string& d : tr.dots()) std::cout << d;
        return exit_ok;
    }
    json report = {{"command", "trace"},
                   {"config", to_json(f.config())},
                   {"matrix", matrix_json(a, c)},
                   {"partitioning", partitioning_json(f.tree().partitioning())},
                   {"summary", tr.summary()},
                   {"steps", tr.steps()}};
    std::cout << report.dump(1) << '\n';
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    // HLU_THREADS is reserved for a future parallel build and ignored.
    CLI::App app{"Hierarchical LU with extended sparsification"};
    app.require_subcommand(1);

    Common c;
    auto* solve_cmd = app.add_subcommand("solve", "Factorize and solve once");
    add_common(solve_cmd, c);
    solve_cmd->add_option("--rhs", c.rhs, "random (manufactured solution), ones, or a file of n numbers");

    Common pc;
    GmresConfig g;
    std::size_t restart = 0;
    std::string history_path;
    auto* pre_cmd = app.add_subcommand("precond", "Factorize and use as a GMRES preconditioner");
    add_common(pre_cmd, pc);
    pre_cmd->add_option("--rhs", pc.rhs, "random (manufactured solution), ones, or a file of n numbers");
    pre_cmd->add_option("--tol", g.tol, "Preconditioned residual tolerance")->check(CLI::PositiveNumber);
    pre_cmd->add_option("--max-iters", g.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
    pre_cmd->add_option("--restart", restart, "Restart length (0: none)");
    pre_cmd->add_option("--history", history_path, "Write the residual history as CSV");

    Common sc;
    std::vector<std::string> ladder;
    auto* scale_cmd = app.add_subcommand("scaling", "Time a ladder of problem sizes");
    add_common(scale_cmd, sc, false);
    scale_cmd->add_option("--gen", ladder, "Generator per ladder rung (repeatable)")->required();

    Common tc;
    bool dot = false;
    auto* trace_cmd = app.add_subcommand("trace", "Step-by-step factorization dump of a tiny instance");
    add_common(trace_cmd, tc);
    trace_cmd->add_flag("--dot", dot, "Emit one DOT graph per step instead of JSON");

    CLI11_PARSE(app, argc, argv);
    if (restart > 0) g.restart = restart;

    try {
        if (*solve_cmd) return cmd_solve(c);
        if (*pre_cmd) return cmd_precond(pc, g, history_path);
        if (*scale_cmd) return cmd_scaling(sc, ladder);
        if (*trace_cmd) return cmd_trace(tc, dot);
    } catch (const std::exception& e) {
        std::cerr << "hlu: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
