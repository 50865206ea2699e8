// Acceptance run: one PASS/FAIL line per criterion. Thresholds are fixed
// here and nowhere else.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlu/dense.hpp"
#include "hlu/error.hpp"
#include "hlu/factor.hpp"
#include "hlu/krylov.hpp"
#include "hlu/problems.hpp"
#include "hlu/solve.hpp"
#include "hlu/trace.hpp"
#include "kernel_props.hpp"
#include "oracles.hpp"

using namespace hlu;

namespace {

namespace limits {
constexpr int oracle_instances = 50;
constexpr std::size_t oracle_max_n = 512;
constexpr double oracle_epsilon = 1e-14;
constexpr double oracle_error = 1e-8;
constexpr double extension_error = 1e-12;
constexpr std::size_t max_created_distance = 2;
constexpr double residual_slack = 100.0;
constexpr double standalone_residual = 1e-6;
constexpr double precond_epsilon = 1e-1;
constexpr double gmres_tol = 1e-14;
constexpr std::size_t precond_iterations = 25;
constexpr double precond_error = 1e-8;
constexpr double scaling_slope = 1.3;
constexpr double indefinite_epsilon = 1e-3;
constexpr double indefinite_residual = 1e-10;
constexpr std::size_t indefinite_iterations = 200;
constexpr double indefinite_agreement = 100.0;
constexpr int kernel_cases = 1000;
}  // namespace limits

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

FactorConfig config(double eps, std::size_t target_leaf = 32, std::uint64_t seed = 0) {
    FactorConfig c;
    c.epsilon = eps;
    c.target_leaf = target_leaf;
    c.seed = seed;
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Near-exact factorization agrees with dense LU.
Outcome oracle_equivalence() {
    double worst = 0.0;
    std::string worst_name;
    for (int k = 0; k < limits::oracle_instances; ++k) {
        std::string gen;
        switch (k % 3) {
            case 0: gen = "randdd:" + std::to_string(64 + (k * 37) % 449) + ",6,seed=" + std::to_string(k); break;
            case 1: gen = "poisson2d:" + std::to_string(6 + k % 17); break;
            default: gen = "poisson3d:" + std::to_string(4 + k % 5); break;
        }
        SparseMatrix m = generate(gen);
        if (m.size() > limits::oracle_max_n) throw hlu::Error("instance too large: " + gen);
        const std::size_t leaf = std::size_t{8} << (k % 3);
        Factorization f = factorize(m, config(limits::oracle_epsilon, leaf, std::uint64_t(k)));
        const auto b = random_vector(m.size(), 1000 + k);
        const double err = oracle::rel_diff(solve(f, b), oracle::solve(oracle::densify(m), b));
        if (!(err <= worst)) {
            worst = err;
            worst_name = gen;
        }
    }
    return {worst <= limits::oracle_error,
            std::to_string(limits::oracle_instances) + " instances, max relative error " + fmt("%.2e", worst) +
                " (" + worst_name + ")"};
}

// 2a. The three-block example: eliminate x1, replace D = U K V^T by the
// extended system, eliminate the auxiliary pairs from the right.
double literal_extension_error(std::mt19937_64& rng) {
    const std::size_t n1 = 3, n2 = 4, n3 = 5;
    oracle::Mat s = oracle::random_dominant(n1, rng);
    s = oracle::matmul(oracle::transpose(s), s);  // SPD
    const oracle::Mat b = oracle::random_matrix(n1, n2, rng), c = oracle::random_matrix(n1, n3, rng);
    oracle::Mat p = oracle::random_dominant(n2, rng), q = oracle::random_dominant(n3, rng);
    p = oracle::matmul(oracle::transpose(p), p);
    q = oracle::matmul(oracle::transpose(q), q);
    const oracle::Mat sib = oracle::solve(s, b), sic = oracle::solve(s, c);
    const oracle::Mat bt = oracle::transpose(b), ct = oracle::transpose(c);
    oracle::Mat d = oracle::matmul(bt, sic);
    for (auto& row : d)
        for (double& v : row) v = -v;
    oracle::Mat p1 = p, q1 = q;
    const oracle::Mat pb = oracle::matmul(bt, sib), qc = oracle::matmul(ct, sic);
    for (std::size_t i = 0; i < n2; ++i)
        for (std::size_t j = 0; j < n2; ++j) p1[i][j] -= pb[i][j];
    for (std::size_t i = 0; i < n3; ++i)
        for (std::size_t j = 0; j < n3; ++j) q1[i][j] -= qc[i][j];

    // Reduced system [[P', D], [D^T, Q']].
    const std::size_t nr = n2 + n3;
    oracle::Mat reduced = oracle::zeros(nr, nr);
    for (std::size_t i = 0; i < n2; ++i)
        for (std::size_t j = 0; j < n2; ++j) reduced[i][j] = p1[i][j];
    for (std::size_t i = 0; i < n3; ++i)
        for (std::size_t j = 0; j < n3; ++j) reduced[n2 + i][n2 + j] = q1[i][j];
    for (std::size_t i = 0; i < n2; ++i)
        for (std::size_t j = 0; j < n3; ++j) reduced[i][n2 + j] = reduced[n2 + j][i] = d[i][j];

    // Full-rank D = U K V^T.
    const Svd f = svd(oracle::to_dense(d));
    const std::size_t r = f.sigma.size();
    // Unknown order x2, x3, z2, z3, y2, y3.
    const std::size_t ox3 = n2, oz2 = nr, oz3 = oz2 + r, oy2 = oz3 + r, oy3 = oy2 + r, ne = oy3 + r;
    oracle::Mat e = oracle::zeros(ne, ne);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nr; ++j)
            if ((i < n2) == (j < n2)) e[i][j] = reduced[i][j];
    for (std::size_t i = 0; i < n2; ++i)
        for (std::size_t k = 0; k < r; ++k) e[i][oz2 + k] = e[oz2 + k][i] = f.u(i, k);
    for (std::size_t i = 0; i < n3; ++i)
        for (std::size_t k = 0; k < r; ++k) e[ox3 + i][oz3 + k] = e[oz3 + k][ox3 + i] = f.v(i, k);
    for (std::size_t k = 0; k < r; ++k) {
        e[oz2 + k][oy2 + k] = e[oz3 + k][oy3 + k] = -1.0;
        e[oy2 + k][oz2 + k] = e[oy3 + k][oz3 + k] = -1.0;
        e[oy2 + k][oy3 + k] = f.sigma[k];  // K
        e[oy3 + k][oy2 + k] = f.sigma[k];  // K^T
    }
    const oracle::Mat back = oracle::eliminate_from_right(e, {n2, n3, 2 * r, 2 * r}, 2);
    return oracle::frob_diff(back, reduced);
}

// 2b. The same statement for the library's own compress step: eliminate
// s3_0 on a ring of four super nodes, compress s3_1 at full rank.
double library_extension_error() {
    HTree t(generate("ring:16"), oracle::contiguous(16, 3));
    FactorConfig cfg = config(limits::oracle_epsilon);
    cfg.depth = 3;
    FactorEngine e(t, cfg);
    e.merge_level(3);
    e.eliminate_node(t.super_node(3, 0));
    e.eliminate_node(t.black(3, 0));
    const NodeId s = t.super_node(3, 1), b = t.black(3, 1), pb = t.node(b).parent;
    auto order = [&] {
        std::vector<NodeId> ids;
        for (NodeId v : t.active_nodes())
            if (v != b && v != pb) ids.push_back(v);
        ids.push_back(b);
        ids.push_back(pb);
        return ids;
    };
    const oracle::Mat before = oracle::from(t.dense_system(order()));
    const CompressionRecord rec = e.compress_super_node(s);
    if (rec.partners.empty() || rec.rank == 0) throw hlu::Error("expected a compression of s3_1");
    const oracle::Mat ext = oracle::from(t.dense_system(order()));
    return oracle::frob_diff(oracle::eliminate_from_right(ext, {before.size(), 2 * rec.rank}, 1), before);
}

Outcome exact_extension() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) worst = std::max(worst, literal_extension_error(rng));
    const double lib = library_extension_error();
    return {worst <= limits::extension_error && lib <= limits::extension_error,
            "three-block example max " + fmt("%.2e", worst) + " over 20 draws, library compress step " +
                fmt("%.2e", lib)};
}

// 3. No interaction edge is ever created between nodes more than two apart.
Outcome edge_distance_bound() {
    const char* problems[] = {"poisson2d:32",      "poisson2d:64",      "poisson3d:12",        "vcp:12,case=1",
                              "vcp:12,case=2",     "vcp:12,case=3",     "advdiff:10,R=50",     "advdiff2d:32,R=10",
                              "randdd:500,6",      "ring:64",           "path:64",             "identity:64",
                              "poisson2d:20,periodic=1", "vcp2d:32,case=3"};
    std::size_t checks = 0, violations = 0, runs = 0, max_dist = 0;
    for (const char* p : problems)
        for (double eps : {1e-1, 1e-2, 1e-4, 1e-8})
            for (std::size_t leaf : {8, 32}) {
                FactorConfig cfg = config(eps, leaf);
                cfg.instrumentation = true;
                Factorization f = factorize(generate(p), cfg);
                checks += f.stats().distance_checks;
                violations += f.stats().distance_violations;
                max_dist = std::max(max_dist, f.stats().max_created_distance);
                ++runs;
            }
    return {violations == 0 && checks > 0 && max_dist <= limits::max_created_distance,
            std::to_string(runs) + " factorizations, " + std::to_string(checks) + " created edges checked, " +
                std::to_string(violations) + " violations, max distance " + std::to_string(max_dist)};
}

// 4. Residual tracks the truncation threshold.
Outcome residual_tracks_epsilon() {
    bool ok = true;
    std::string detail;
    for (const char* p : {"poisson3d:16", "poisson2d:64"}) {
        SparseMatrix m = generate(p);
        ManufacturedRhs r = manufactured_rhs(m, 7);
        double prev = INFINITY;
        detail += std::string(detail.empty() ? "" : "; ") + p + ":";
        for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
            Factorization f = factorize(m, config(eps));
            const double res = relative_residual(m, solve(f, r.b), r.b);
            ok = ok && res < prev && res <= limits::residual_slack * eps;
            prev = res;
            detail += " " + fmt("%.1e", res) + fmt("(%.2fe)", res / eps);
        }
    }
    return {ok, detail};
}

// 5. Stand-alone solver accuracy on 2D Poisson.
Outcome standalone_accuracy() {
    SparseMatrix m = generate("poisson2d:128");
    ManufacturedRhs r = manufactured_rhs(m, 5);
    Factorization f = factorize(m, config(1e-4));
    const double res = relative_residual(m, solve(f, r.b), r.b);
    return {res < limits::standalone_residual, "poisson2d:128, eps 1e-4, relative residual " + fmt("%.2e", res)};
}

GmresResult precond_run(const SparseMatrix& m, const std::vector<double>& b, double eps, double tol,
                        std::size_t max_iters, double* compression = nullptr) {
    Factorization f = factorize(m, config(eps));
    GmresConfig g;
    g.tol = tol;
    g.max_iters = max_iters;
    if (compression) {
        double lo = 1.0, hi = 0.0;
        for (const auto& ls : f.stats().levels)
            if (ls.compressed > 0) {
                lo = std::min(lo, ls.compression_ratio);
                hi = std::max(hi, ls.compression_ratio);
            }
        compression[0] = lo;
        compression[1] = hi;
    }
    return gmres_solve(as_operator(m), as_preconditioner(f), b, g);
}

// 6. Preconditioned GMRES on variable-coefficient Poisson, cases 1 and 2.
Outcome preconditioned_gmres() {
    bool ok = true;
    std::string detail;
    for (int c : {1, 2}) {
        SparseMatrix m = generate("vcp:16,case=" + std::to_string(c));
        ManufacturedRhs r = manufactured_rhs(m, 11);
        GmresResult g = precond_run(m, r.b, limits::precond_epsilon, limits::gmres_tol, 500);
        const double err = oracle::rel_diff(g.x, r.x);
        ok = ok && g.converged() && g.iterations <= limits::precond_iterations && err <= limits::precond_error;
        detail += std::string(detail.empty() ? "" : "; ") + "case " + std::to_string(c) + ": " +
                  std::to_string(g.iterations) + " iterations, " + to_string(g.status) + ", error " +
                  fmt("%.2e", err);
    }
    return {ok, detail};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

// 7. Factorization time grows linearly on the 2D Poisson ladder.
Outcome linear_scaling() {
    std::vector<double> ns, times;
    std::string detail;
    for (std::size_t side : {64, 128, 256, 512}) {
        SparseMatrix m = generate("poisson2d:" + std::to_string(side));
        const int repeats = side <= 128 ? 3 : 1;
        double best = INFINITY;
        for (int k = 0; k < repeats; ++k) {
            const auto t0 = std::chrono::steady_clock::now();
            Factorization f = factorize(m, config(1e-4));
            best = std::min(best, seconds_since(t0));
        }
        ns.push_back(double(m.size()));
        times.push_back(best);
        detail += std::to_string(m.size()) + ":" + fmt("%.2fs", best) + " ";
    }
    const double slope = loglog_slope(ns, times);
    return {slope <= limits::scaling_slope, detail + "slope " + fmt("%.3f", slope)};
}

// 8. Indefinite case 3: convergence and agreement of true and preconditioned residuals.
Outcome indefinite_robustness() {
    SparseMatrix m = generate("vcp:16,case=3");
    ManufacturedRhs r = manufactured_rhs(m, 13);
    double ratio[2] = {0, 0};
    GmresResult g = precond_run(m, r.b, limits::indefinite_epsilon, limits::indefinite_residual,
                                limits::indefinite_iterations, ratio);
    const double pre = g.final_residual();
    const double tru = relative_residual(m, g.x, r.b);
    const double agree = std::max(tru / pre, pre / tru);
    const bool ok = g.converged() && pre <= limits::indefinite_residual &&
                    g.iterations <= limits::indefinite_iterations && agree <= limits::indefinite_agreement;
    return {ok, std::to_string(g.iterations) + " iterations, preconditioned " + fmt("%.2e", pre) + ", true " +
                    fmt("%.2e", tru) + ", compression ratio " + fmt("%.2f", ratio[0]) + ".." + fmt("%.2f", ratio[1])};
}

// 9. Step sequence of the ring example matches the checked-in trace.
Outcome golden_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {false, "cannot open " + path};
    const nlohmann::json golden = nlohmann::json::parse(in);
    FactorConfig cfg = config(golden["epsilon"], 32, golden["seed"]);
    cfg.depth = golden["depth"];
    cfg.instrumentation = true;
    StepTrace tr;
    (void)factorize(generate(golden["generator"]), cfg, &tr);
    const bool same_steps = tr.steps() == golden["steps"];
    const bool same_summary = nlohmann::json(tr.summary()) == golden["summary"];
    std::size_t active = 0;
    for (const auto& s : tr.summary())
        if (!s.ends_with("(noop)")) ++active;
    return {same_steps && same_summary, std::to_string(tr.steps().size()) + " steps (" + std::to_string(active) +
                                            " non-trivial), " + (same_steps ? "graphs match" : "graphs differ")};
}

// 10. Randomized kernel properties.
Outcome kernel_suite() {
    std::mt19937_64 rng(99);
    int cases = 0, failures = 0;
    std::string first;
    auto record = [&](const std::string& why) {
        ++cases;
        if (!why.empty()) {
            ++failures;
            if (first.empty()) first = why;
        }
    };
    for (int k = 0; k < 300; ++k) record(props::svd_case(rng, k));
    for (int k = 0; k < 300; ++k) record(props::lu_case(rng));
    for (int k = 0; k < 300; ++k) record(props::gemm_case(rng));
    for (int k = 0; k < 150; ++k) record(props::gmres_case(rng, k));
    return {failures == 0 && cases >= limits::kernel_cases,
            std::to_string(cases) + " cases (svd, lu, gemm, gmres), " + std::to_string(failures) + " failures" +
                (first.empty() ? "" : ": " + first)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks for the hierarchical LU solver"};
    std::vector<int> only;
    std::string golden = HLU_GOLDEN_DIR "/ring16_trace.json";
    std::string json_out;
    app.add_option("--only", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
    app.add_option("--golden", golden, "Golden trace file");
    app.add_option("--json", json_out, "Also write results as JSON");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"exact extension", exact_extension},
        {"edge distance bound", edge_distance_bound},
        {"residual tracks eps", residual_tracks_epsilon},
        {"stand-alone accuracy", standalone_accuracy},
        {"preconditioned GMRES", preconditioned_gmres},
        {"linear scaling", linear_scaling},
        {"indefinite robustness", indefinite_robustness},
        {"golden trace", [&] { return golden_trace(golden); }},
        {"kernel suite", kernel_suite},
    };
    const std::set<int> selected(only.begin(), only.end());
    nlohmann::json report = nlohmann::json::array();
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        if (!o.pass) ++failed;
        std::printf("%s %2d %-22s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        report.push_back({{"criterion", id}, {"name", criteria[i].first}, {"pass", o.pass}, {"detail", o.detail},
                          {"seconds", secs}});
    }
    if (!json_out.empty()) std::ofstream(json_out) << report.dump(2) << '\n';
    return failed == 0 ? 0 : 1;
}
