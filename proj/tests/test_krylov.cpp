#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hlu/error.hpp"
#include "hlu/factor.hpp"
#include "hlu/krylov.hpp"
#include "hlu/problems.hpp"
#include "kernel_props.hpp"
#include "oracles.hpp"

using namespace hlu;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// ||P(b - A x)|| / ||P b|| recomputed from scratch.
double preconditioned_residual(const LinearOperator& a, const LinearOperator& p, const std::vector<double>& x,
                               const std::vector<double>& b) {
    std::vector<double> ax(b.size()), r(b.size()), pr(b.size()), pb(b.size());
    a(x, ax);
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - ax[i];
    p(r, pr);
    p(b, pb);
    return oracle::norm(pr) / oracle::norm(pb);
}

FactorConfig config(double eps) {
    FactorConfig c;
    c.epsilon = eps;
    return c;
}

}  // namespace

TEST_CASE("gmres: identity operator and preconditioner converge in one step") {
    const auto b = random_vector(50, 1);
    GmresResult r = gmres_solve(identity_operator(), identity_operator(), b, GmresConfig{});
    CHECK(r.converged());
    CHECK(r.iterations == 1);
    CHECK(r.history.front() == 1.0);
    CHECK(oracle::rel_diff(r.x, b) <= 1e-15);
}

TEST_CASE("gmres: zero right-hand side") {
    GmresResult r = gmres_solve(identity_operator(), identity_operator(), std::vector<double>(5, 0.0), GmresConfig{});
    CHECK(r.converged());
    CHECK(r.iterations == 0);
    CHECK(r.x == std::vector<double>(5, 0.0));
}

TEST_CASE("gmres: random diagonally dominant n=1000 with eps=1e-2 preconditioner") {
    SparseMatrix m = generate("randdd:1000,seed=7");
    const auto xs = random_vector(1000, 3);
    const auto b = m.multiply(xs);
    Factorization f = factorize(m, config(1e-2));
    GmresResult r = gmres_solve(as_operator(m), as_preconditioner(f), b, GmresConfig{});
    CHECK(r.converged());
    CHECK(r.iterations <= 50);
    const auto ref = oracle::solve(oracle::densify(m), b);
    CHECK(oracle::rel_diff(r.x, ref) <= 1e-10);
}

TEST_CASE("gmres: exact preconditioner converges in at most two iterations") {
    SparseMatrix m = generate("poisson2d:16");
    FactorConfig cfg = config(1e-14);
    Factorization f = factorize(m, cfg);
    const auto b = random_vector(m.size(), 5);
    GmresConfig g;
    g.tol = 1e-12;
    GmresResult r = gmres_solve(as_operator(m), as_preconditioner(f), b, g);
    CHECK(r.converged());
    CHECK(r.iterations <= 2);
}

TEST_CASE("gmres: history is monotone and matches a recomputed residual") {
    const char* problems[] = {"advdiff2d:20,R=100", "vcp2d:20,case=3", "poisson3d:8", "randdd:300"};
    for (const std::string p : problems) {
        CAPTURE(p);
        SparseMatrix m = generate(p);
        const auto b = random_vector(m.size(), 2);
        for (double eps : {0.3, 1e-1}) {
            Factorization f = factorize(m, config(eps));
            auto a = as_operator(m);
            auto pre = as_preconditioner(f);
            for (std::optional<std::size_t> restart : {std::optional<std::size_t>{}, std::optional<std::size_t>{5}}) {
                // Short restarts may stagnate on the indefinite case.
                if (restart && p.starts_with("vcp2d")) continue;
                GmresConfig g;
                g.tol = 1e-10;
                g.restart = restart;
                GmresResult r = gmres_solve(a, pre, b, g);
                CHECK(r.converged());
                REQUIRE(r.history.size() == r.iterations + 1);
                for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1] * (1 + 1e-12));
                const double rec = preconditioned_residual(a, pre, r.x, b);
                CHECK(std::abs(rec - r.final_residual()) <= 1e-12 + 1e-6 * r.final_residual());
            }
        }
    }
}

TEST_CASE("gmres: residual history is monotone on random dense systems") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        CAPTURE(trial);
        CHECK(props::gmres_case(rng, trial) == "");
    }
}

TEST_CASE("gmres: max iterations is flagged, not thrown") {
    SparseMatrix m = generate("poisson2d:32");
    const auto b = random_vector(m.size(), 1);
    GmresConfig g;
    g.max_iters = 5;
    GmresResult r = gmres_solve(as_operator(m), identity_operator(), b, g);
    CHECK(r.status == GmresStatus::max_iterations);
    CHECK(r.iterations == 5);
    CHECK(r.history.size() == 6);
    g.restart = 2;
    r = gmres_solve(as_operator(m), identity_operator(), b, g);
    CHECK(r.status == GmresStatus::max_iterations);
    CHECK(r.iterations == 5);
}

TEST_CASE("gmres: restarted run still converges") {
    SparseMatrix m = generate("poisson2d:12");
    const auto b = random_vector(m.size(), 6);
    GmresConfig g;
    g.tol = 1e-10;
    g.restart = 10;
    g.max_iters = 2000;
    GmresResult r = gmres_solve(as_operator(m), identity_operator(), b, g);
    CHECK(r.converged());
    CHECK(r.iterations > 10);
    CHECK(relative_residual(m, r.x, b) <= 1e-8);
}

TEST_CASE("gmres: config validation") {
    GmresConfig g;
    g.tol = 0;
    CHECK_THROWS_AS(g.validate(), Error);
    g = GmresConfig{};
    g.max_iters = 0;
    CHECK_THROWS_AS(g.validate(), Error);
    g = GmresConfig{};
    g.restart = 0;
    CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("history csv") {
    GmresResult r;
    r.history = {1.0, 0.5, 0.25};
    std::istringstream in(history_csv(r));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    CHECK(lines == std::vector<std::string>{"iteration,preconditioned_residual", "0,1", "1,0.5", "2,0.25"});
}

TEST_CASE("metrics") {
    SparseMatrix m = generate("poisson2d:6");
    const auto xs = random_vector(36, 1);
    const auto b = m.multiply(xs);
    SolutionMetrics exact = metrics(xs, xs, m, b);
    CHECK(exact.relative_error == 0.0);
    CHECK(exact.relative_residual == 0.0);
    SolutionMetrics zero = metrics(std::vector<double>(36, 0.0), xs, m, b);
    CHECK(zero.relative_residual == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(zero.relative_error == doctest::Approx(1.0).epsilon(1e-15));

    // Hand-rolled norm oracle.
    const auto xt = random_vector(36, 2);
    std::vector<double> d(36), r(36, 0.0);
    const oracle::Mat a = oracle::densify(m);
    for (std::size_t i = 0; i < 36; ++i) {
        d[i] = xt[i] - xs[i];
        for (std::size_t j = 0; j < 36; ++j) r[i] += a[i][j] * xt[j];
        r[i] -= b[i];
    }
    SolutionMetrics got = metrics(xt, xs, m, b);
    CHECK(got.relative_error == doctest::Approx(oracle::norm(d) / oracle::norm(xs)).epsilon(1e-13));
    CHECK(got.relative_residual == doctest::Approx(oracle::norm(r) / oracle::norm(b)).epsilon(1e-13));
    CHECK_FALSE(got.error_absolute);

    SolutionMetrics flagged = metrics(xt, std::vector<double>(36, 0.0), m, std::vector<double>(36, 0.0));
    CHECK(flagged.error_absolute);
    CHECK(flagged.residual_absolute);
    CHECK(flagged.relative_error == doctest::Approx(oracle::norm(xt)).epsilon(1e-13));
    CHECK_THROWS_AS(metrics(xt, std::vector<double>(3), m, b), ShapeError);
}

TEST_CASE("norm2 survives extreme scales") {
    CHECK(norm2(std::vector<double>{3e-200, 4e-200}) == doctest::Approx(5e-200));
    CHECK(norm2(std::vector<double>{3e200, 4e200}) == doctest::Approx(5e200));
    CHECK(norm2(std::vector<double>{}) == 0.0);
}
