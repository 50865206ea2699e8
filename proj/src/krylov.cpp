#include "hlu/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "hlu/core.hpp"
#include "hlu/error.hpp"
#include "hlu/solve.hpp"

namespace hlu {

double norm2(std::span<const double> v) {
    // Scaled accumulation so tiny residuals do not underflow.
    double scale = 0.0, ssq = 1.0;
    for (double x : v) {
        if (x == 0.0) continue;
        const double a = std::abs(x);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

LinearOperator as_operator(const SparseMatrix& m) {
    return [&m](std::span<const double> x, std::span<double> y) { m.multiply(x, y); };
}

LinearOperator as_preconditioner(const Factorization& f) {
    auto session = std::make_shared<SolveSession>(f);
    return [session](std::span<const double> x, std::span<double> y) { session->solve(x, y); };
}

LinearOperator identity_operator() {
    return [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); };
}

void GmresConfig::validate() const {
    if (!(tol > 0.0)) throw Error("GMRES tolerance must be positive");
    if (max_iters < 1) throw Error("GMRES needs at least one iteration");
    if (restart && *restart < 1) throw Error("GMRES restart length must be positive");
}

const char* to_string(GmresStatus s) noexcept {
    switch (s) {
        case GmresStatus::converged: return "converged";
        case GmresStatus::max_iterations: return "max_iterations";
        case GmresStatus::breakdown: return "breakdown";
    }
    return "?";
}

GmresResult gmres_solve(const LinearOperator& apply_a, const LinearOperator& precond, std::span<const double> b,
                        const GmresConfig& cfg) {
    cfg.validate();
    const std::size_t n = b.size();
    GmresResult res;
    res.x.assign(n, 0.0);

    std::vector<double> pb(n), tmp(n), w(n);
    precond(b, pb);
    const double ref = norm2(pb);
    res.history.push_back(1.0);
    if (ref == 0.0) {
        res.history.back() = 0.0;
        res.status = GmresStatus::converged;
        return res;
    }

    const std::size_t m = cfg.restart ? std::min(*cfg.restart, cfg.max_iters) : cfg.max_iters;
    std::vector<std::vector<double>> v;
    std::vector<std::vector<double>> h;  // h[j] is column j, length j + 2
    std::vector<double> cs, sn, g;
    std::vector<double> r(pb);
    double beta = ref;

    while (true) {
        v.assign(1, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
        h.clear();
        cs.clear();
        sn.clear();
        g.assign(1, beta);
        bool broke = false;
        bool done = false;

        std::size_t j = 0;
        for (; j < m && res.iterations < cfg.max_iters; ++j) {
            apply_a(v[j], tmp);
            precond(tmp, w);
            const double wnorm0 = norm2(w);
            std::vector<double> col(j + 2, 0.0);
            for (std::size_t i = 0; i <= j; ++i) {
                double d = 0.0;
                for (std::size_t k = 0; k < n; ++k) d += w[k] * v[i][k];
                col[i] = d;
                for (std::size_t k = 0; k < n; ++k) w[k] -= d * v[i][k];
            }
            const double hn = norm2(w);
            col[j + 1] = hn;
            for (std::size_t i = 0; i < j; ++i) {
                const double t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            const double rho = std::hypot(col[j], col[j + 1]);
            double c = 1.0, s = 0.0;
            if (rho != 0.0) {
                c = col[j] / rho;
                s = col[j + 1] / rho;
            }
            col[j] = rho;
            col[j + 1] = 0.0;
            cs.push_back(c);
            sn.push_back(s);
            g.push_back(-s * g[j]);
            g[j] *= c;
            h.push_back(std::move(col));
            ++res.iterations;
            const double rel = std::abs(g[j + 1]) / ref;
            res.history.push_back(rel);

            if (rel <= cfg.tol) {
                done = true;
                ++j;
                break;
            }
            if (hn <= 1e-14 * std::max(wnorm0, 1e-300) || rho == 0.0) {
                broke = true;
                ++j;
                break;
            }
            v.emplace_back(n);
            for (std::size_t k = 0; k < n; ++k) v[j + 1][k] = w[k] / hn;
        }

        // Back substitution on the rotated Hessenberg system.
        std::vector<double> y(j, 0.0);
        for (std::size_t i = j; i-- > 0;) {
            double acc = g[i];
            for (std::size_t k = i + 1; k < j; ++k) acc -= h[k][i] * y[k];
            y[i] = h[i][i] != 0.0 ? acc / h[i][i] : 0.0;
        }
        for (std::size_t i = 0; i < j; ++i)
            for (std::size_t k = 0; k < n; ++k) res.x[k] += y[i] * v[i][k];

        if (done) {
            res.status = GmresStatus::converged;
            return res;
        }
        if (broke) {
            // A lucky breakdown means the Krylov space is invariant and the
            // residual is exactly representable; otherwise report it.
            res.status = res.history.back() <= cfg.tol ? GmresStatus::converged : GmresStatus::breakdown;
            return res;
        }
        if (res.iterations >= cfg.max_iters) {
            res.status = GmresStatus::max_iterations;
            return res;
        }
        // Restart from the true preconditioned residual.
        apply_a(res.x, tmp);
        for (std::size_t k = 0; k < n; ++k) tmp[k] = b[k] - tmp[k];
        precond(tmp, r);
        beta = norm2(r);
        if (beta / ref <= cfg.tol) {
            res.status = GmresStatus::converged;
            return res;
        }
    }
}

std::string history_csv(const GmresResult& r) {
    std::ostringstream os;
    os.precision(17);
    os << "iteration,preconditioned_residual\n";
    for (std::size_t i = 0; i < r.history.size(); ++i) os << i << ',' << r.history[i] << '\n';
    return os.str();
}

double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
    std::vector<double> ax = a.multiply(x);
    for (std::size_t i = 0; i < ax.size(); ++i) ax[i] -= b[i];
    const double nb = norm2(b);
    return nb == 0.0 ? norm2(ax) : norm2(ax) / nb;
}

SolutionMetrics metrics(std::span<const double> approx, std::span<const double> exact, const SparseMatrix& a,
                        std::span<const double> b) {
    if (approx.size() != exact.size() || approx.size() != a.size() || b.size() != a.size())
        throw ShapeError("metrics: vector lengths do not match the matrix");
    SolutionMetrics out;
    std::vector<double> d(approx.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = exact[i] - approx[i];
    const double nx = norm2(exact);
    out.error_absolute = nx == 0.0;
    out.relative_error = nx == 0.0 ? norm2(d) : norm2(d) / nx;
    out.residual_absolute = norm2(b) == 0.0;
    out.relative_residual = relative_residual(a, approx, b);
    return out;
}

}  // namespace hlu
