#include "hlu/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hlu/error.hpp"

namespace hlu {

void gemm(double alpha, const DenseMatrix& a, const DenseMatrix& b, double beta, DenseMatrix& c) {
    if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
        throw ShapeError("gemm shape mismatch: (" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ") * (" +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ") -> (" +
                         std::to_string(c.rows()) + "x" + std::to_string(c.cols()) + ")");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (beta != 1.0) {
        if (beta == 0.0)
            std::fill(c.data().begin(), c.data().end(), 0.0);
        else
            c *= beta;
    }
    if (alpha == 0.0 || k == 0) return;
    for (std::size_t i = 0; i < m; ++i) {
        double* __restrict ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double s = alpha * ai[p];
            if (s == 0.0) continue;
            const double* __restrict bp = b.row(p);
            for (std::size_t j = 0; j < n; ++j) ci[j] += s * bp[j];
        }
    }
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.rows(), b.cols());
    gemm(1.0, a, b, 0.0, c);
    return c;
}

void gemv(double alpha, const DenseMatrix& a, std::span<const double> x, double beta, std::span<double> y) {
    if (x.size() != a.cols() || y.size() != a.rows()) throw ShapeError("gemv shape mismatch");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
        y[i] = alpha * s + (beta == 0.0 ? 0.0 : beta * y[i]);
    }
}

LuFactorization LuFactorization::factor(const DenseMatrix& a, const char* label) {
    if (a.rows() != a.cols()) throw ShapeError("LU of a non-square block");
    const std::size_t n = a.rows();
    LuFactorization f;
    f.lu_ = a;
    f.perm_.resize(n);
    std::iota(f.perm_.begin(), f.perm_.end(), std::size_t{0});
    const double threshold = pivot_tolerance * a.max_abs();
    DenseMatrix& lu = f.lu_;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > best) {
                best = std::abs(lu(i, k));
                piv = i;
            }
        if (!(best > threshold) || best == 0.0)
            throw SingularPivot("singular pivot block (column " + std::to_string(k) + " of " + std::to_string(n) + ")",
                                label);
        if (piv != k) {
            std::swap_ranges(lu.row(k), lu.row(k) + n, lu.row(piv));
            std::swap(f.perm_[k], f.perm_[piv]);
        }
        const double inv = 1.0 / lu(k, k);
        const double* __restrict rk = lu.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            double* __restrict ri = lu.row(i);
            const double l = ri[k] * inv;
            ri[k] = l;
            if (l == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
        }
    }
    return f;
}

void LuFactorization::solve_in_place(DenseMatrix& rhs) const {
    const std::size_t n = size();
    if (rhs.rows() != n) throw ShapeError("LU solve shape mismatch");
    const std::size_t k = rhs.cols();
    if (n == 0 || k == 0) return;

    DenseMatrix permuted(n, k);
    for (std::size_t i = 0; i < n; ++i) std::copy_n(rhs.row(perm_[i]), k, permuted.row(i));

    for (std::size_t i = 0; i < n; ++i) {
        double* __restrict xi = permuted.row(i);
        const double* li = lu_.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double l = li[j];
            if (l == 0.0) continue;
            const double* __restrict xj = permuted.row(j);
            for (std::size_t c = 0; c < k; ++c) xi[c] -= l * xj[c];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double* __restrict xi = permuted.row(i);
        const double* ui = lu_.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double u = ui[j];
            if (u == 0.0) continue;
            const double* __restrict xj = permuted.row(j);
            for (std::size_t c = 0; c < k; ++c) xi[c] -= u * xj[c];
        }
        const double inv = 1.0 / ui[i];
        for (std::size_t c = 0; c < k; ++c) xi[c] *= inv;
    }
    rhs = std::move(permuted);
}

void LuFactorization::solve_in_place(std::span<double> rhs) const {
    const std::size_t n = size();
    if (rhs.size() != n) throw ShapeError("LU solve length mismatch");
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = lu_.row(i);
        double s = x[i];
        for (std::size_t j = 0; j < i; ++j) s -= li[j] * x[j];
        x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
        const double* ui = lu_.row(i);
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= ui[j] * x[j];
        x[i] = s / ui[i];
    }
    std::copy(x.begin(), x.end(), rhs.begin());
}

DenseMatrix LuFactorization::solve(const DenseMatrix& rhs) const {
    DenseMatrix x = rhs;
    solve_in_place(x);
    return x;
}

DenseMatrix LuFactorization::lower() const {
    const std::size_t n = size();
    DenseMatrix l = DenseMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) l(i, j) = lu_(i, j);
    return l;
}

DenseMatrix LuFactorization::upper() const {
    const std::size_t n = size();
    DenseMatrix u(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) u(i, j) = lu_(i, j);
    return u;
}

namespace {

constexpr int max_jacobi_sweeps = 80;

double dot(const double* __restrict x, const double* __restrict y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void rotate(double* __restrict x, double* __restrict y, std::size_t n, double c, double s) {
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i], b = y[i];
        x[i] = c * a - s * b;
        y[i] = s * a + c * b;
    }
}

// Columns of M gathered contiguously; when M is tall they are replaced by
// the columns of the triangular factor R from a Householder QR.
std::vector<double> jacobi_work_columns(const DenseMatrix& m, std::size_t& len) {
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<double> cols_major(cols * rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) cols_major[j * rows + i] = m(i, j);
    if (rows <= cols) {
        len = rows;
        return cols_major;
    }

    for (std::size_t k = 0; k < cols; ++k) {
        double* xk = cols_major.data() + k * rows;
        const double alpha_norm = std::sqrt(dot(xk + k, xk + k, rows - k));
        if (alpha_norm == 0.0) continue;
        const double alpha = xk[k] > 0 ? -alpha_norm : alpha_norm;
        // v = x - alpha e1, stored in place below the diagonal.
        xk[k] -= alpha;
        const double vnorm2 = dot(xk + k, xk + k, rows - k);
        for (std::size_t j = k + 1; j < cols; ++j) {
            double* xj = cols_major.data() + j * rows;
            const double f = 2.0 * dot(xk + k, xj + k, rows - k) / vnorm2;
            for (std::size_t i = k; i < rows; ++i) xj[i] -= f * xk[i];
        }
        xk[k] = alpha;
    }
    len = cols;
    std::vector<double> r(cols * cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i <= j; ++i) r[j * cols + i] = cols_major[j * rows + i];
    return r;
}

}  // namespace

namespace {

struct JacobiResult {
    std::vector<double> sigma;  // length cols, sorted non-increasing
    DenseMatrix v;              // cols x cols
};

JacobiResult jacobi_svd(const DenseMatrix& m) {
    const std::size_t cols = m.cols();
    JacobiResult res;
    res.sigma.assign(cols, 0.0);
    res.v = DenseMatrix::identity(cols);
    const double fro2 = m.squared_norm();
    if (cols == 0 || m.rows() == 0 || fro2 == 0.0) return res;

    std::size_t len = 0;
    std::vector<double> w = jacobi_work_columns(m, len);
    std::vector<double> vcols(cols * cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) vcols[j * cols + j] = 1.0;
    std::vector<double> norms(cols);

    const double tol = 4.0 * std::numeric_limits<double>::epsilon();
    const double negligible = fro2 * 1e-60;
    bool converged = false;
    for (int sweep = 0; sweep < max_jacobi_sweeps && !converged; ++sweep) {
        for (std::size_t j = 0; j < cols; ++j) norms[j] = dot(&w[j * len], &w[j * len], len);
        converged = true;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                const double a = norms[p], b = norms[q];
                if (a < negligible || b < negligible) continue;
                double* cp = &w[p * len];
                double* cq = &w[q * len];
                const double g = dot(cp, cq, len);
                if (std::abs(g) <= tol * std::sqrt(a * b)) continue;
                converged = false;
                const double zeta = (b - a) / (2.0 * g);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(cp, cq, len, c, s);
                rotate(&vcols[p * cols], &vcols[q * cols], cols, c, s);
                norms[p] = a - t * g;
                norms[q] = b + t * g;
            }
        }
    }
    if (!converged) throw SvdNoConvergence("one-sided Jacobi SVD did not converge");

    std::vector<double> sig(cols);
    for (std::size_t j = 0; j < cols; ++j) sig[j] = std::sqrt(dot(&w[j * len], &w[j * len], len));
    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });
    for (std::size_t k = 0; k < cols; ++k) {
        res.sigma[k] = sig[order[k]];
        const double* vc = &vcols[order[k] * cols];
        for (std::size_t i = 0; i < cols; ++i) res.v(i, k) = vc[i];
    }
    return res;
}

}  // namespace

Svd svd(const DenseMatrix& m) {
    JacobiResult j = jacobi_svd(m);
    const std::size_t p = std::min(m.rows(), m.cols());
    Svd out;
    out.sigma.assign(j.sigma.begin(), j.sigma.begin() + static_cast<std::ptrdiff_t>(p));
    out.v = j.v.block(0, 0, m.cols(), p);
    out.u = multiply(m, out.v);
    for (std::size_t k = 0; k < p; ++k) {
        const double inv = out.sigma[k] > 0.0 ? 1.0 / out.sigma[k] : 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) out.u(i, k) *= inv;
    }
    return out;
}

std::size_t truncation_rank(std::span<const double> sigma, const TruncationRule& rule, double reference_norm) {
    if (sigma.empty() || sigma[0] <= 0.0) return 0;
    if (rule.kind == TruncationKind::relative_sigma) {
        // Ties are kept. Computed singular values carry an absolute error of
        // a few ulps of sigma_0, so the comparison allows for that much.
        const double slack = 32.0 * std::numeric_limits<double>::epsilon();
        const double cut = (rule.epsilon - slack) * sigma[0];
        std::size_t r = 0;
        while (r < sigma.size() && sigma[r] > 0.0 && sigma[r] >= cut) ++r;
        return r;
    }
    std::vector<double> tail(sigma.size() + 1, 0.0);
    for (std::size_t k = sigma.size(); k-- > 0;) tail[k] = tail[k + 1] + sigma[k] * sigma[k];
    const double ref = reference_norm > 0.0 ? reference_norm : std::sqrt(tail[0]);
    for (std::size_t k = 0; k <= sigma.size(); ++k)
        if (std::sqrt(tail[k]) < rule.epsilon * ref) return k;
    return sigma.size();
}

TruncatedSvd truncated_svd(const DenseMatrix& m, const TruncationRule& rule, double reference_norm) {
    if (!m.all_finite()) throw Error("truncated_svd: non-finite input");
    JacobiResult j = jacobi_svd(m);
    const std::size_t p = std::min(m.rows(), m.cols());
    TruncatedSvd out;
    out.sigma.assign(j.sigma.begin(), j.sigma.begin() + static_cast<std::ptrdiff_t>(p));
    out.rank = truncation_rank(out.sigma, rule, reference_norm);
    out.right = j.v.block(0, 0, m.cols(), out.rank);
    out.left = multiply(m, out.right);
    double dropped = 0.0;
    for (std::size_t k = out.rank; k < p; ++k) dropped += out.sigma[k] * out.sigma[k];
    out.dropped_energy = std::sqrt(dropped);
    return out;
}

}  // namespace hlu
