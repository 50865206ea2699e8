// Independent reference implementations used by the tests. Nothing here
// calls into the library's numerical kernels.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <vector>

#include "hlu/core.hpp"
#include "hlu/dense_matrix.hpp"
#include "hlu/partition.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, std::vector<double>(c, 0.0)); }

inline Mat from(const hlu::DenseMatrix& m) {
    Mat a = zeros(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = m(i, j);
    return a;
}

inline hlu::DenseMatrix to_dense(const Mat& a) {
    hlu::DenseMatrix m(a.size(), a.empty() ? 0 : a[0].size());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = a[i][j];
    return m;
}

/// Dense copy assembled from the coordinate list.
inline Mat densify(const hlu::SparseMatrix& s) {
    Mat a = zeros(s.size(), s.size());
    for (const auto& e : s.entries()) a[e.row][e.col] += e.value;
    return a;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Mat c = zeros(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            long double s = 0;
            for (std::size_t t = 0; t < k; ++t) s += (long double)a[i][t] * b[t][j];
            c[i][j] = double(s);
        }
    return c;
}

inline Mat transpose(const Mat& a) {
    if (a.empty()) return {};
    Mat t = zeros(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

inline double frob(const Mat& a) {
    long double s = 0;
    for (const auto& r : a)
        for (double v : r) s += (long double)v * v;
    return std::sqrt(double(s));
}

inline double frob_diff(const Mat& a, const Mat& b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            const long double d = (long double)a[i][j] - b[i][j];
            s += d * d;
        }
    return std::sqrt(double(s));
}

/// Gaussian elimination with partial pivoting, many right-hand sides.
inline Mat solve(Mat a, Mat b) {
    const std::size_t n = a.size();
    const std::size_t m = b.empty() ? 0 : b[0].size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        if (a[p][k] == 0.0) throw std::runtime_error("oracle: singular matrix");
        std::swap(a[p], a[k]);
        std::swap(b[p], b[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            for (std::size_t j = 0; j < m; ++j) b[i][j] -= f * b[k][j];
        }
    }
    for (std::size_t k = n; k-- > 0;)
        for (std::size_t j = 0; j < m; ++j) {
            double s = b[k][j];
            for (std::size_t t = k + 1; t < n; ++t) s -= a[k][t] * b[t][j];
            b[k][j] = s / a[k][k];
        }
    return b;
}

inline std::vector<double> solve(const Mat& a, const std::vector<double>& b) {
    Mat rhs = zeros(b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i) rhs[i][0] = b[i];
    Mat x = solve(a, rhs);
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = x[i][0];
    return out;
}

inline Mat inverse(const Mat& a) {
    Mat id = zeros(a.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) id[i][i] = 1.0;
    return solve(a, id);
}

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi rotations,
/// descending.
inline std::vector<double> sym_eigenvalues(Mat a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-60) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

/// Singular values from the eigenvalues of M^T M.
inline std::vector<double> singular_values(const Mat& m) {
    auto ev = sym_eigenvalues(matmul(transpose(m), m));
    for (double& v : ev) v = std::sqrt(std::max(v, 0.0));
    return ev;
}

/// Random orthogonal matrix via Gram-Schmidt on Gaussian columns.
inline Mat random_orthogonal(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Mat q = zeros(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> v(n);
        for (double& x : v) x = g(rng);
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < j; ++k) {
                double d = 0;
                for (std::size_t i = 0; i < n; ++i) d += q[i][k] * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= d * q[i][k];
            }
        double nv = 0;
        for (double x : v) nv += x * x;
        nv = std::sqrt(nv);
        for (std::size_t i = 0; i < n; ++i) q[i][j] = v[i] / nv;
    }
    return q;
}

inline Mat random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    Mat a = zeros(r, c);
    for (auto& row : a)
        for (double& v : row) v = u(rng);
    return a;
}

inline Mat random_dominant(std::size_t n, std::mt19937_64& rng) {
    Mat a = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (double v : a[i]) s += std::abs(v);
        a[i][i] = s + 1.0;
    }
    return a;
}

/// Breadth-first distances from `src` in an adjacency-list graph.
inline std::vector<std::size_t> bfs(const std::vector<std::vector<std::size_t>>& adj, std::size_t src) {
    std::vector<std::size_t> d(adj.size(), SIZE_MAX);
    std::deque<std::size_t> q{src};
    d[src] = 0;
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        for (auto v : adj[u])
            if (d[v] == SIZE_MAX) {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
    }
    return d;
}

inline double norm(const std::vector<double>& v) {
    long double s = 0;
    for (double x : v) s += (long double)x * x;
    return std::sqrt(double(s));
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += ((long double)a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(double(s)) / norm(b);
}

inline Mat sub(const Mat& a, std::size_t r0, std::size_t c0, std::size_t r, std::size_t c) {
    Mat out = zeros(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[i][j] = a[r0 + i][c0 + j];
    return out;
}

/// Schur complement onto the leading k unknowns: A11 - A12 A22^{-1} A21.
inline Mat schur_leading(const Mat& a, std::size_t k) {
    const std::size_t n = a.size();
    if (k == n) return a;
    Mat x = solve(sub(a, k, k, n - k, n - k), sub(a, k, 0, n - k, k));
    Mat corr = matmul(sub(a, 0, k, k, n - k), x);
    Mat out = sub(a, 0, 0, k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) out[i][j] -= corr[i][j];
    return out;
}

/// Block Gaussian elimination of the trailing unknowns, one block at a time
/// starting from the last; `blocks` lists block sizes in order.
inline Mat eliminate_from_right(Mat a, const std::vector<std::size_t>& blocks, std::size_t keep_blocks) {
    std::size_t n = a.size();
    for (std::size_t b = blocks.size(); b-- > keep_blocks;) {
        n -= blocks[b];
        a = schur_leading(a, n);
    }
    return a;
}

/// Nested partitioning of [0, n) into contiguous index ranges, depth l.
inline hlu::NestedPartitioning contiguous(std::size_t n, std::size_t l) {
    std::vector<hlu::Partitioning> levels;
    for (std::size_t i = 0; i <= l; ++i) {
        const std::size_t k = std::size_t{1} << i;
        std::vector<std::size_t> c(n);
        for (std::size_t v = 0; v < n; ++v) c[v] = v * k / n;
        levels.emplace_back(c, k);
    }
    return hlu::NestedPartitioning(levels);
}

}  // namespace oracle
