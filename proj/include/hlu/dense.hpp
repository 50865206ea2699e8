#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hlu/dense_matrix.hpp"

namespace hlu {

/// C <- alpha * A * B + beta * C
void gemm(double alpha, const DenseMatrix& a, const DenseMatrix& b, double beta, DenseMatrix& c);

/// Returns A * B.
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);

/// y <- alpha * A * x + beta * y
void gemv(double alpha, const DenseMatrix& a, std::span<const double> x, double beta, std::span<double> y);

/// LU factorization with partial (row) pivoting, P A = L U, stored packed.
class LuFactorization {
public:
    /// Relative pivot threshold: a column whose largest candidate falls
    /// below this fraction of max|A| is treated as singular.
    static constexpr double pivot_tolerance = 1e-13;

    LuFactorization() = default;

    /// Throws SingularPivot tagged with `label` when a pivot is too small.
    static LuFactorization factor(const DenseMatrix& a, const char* label = "");

    std::size_t size() const noexcept { return lu_.rows(); }

    /// Overwrites `rhs` (size() x k) with A^{-1} rhs.
    void solve_in_place(DenseMatrix& rhs) const;
    void solve_in_place(std::span<double> rhs) const;
    DenseMatrix solve(const DenseMatrix& rhs) const;

    DenseMatrix lower() const;
    DenseMatrix upper() const;
    /// Row i of P A is row perm()[i] of A.
    const std::vector<std::size_t>& perm() const noexcept { return perm_; }

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

enum class TruncationKind {
    relative_sigma,    ///< keep sigma_k / sigma_0 >= epsilon
    frobenius_global,  ///< smallest k with ||M - M_k||_F / reference < epsilon
};

struct TruncationRule {
    TruncationKind kind = TruncationKind::relative_sigma;
    double epsilon = 1e-4;
};

/// Thin SVD M = U diag(sigma) V^T with sigma non-increasing.
struct Svd {
    DenseMatrix u;  ///< rows x k
    std::vector<double> sigma;
    DenseMatrix v;  ///< cols x k
};

/// Full thin SVD by Householder QR followed by one-sided Jacobi on R.
/// Throws SvdNoConvergence when the sweep cap is reached.
Svd svd(const DenseMatrix& m);

/// Rank retained by `rule`. `reference_norm` is the denominator of the
/// Frobenius rule; zero means the norm of the spectrum itself.
std::size_t truncation_rank(std::span<const double> sigma, const TruncationRule& rule, double reference_norm = 0.0);

struct TruncatedSvd {
    std::size_t rank = 0;
    DenseMatrix left;   ///< rows x rank, equals U_r diag(sigma_r)
    DenseMatrix right;  ///< cols x rank, orthonormal columns V_r
    std::vector<double> sigma;  ///< full spectrum
    double dropped_energy = 0.0;  ///< sqrt(sum_{k >= rank} sigma_k^2)
};

TruncatedSvd truncated_svd(const DenseMatrix& m, const TruncationRule& rule, double reference_norm = 0.0);

}  // namespace hlu
