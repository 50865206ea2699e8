#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hlu {

class SparseMatrix;
class Factorization;

/// y = Op(x); both spans have the operator dimension.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

LinearOperator as_operator(const SparseMatrix& m);
/// Approximate inverse; the factorization must outlive the operator.
LinearOperator as_preconditioner(const Factorization& f);
LinearOperator identity_operator();

struct GmresConfig {
    double tol = 1e-14;
    std::size_t max_iters = 500;
    std::optional<std::size_t> restart;  ///< none: full GMRES

    void validate() const;
};

enum class GmresStatus { converged, max_iterations, breakdown };
const char* to_string(GmresStatus s) noexcept;

struct GmresResult {
    std::vector<double> x;
    GmresStatus status = GmresStatus::max_iterations;
    std::size_t iterations = 0;
    /// Relative preconditioned residual, history[0] = 1 for x0 = 0.
    std::vector<double> history;
    double final_residual() const { return history.empty() ? 0.0 : history.back(); }
    bool converged() const noexcept { return status == GmresStatus::converged; }
};

/// Left-preconditioned GMRES (MGS + Givens) from x0 = 0.
GmresResult gmres_solve(const LinearOperator& apply_a, const LinearOperator& precond, std::span<const double> b,
                        const GmresConfig& cfg);

std::string history_csv(const GmresResult& r);

struct SolutionMetrics {
    double relative_error = 0.0;
    double relative_residual = 0.0;
    bool error_absolute = false;     ///< ||x*|| was zero
    bool residual_absolute = false;  ///< ||b|| was zero
};

SolutionMetrics metrics(std::span<const double> approx, std::span<const double> exact, const SparseMatrix& a,
                        std::span<const double> b);

double relative_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b);
double norm2(std::span<const double> v);

}  // namespace hlu
