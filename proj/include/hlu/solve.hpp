#pragma once

#include <span>
#include <vector>

#include "hlu/factor.hpp"

namespace hlu {

/// Per-solve scratch (Var/RHS of every node) over a shared factorization.
/// One session per concurrent solve; the factorization is never mutated.
class SolveSession {
public:
    explicit SolveSession(const Factorization& f);

    void set_rhs(std::span<const double> b);
    void solve_l(NodeId p);
    void solve_u(NodeId p);
    void split_var(NodeId s);
    std::vector<double> gather_solution() const;

    /// Full forward/backward traversal for one right-hand side.
    std::vector<double> solve(std::span<const double> b);
    void solve(std::span<const double> b, std::span<double> x);

    std::span<const double> rhs(NodeId id) const;
    std::span<const double> var(NodeId id) const;

private:
    std::span<double> rhs_of(NodeId id);
    std::span<double> var_of(NodeId id);
    void forward(std::size_t k);
    void backward(std::size_t k);
    void split(NodeId s);
    void gather(std::span<double> x) const;

    const Factorization& f_;
    std::vector<double> rhs_, var_, work_;
};

std::vector<double> solve(const Factorization& f, std::span<const double> b);

}  // namespace hlu
