#include "hlu/solve.hpp"

#include <algorithm>

#include "hlu/error.hpp"

namespace hlu {

SolveSession::SolveSession(const Factorization& f)
    : f_(f), rhs_(f.scratch_size(), 0.0), var_(f.scratch_size(), 0.0) {}

std::span<double> SolveSession::rhs_of(NodeId id) {
    return std::span<double>(rhs_).subspan(f_.scratch_offset(id), f_.tree().node(id).size);
}
std::span<double> SolveSession::var_of(NodeId id) {
    return std::span<double>(var_).subspan(f_.scratch_offset(id), f_.tree().node(id).size);
}
std::span<const double> SolveSession::rhs(NodeId id) const {
    return std::span<const double>(rhs_).subspan(f_.scratch_offset(id), f_.tree().node(id).size);
}
std::span<const double> SolveSession::var(NodeId id) const {
    return std::span<const double>(var_).subspan(f_.scratch_offset(id), f_.tree().node(id).size);
}

void SolveSession::set_rhs(std::span<const double> b) {
    const HTree& t = f_.tree();
    if (b.size() != f_.size()) throw ShapeError("right-hand side has length " + std::to_string(b.size()) +
                                                ", expected " + std::to_string(f_.size()));
    std::fill(rhs_.begin(), rhs_.end(), 0.0);
    std::fill(var_.begin(), var_.end(), 0.0);
    const std::size_t l = t.depth();
    // Leaf super nodes hold the concatenated leaf red right-hand sides; every
    // other node starts at zero.
    for (std::size_t j = 0; j < t.level_width(l); ++j) {
        auto members = t.partitioning().members(l, j);
        auto r = rhs_of(t.red(l, j));
        for (std::size_t k = 0; k < members.size(); ++k) r[k] = b[members[k]];
    }
    for (std::size_t j = 0; j < t.level_width(l) / 2; ++j) {
        auto s = rhs_of(t.super_node(l, j));
        auto r0 = rhs(t.red(l, 2 * j));
        auto r1 = rhs(t.red(l, 2 * j + 1));
        std::copy(r0.begin(), r0.end(), s.begin());
        std::copy(r1.begin(), r1.end(), s.begin() + static_cast<std::ptrdiff_t>(r0.size()));
    }
}

void SolveSession::forward(std::size_t k) {
    const auto& pn = f_.plan()[k];
    if (pn.size == 0) return;
    work_.assign(rhs_.begin() + static_cast<std::ptrdiff_t>(pn.offset),
                 rhs_.begin() + static_cast<std::ptrdiff_t>(pn.offset + pn.size));
    pn.pivot->solve_in_place(std::span<double>(work_));
    const auto& plan = f_.plan();
    for (const auto& link : pn.later_out) {
        const auto& q = plan[link.node];
        gemv(-1.0, *link.block, work_, 1.0, std::span<double>(rhs_).subspan(q.offset, q.size));
    }
}

void SolveSession::backward(std::size_t k) {
    const auto& pn = f_.plan()[k];
    if (pn.size == 0) return;
    std::span<double> v = std::span<double>(var_).subspan(pn.offset, pn.size);
    std::copy_n(rhs_.begin() + static_cast<std::ptrdiff_t>(pn.offset), pn.size, v.begin());
    const auto& plan = f_.plan();
    for (const auto& link : pn.later_in) {
        const auto& q = plan[link.node];
        gemv(-1.0, *link.block, std::span<const double>(var_).subspan(q.offset, q.size), 1.0, v);
    }
    pn.pivot->solve_in_place(v);
}

void SolveSession::solve_l(NodeId p) { forward(f_.plan_index(p)); }
void SolveSession::solve_u(NodeId p) { backward(f_.plan_index(p)); }

void SolveSession::split(NodeId s) {
    const HNode& n = f_.tree().node(s);
    auto v = var(s);
    auto v0 = var_of(n.children[0]);
    auto v1 = var_of(n.children[1]);
    std::copy_n(v.begin(), v0.size(), v0.begin());
    std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(v0.size()), v1.size(), v1.begin());
}

void SolveSession::split_var(NodeId s) {
    if (f_.tree().node(s).kind != NodeKind::super) throw Error(f_.tree().label(s) + " is not a super node");
    split(s);
}

void SolveSession::gather(std::span<double> x) const {
    const HTree& t = f_.tree();
    const std::size_t l = t.depth();
    for (std::size_t j = 0; j < t.level_width(l); ++j) {
        auto members = t.partitioning().members(l, j);
        auto v = var(t.red(l, j));
        for (std::size_t k = 0; k < members.size(); ++k) x[members[k]] = v[k];
    }
}

std::vector<double> SolveSession::gather_solution() const {
    std::vector<double> x(f_.size(), 0.0);
    gather(x);
    return x;
}

void SolveSession::solve(std::span<const double> b, std::span<double> x) {
    if (x.size() != f_.size()) throw ShapeError("solution vector has wrong length");
    set_rhs(b);
    const HTree& t = f_.tree();
    const std::size_t l = t.depth();
    for (std::size_t i = l; i >= 1; --i)
        for (std::size_t j = 0; j < t.level_width(i) / 2; ++j) {
            solve_l(t.super_node(i, j));
            solve_l(t.black(i, j));
        }
    for (std::size_t i = 1; i <= l; ++i)
        for (std::size_t j = t.level_width(i) / 2; j-- > 0;) {
            solve_u(t.black(i, j));
            solve_u(t.super_node(i, j));
            split(t.super_node(i, j));
        }
    gather(x);
}

std::vector<double> SolveSession::solve(std::span<const double> b) {
    std::vector<double> x(f_.size(), 0.0);
    solve(b, x);
    return x;
}

std::vector<double> solve(const Factorization& f, std::span<const double> b) {
    SolveSession s(f);
    return s.solve(b);
}

}  // namespace hlu
