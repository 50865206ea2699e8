#include "hlu/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hlu/error.hpp"

namespace hlu {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<Entry> entries, Symmetry hint) : n_(n), hint_(hint) {
    for (const Entry& e : entries) {
        if (e.row >= n || e.col >= n) throw ShapeError("matrix entry index out of range");
        if (!std::isfinite(e.value)) throw Error("matrix entry is not finite");
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

    row_ptr_.assign(n + 1, 0);
    col_idx_.reserve(entries.size());
    values_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size();) {
        Entry e = entries[k++];
        while (k < entries.size() && entries[k].row == e.row && entries[k].col == e.col) e.value += entries[k++].value;
        col_idx_.push_back(e.col);
        values_.push_back(e.value);
        ++row_ptr_[e.row + 1];
    }
    std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
}

std::vector<Entry> SparseMatrix::entries() const {
    std::vector<Entry> out;
    out.reserve(values_.size());
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_idx_[k], values_[k]});
    return out;
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
    if (row >= n_ || col >= n_) throw ShapeError("index out of range");
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != n_ || y.size() != n_) throw ShapeError("mat-vec length mismatch");
    for (std::size_t r = 0; r < n_; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_idx_[k]];
        y[r] = s;
    }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(n_, n_);
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) = values_[k];
    return d;
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<Entry> t;
    t.reserve(values_.size());
    for (const Entry& e : entries()) t.push_back({e.col, e.row, e.value});
    return SparseMatrix(n_, std::move(t), hint_);
}

bool SparseMatrix::is_structurally_symmetric() const {
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const std::size_t c = col_idx_[k];
            const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[c]);
            const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[c + 1]);
            if (!std::binary_search(first, last, r)) return false;
        }
    return true;
}

bool SparseMatrix::is_symmetric() const {
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (at(col_idx_[k], r) != values_[k]) return false;
    return true;
}

Partitioning::Partitioning(std::vector<std::size_t> cluster_of, std::size_t cluster_count)
    : cluster_of_(std::move(cluster_of)), local_(cluster_of_.size()) {
    std::vector<std::size_t> counts(cluster_count, 0);
    for (std::size_t c : cluster_of_) {
        if (c >= cluster_count) throw ShapeError("cluster id out of range");
        ++counts[c];
    }
    for (std::size_t c = 0; c < cluster_count; ++c)
        if (counts[c] == 0) throw Error("partitioning is not surjective: cluster " + std::to_string(c) + " is empty");

    offsets_.assign(cluster_count + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), offsets_.begin() + 1);
    members_.resize(cluster_of_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < cluster_of_.size(); ++i) {
        const std::size_t c = cluster_of_[i];
        local_[i] = fill[c] - offsets_[c];
        members_[fill[c]++] = i;
    }
}

std::span<const std::size_t> Partitioning::members(std::size_t cluster) const {
    if (cluster >= cluster_count()) throw ShapeError("cluster id out of range");
    return std::span<const std::size_t>(members_).subspan(offsets_[cluster], offsets_[cluster + 1] - offsets_[cluster]);
}

AdjacencyGraph::AdjacencyGraph(std::vector<std::vector<std::size_t>> out) : out_(std::move(out)) {
    for (auto& succ : out_) {
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        for (std::size_t v : succ)
            if (v >= out_.size()) throw ShapeError("graph edge target out of range");
    }
}

std::size_t AdjacencyGraph::edge_count() const noexcept {
    std::size_t e = 0;
    for (const auto& succ : out_) e += succ.size();
    return e;
}

bool AdjacencyGraph::has_edge(std::size_t from, std::size_t to) const {
    const auto& succ = out_.at(from);
    return std::binary_search(succ.begin(), succ.end(), to);
}

std::vector<std::pair<std::size_t, std::size_t>> AdjacencyGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t v = 0; v < out_.size(); ++v)
        for (std::size_t w : out_[v]) e.emplace_back(v, w);
    return e;
}

AdjacencyGraph build_adjacency(const SparseMatrix& m, const Partitioning& p) {
    if (p.size() != m.size()) throw ShapeError("partitioning does not cover the matrix");
    std::vector<std::vector<std::size_t>> out(p.cluster_count());
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto val = m.values();
    for (std::size_t r = 0; r < m.size(); ++r) {
        const std::size_t to = p.cluster_of(r);
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
            if (val[k] != 0.0) out[p.cluster_of(ci[k])].push_back(to);
    }
    return AdjacencyGraph(std::move(out));
}

DenseMatrix extract_block(const SparseMatrix& m, const Partitioning& p, std::size_t i, std::size_t j) {
    if (p.size() != m.size()) throw ShapeError("partitioning does not cover the matrix");
    const auto rows = p.members(i);
    const auto cols = p.members(j);
    DenseMatrix b(rows.size(), cols.size());
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto val = m.values();
    for (std::size_t a = 0; a < rows.size(); ++a) {
        const std::size_t r = rows[a];
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
            if (p.cluster_of(ci[k]) == j) b(a, p.local_index(ci[k])) = val[k];
    }
    return b;
}

}  // namespace hlu
