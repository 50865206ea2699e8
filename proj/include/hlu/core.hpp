#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hlu/dense_matrix.hpp"

namespace hlu {

struct Entry {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;

    friend bool operator==(const Entry&, const Entry&) = default;
};

enum class Symmetry { general, symmetric };

/// Square sparse matrix. Built from coordinate entries (duplicates summed),
/// stored in sorted compressed-row form. Immutable after construction.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t n, std::vector<Entry> entries, Symmetry hint = Symmetry::general);

    std::size_t size() const noexcept { return n_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }
    Symmetry symmetry_hint() const noexcept { return hint_; }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    /// Entries in (row, col) order, one per stored coordinate.
    std::vector<Entry> entries() const;

    /// Stored value at (row, col), zero when absent.
    double at(std::size_t row, std::size_t col) const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;

    DenseMatrix to_dense() const;
    SparseMatrix transposed() const;
    bool is_structurally_symmetric() const;
    bool is_symmetric() const;

private:
    std::size_t n_ = 0;
    Symmetry hint_ = Symmetry::general;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// Surjective map from indices [0, n) to clusters [0, n_P). Members of each
/// cluster are kept in ascending index order.
class Partitioning {
public:
    Partitioning() = default;
    Partitioning(std::vector<std::size_t> cluster_of, std::size_t cluster_count);

    std::size_t size() const noexcept { return cluster_of_.size(); }
    std::size_t cluster_count() const noexcept { return offsets_.size() - 1; }
    std::size_t cluster_of(std::size_t index) const { return cluster_of_.at(index); }
    /// Position of `index` inside its cluster's member list.
    std::size_t local_index(std::size_t index) const { return local_.at(index); }
    std::span<const std::size_t> members(std::size_t cluster) const;
    std::span<const std::size_t> assignment() const noexcept { return cluster_of_; }

private:
    std::vector<std::size_t> cluster_of_;
    std::vector<std::size_t> local_;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> members_;
};

/// Quotient graph of a matrix under a partitioning: edge i -> j iff the
/// block A_{j,i} holds a nonzero value.
class AdjacencyGraph {
public:
    AdjacencyGraph() = default;
    explicit AdjacencyGraph(std::vector<std::vector<std::size_t>> out);

    std::size_t vertex_count() const noexcept { return out_.size(); }
    std::size_t edge_count() const noexcept;
    std::span<const std::size_t> successors(std::size_t v) const { return out_.at(v); }
    bool has_edge(std::size_t from, std::size_t to) const;
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

private:
    std::vector<std::vector<std::size_t>> out_;
};

AdjacencyGraph build_adjacency(const SparseMatrix& m, const Partitioning& p);

/// Dense copy of A_{i,j}: rows from cluster i, columns from cluster j.
DenseMatrix extract_block(const SparseMatrix& m, const Partitioning& p, std::size_t i, std::size_t j);

SparseMatrix load_matrix_market(const std::string& path);
SparseMatrix read_matrix_market(std::istream& in);
void save_matrix_market(const SparseMatrix& m, const std::string& path);
void write_matrix_market(const SparseMatrix& m, std::ostream& out);

}  // namespace hlu
