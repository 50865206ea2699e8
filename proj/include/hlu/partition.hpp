#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hlu/core.hpp"

namespace hlu {

/// Undirected, unweighted vertex graph of a matrix (self loops dropped).
class Graph {
public:
    Graph() = default;
    /// Builds from adjacency lists; lists are symmetrized and deduplicated.
    explicit Graph(std::vector<std::vector<std::size_t>> adjacency);
    static Graph from_matrix(const SparseMatrix& m);

    std::size_t vertex_count() const noexcept { return offsets_.size() - 1; }
    std::span<const std::size_t> neighbors(std::size_t v) const {
        return std::span<const std::size_t>(adj_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
    }

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> adj_;
};

struct Bisection {
    std::vector<std::size_t> left;   ///< part containing the smallest index
    std::vector<std::size_t> right;
};

/// Size imbalance tolerated by the refinement pass.
std::size_t bisection_tolerance(std::size_t cluster_size);

/// Number of graph edges with one endpoint in each part.
std::size_t cut_size(const Graph& g, const Bisection& b);

/// Splits `members` in two: BFS growth from a pseudo-peripheral vertex,
/// then one Fiduccia-Mattheyses pass under the balance constraint.
Bisection bisect(const Graph& g, std::span<const std::size_t> members, std::uint64_t seed = 0);

/// l = max(1, round(log2(n / target_leaf)))
std::size_t choose_depth(std::size_t n, std::size_t target_leaf);

/// Partitionings P_0..P_l with 2^i clusters at level i. Children of cluster
/// j at level i are clusters 2j and 2j+1 at level i+1.
class NestedPartitioning {
public:
    NestedPartitioning() = default;
    explicit NestedPartitioning(std::vector<Partitioning> levels);

    std::size_t depth() const noexcept { return levels_.size() - 1; }
    std::size_t size() const noexcept { return levels_.front().size(); }
    const Partitioning& level(std::size_t i) const { return levels_.at(i); }
    std::span<const std::size_t> members(std::size_t level, std::size_t cluster) const {
        return levels_.at(level).members(cluster);
    }
    static std::size_t parent(std::size_t cluster) noexcept { return cluster / 2; }
    /// Ancestor of (level, cluster) at `target_level` <= level.
    static std::size_t ancestor(std::size_t level, std::size_t cluster, std::size_t target_level) noexcept {
        return cluster >> (level - target_level);
    }

    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    bool depth_clamped() const noexcept { return depth_clamped_; }

private:
    friend NestedPartitioning build_nested_partitioning(const SparseMatrix&, std::size_t, std::uint64_t);
    std::vector<Partitioning> levels_;
    std::vector<std::string> warnings_;
    bool depth_clamped_ = false;
};

/// Recursive bisection to the requested depth. The depth is clamped (and a
/// warning recorded) when 2^depth > n or a cluster becomes a singleton.
NestedPartitioning build_nested_partitioning(const SparseMatrix& m, std::size_t depth, std::uint64_t seed = 0);

/// Leaf clusters whose induced subgraph is disconnected.
std::vector<std::size_t> disconnected_leaves(const Graph& g, const NestedPartitioning& np);

}  // namespace hlu
