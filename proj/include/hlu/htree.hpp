#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hlu/core.hpp"
#include "hlu/dense.hpp"
#include "hlu/partition.hpp"

namespace hlu {

using NodeId = std::size_t;
inline constexpr NodeId no_node = std::numeric_limits<NodeId>::max();
inline constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

enum class NodeKind { red, black, super };

const char* to_string(NodeKind kind) noexcept;

/// A vertex of the hierarchical tree. Edge payloads live on the source
/// node: out.at(v) is Mat(e_{this -> v}), of shape size(v) x size(this).
struct HNode {
    NodeKind kind = NodeKind::red;
    std::size_t level = 0;  ///< tree level (superscript)
    std::size_t index = 0;  ///< position within its level
    std::size_t cluster_level = 0;
    std::size_t cluster = 0;
    std::size_t size = 0;
    NodeId parent = no_node;
    std::array<NodeId, 2> children{no_node, no_node};

    bool formed = false;     ///< super node: siblings have been merged
    bool absorbed = false;   ///< red node: merged into its super node
    bool eliminated = false;
    std::size_t order = unreachable;
    std::optional<LuFactorization> pivot;

    std::map<NodeId, DenseMatrix> out;
    std::set<NodeId> in;
};

/// Red/black/super nodes over a nested partitioning plus the dynamic
/// interaction edges that represent the (extended) linear system.
///
/// Distances are measured in the adjacency graphs of the original matrix,
/// cached per level and treated as undirected.
class HTree {
public:
    HTree(const SparseMatrix& m, NestedPartitioning np);

    std::size_t depth() const noexcept { return np_.depth(); }
    std::size_t matrix_size() const noexcept { return np_.size(); }
    const NestedPartitioning& partitioning() const noexcept { return np_; }

    NodeId root() const noexcept { return reds_[0][0]; }
    NodeId red(std::size_t level, std::size_t j) const { return reds_.at(level).at(j); }
    NodeId black(std::size_t level, std::size_t j) const { return blacks_.at(level).at(j); }
    NodeId super_node(std::size_t level, std::size_t j) const { return supers_.at(level).at(j); }
    std::size_t level_width(std::size_t level) const { return reds_.at(level).size(); }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    const HNode& node(NodeId id) const { return nodes_.at(id); }
    std::string label(NodeId id) const;

    bool has_edge(NodeId from, NodeId to) const;
    const DenseMatrix& edge(NodeId from, NodeId to) const;
    /// Payload of from -> to, created as a zero block when absent.
    /// `created` reports whether the edge was new.
    DenseMatrix& edge_for_update(NodeId from, NodeId to, bool* created = nullptr);
    /// Adds (or creates) an edge; returns true when it did not exist.
    bool add_edge(NodeId from, NodeId to, const DenseMatrix& block);
    void remove_edge(NodeId from, NodeId to);
    std::size_t edge_count() const noexcept;

    /// Uneliminated neighbours with nonzero size, in ascending id order.
    std::vector<NodeId> active_successors(NodeId id) const;
    std::vector<NodeId> active_predecessors(NodeId id) const;
    bool is_active(NodeId id) const;
    std::vector<NodeId> active_nodes() const;

    void set_size(NodeId id, std::size_t size);

    /// Forms s_j^{[level]} from its two red siblings.
    NodeId merge_red_nodes(std::size_t level, std::size_t j);

    /// Records the elimination of `id` with its factorized pivot block.
    void mark_eliminated(NodeId id, std::optional<LuFactorization> pivot);
    std::size_t eliminated_count() const noexcept { return next_order_; }

    std::size_t node_distance(NodeId u, NodeId v) const;
    bool is_well_separated(NodeId u, NodeId v) const;
    /// Shortest path between clusters a and b in the adjacency graph at `level`.
    std::size_t cluster_distance(std::size_t level, std::size_t a, std::size_t b) const;
    std::span<const std::size_t> cluster_neighbors(std::size_t level, std::size_t c) const {
        return level_adj_.at(level).at(c);
    }

    /// Dense matrix of the system restricted to `ids`, blocks laid out in
    /// the given order.
    DenseMatrix dense_system(std::span<const NodeId> ids) const;

private:
    NodeId add_node(NodeKind kind, std::size_t level, std::size_t index, std::size_t cluster_level,
                    std::size_t cluster);
    std::pair<std::size_t, std::size_t> lifted_clusters(NodeId u, NodeId v, std::size_t& level) const;

    NestedPartitioning np_;
    std::vector<HNode> nodes_;
    std::vector<std::vector<NodeId>> reds_, blacks_, supers_;
    std::vector<std::vector<std::vector<std::size_t>>> level_adj_;
    std::size_t next_order_ = 0;
};

}  // namespace hlu
