#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hlu/core.hpp"
#include "hlu/dense.hpp"
#include "hlu/htree.hpp"

namespace hlu {

struct FactorConfig {
    double epsilon = 1e-4;
    TruncationKind rule = TruncationKind::relative_sigma;
    std::size_t depth = 0;         ///< 0: derive from target_leaf
    std::size_t target_leaf = 32;
    std::uint64_t seed = 0;
    bool instrumentation = false;  ///< distance checks and reconstruction audits

    void validate() const;
};

struct LevelStats {
    std::size_t level = 0;
    std::size_t super_nodes = 0;
    std::size_t max_size = 0;      ///< d_i
    double avg_size = 0.0;
    std::size_t compressed = 0;    ///< super nodes with at least one well-separated partner
    double avg_rank = 0.0;         ///< over compressed nodes
    std::size_t max_rank = 0;
    double compression_ratio = 0.0;
    std::size_t kappa1 = 0;        ///< max number of distance-1 clusters
    std::size_t kappa2 = 0;        ///< max number of distance-2 clusters
};

struct PhaseTimes {
    double partition = 0.0;
    double merge = 0.0;
    double svd = 0.0;
    double gemm = 0.0;
    double pivot = 0.0;
    double total = 0.0;
};

struct FactorStats {
    std::size_t n = 0;
    std::size_t depth = 0;
    bool depth_clamped = false;
    std::vector<std::string> warnings;
    std::vector<LevelStats> levels;  ///< ordered from level l down to 1
    PhaseTimes times;
    std::size_t auxiliary_variables = 0;
    std::size_t edges_created = 0;
    std::size_t distance_checks = 0;
    std::size_t distance_violations = 0;
    std::size_t max_created_distance = 0;
    double max_compression_mismatch = 0.0;  ///< |reconstruction - dropped| / ||M||
    double alpha_hat = 0.0;
};

struct StepEvent {
    enum class Kind { merge, compress, eliminate };
    Kind kind = Kind::merge;
    std::size_t level = 0;
    NodeId node = no_node;            ///< no_node for a whole-level merge
    std::vector<NodeId> partners;     ///< compress only
    std::size_t rank = 0;
    bool noop = false;
};

const char* to_string(StepEvent::Kind kind) noexcept;

class StepObserver {
public:
    virtual ~StepObserver() = default;
    virtual void on_step(const StepEvent& event, const HTree& tree) = 0;
};

struct CompressionRecord {
    NodeId node = no_node;
    std::vector<NodeId> partners;
    std::size_t rank = 0;
    std::size_t stacked_rows = 0;
    double stacked_norm = 0.0;
    double dropped_energy = 0.0;
};

/// Drives merge / compress / eliminate on a tree. The individual steps are
/// public so tests can exercise them in isolation.
class FactorEngine {
public:
    FactorEngine(HTree& tree, FactorConfig cfg, StepObserver* observer = nullptr);

    void merge_level(std::size_t level);
    void eliminate_node(NodeId p);
    CompressionRecord compress_super_node(NodeId s);
    void run();

    FactorStats& stats() noexcept { return stats_; }

private:
    void check_created(NodeId from, NodeId to);
    void emit(const StepEvent& e);

    HTree& tree_;
    FactorConfig cfg_;
    StepObserver* observer_;
    FactorStats stats_;
    double frob_accum_ = 0.0;
};

/// Immutable result of a factorization; shareable between solve sessions.
class Factorization {
public:
    struct Link {
        std::size_t node;  ///< index into the plan, not a NodeId
        const DenseMatrix* block;
    };
    struct PlanNode {
        NodeId id = no_node;
        std::size_t offset = 0;
        std::size_t size = 0;
        const LuFactorization* pivot = nullptr;
        std::vector<Link> later_out;  ///< p -> q with order(q) > order(p)
        std::vector<Link> later_in;   ///< q -> p with order(q) > order(p)
    };

    Factorization(std::unique_ptr<HTree> tree, FactorConfig cfg, FactorStats stats);

    const HTree& tree() const noexcept { return *tree_; }
    const FactorConfig& config() const noexcept { return cfg_; }
    const FactorStats& stats() const noexcept { return stats_; }
    std::size_t size() const noexcept { return tree_->matrix_size(); }

    /// Nodes in elimination order.
    const std::vector<PlanNode>& plan() const noexcept { return plan_; }
    std::size_t plan_index(NodeId id) const { return plan_index_.at(id); }
    /// Scratch length needed by a solve session (sum of all node sizes).
    std::size_t scratch_size() const noexcept { return scratch_; }
    std::size_t scratch_offset(NodeId id) const { return offset_.at(id); }

private:
    std::unique_ptr<HTree> tree_;
    FactorConfig cfg_;
    FactorStats stats_;
    std::vector<PlanNode> plan_;
    std::vector<std::size_t> plan_index_;
    std::vector<std::size_t> offset_;
    std::size_t scratch_ = 0;
};

/// Partition, build the tree and run the level-by-level factorization.
Factorization factorize(const SparseMatrix& m, const FactorConfig& cfg, StepObserver* observer = nullptr);

/// Same, on a caller-supplied nested partitioning.
Factorization factorize(const SparseMatrix& m, NestedPartitioning np, const FactorConfig& cfg,
                        StepObserver* observer = nullptr);

}  // namespace hlu
