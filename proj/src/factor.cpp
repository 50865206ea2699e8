#include "hlu/factor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "hlu/error.hpp"
#include "hlu/partition.hpp"

namespace hlu {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Distance-1 and distance-2 cluster counts around c at one level.
std::pair<std::size_t, std::size_t> ring_counts(const HTree& t, std::size_t level, std::size_t c) {
    auto n1 = t.cluster_neighbors(level, c);
    std::vector<std::size_t> second;
    for (std::size_t d : n1)
        for (std::size_t e : t.cluster_neighbors(level, d))
            if (e != c && !std::binary_search(n1.begin(), n1.end(), e)) second.push_back(e);
    std::sort(second.begin(), second.end());
    second.erase(std::unique(second.begin(), second.end()), second.end());
    return {n1.size(), second.size()};
}

}  // namespace

void FactorConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error("epsilon must lie in (0, 1]");
    if (depth == 0 && target_leaf == 0) throw Error("target_leaf must be positive");
}

const char* to_string(StepEvent::Kind kind) noexcept {
    switch (kind) {
        case StepEvent::Kind::merge: return "merge";
        case StepEvent::Kind::compress: return "compress";
        case StepEvent::Kind::eliminate: return "eliminate";
    }
    return "?";
}

FactorEngine::FactorEngine(HTree& tree, FactorConfig cfg, StepObserver* observer)
    : tree_(tree), cfg_(cfg), observer_(observer) {
    cfg_.validate();
    stats_.n = tree.matrix_size();
    stats_.depth = tree.depth();
}

void FactorEngine::emit(const StepEvent& e) {
    if (observer_) observer_->on_step(e, tree_);
}

void FactorEngine::check_created(NodeId from, NodeId to) {
    ++stats_.edges_created;
    if (!cfg_.instrumentation) return;
    const std::size_t d = tree_.node_distance(from, to);
    ++stats_.distance_checks;
    if (d > 2) ++stats_.distance_violations;
    if (d != unreachable) stats_.max_created_distance = std::max(stats_.max_created_distance, d);
}

void FactorEngine::merge_level(std::size_t level) {
    const auto t0 = Clock::now();
    for (std::size_t j = 0; j < tree_.level_width(level) / 2; ++j) tree_.merge_red_nodes(level, j);
    stats_.times.merge += seconds_since(t0);
    emit({StepEvent::Kind::merge, level, no_node, {}, 0, false});
}

void FactorEngine::eliminate_node(NodeId p) {
    const HNode& node = tree_.node(p);
    const std::size_t level = node.level;
    if (node.size == 0) {
        tree_.mark_eliminated(p, std::nullopt);
        emit({StepEvent::Kind::eliminate, level, p, {}, 0, true});
        return;
    }
    if (!tree_.has_edge(p, p))
        throw SingularPivot("pivot block of " + tree_.label(p) + " is structurally zero", tree_.label(p));

    auto t0 = Clock::now();
    const std::string name = tree_.label(p);
    LuFactorization lu = LuFactorization::factor(tree_.edge(p, p), name.c_str());
    const std::vector<NodeId> ins = tree_.active_predecessors(p);
    const std::vector<NodeId> outs = tree_.active_successors(p);
    std::vector<DenseMatrix> x(ins.size());
    for (std::size_t a = 0; a < ins.size(); ++a) x[a] = lu.solve(tree_.edge(ins[a], p));
    stats_.times.pivot += seconds_since(t0);

    t0 = Clock::now();
    for (NodeId j : outs) {
        const DenseMatrix& apj = tree_.edge(p, j);
        for (std::size_t a = 0; a < ins.size(); ++a) {
            bool created = false;
            DenseMatrix& target = tree_.edge_for_update(ins[a], j, &created);
            gemm(-1.0, apj, x[a], 1.0, target);
            if (created) check_created(ins[a], j);
        }
    }
    stats_.times.gemm += seconds_since(t0);

    tree_.mark_eliminated(p, std::move(lu));
    emit({StepEvent::Kind::eliminate, level, p, {}, 0, false});
}

CompressionRecord FactorEngine::compress_super_node(NodeId s) {
    const HNode& sn = tree_.node(s);
    if (sn.kind != NodeKind::super) throw Error(tree_.label(s) + " is not a super node");
    if (sn.eliminated) throw Error(tree_.label(s) + " is already eliminated");

    CompressionRecord rec;
    rec.node = s;
    {
        std::vector<NodeId> cand = tree_.active_successors(s);
        auto preds = tree_.active_predecessors(s);
        cand.insert(cand.end(), preds.begin(), preds.end());
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (NodeId v : cand)
            if (tree_.is_well_separated(s, v)) rec.partners.push_back(v);
    }
    const std::size_t level = sn.level;
    if (rec.partners.empty()) {
        emit({StepEvent::Kind::compress, level, s, {}, 0, true});
        return rec;
    }

    const std::size_t m = sn.size;
    std::vector<std::size_t> off;
    std::size_t half = 0;
    for (NodeId v : rec.partners) {
        off.push_back(half);
        half += tree_.node(v).size;
    }
    DenseMatrix stacked(2 * half, m);
    for (std::size_t k = 0; k < rec.partners.size(); ++k) {
        const NodeId v = rec.partners[k];
        if (tree_.has_edge(s, v)) stacked.set_block(off[k], 0, tree_.edge(s, v));
        if (tree_.has_edge(v, s)) stacked.set_block(half + off[k], 0, tree_.edge(v, s).transposed());
    }
    rec.stacked_rows = stacked.rows();
    const double sq = stacked.squared_norm();
    rec.stacked_norm = std::sqrt(sq);
    frob_accum_ += sq;

    auto t0 = Clock::now();
    TruncatedSvd f = truncated_svd(stacked, TruncationRule{cfg_.rule, cfg_.epsilon}, std::sqrt(frob_accum_));
    stats_.times.svd += seconds_since(t0);
    rec.rank = f.rank;
    rec.dropped_energy = f.dropped_energy;

    if (cfg_.instrumentation && rec.stacked_norm > 0.0) {
        DenseMatrix approx = multiply(f.left, f.right.transposed());
        const double err = (stacked - approx).frobenius_norm();
        const double mismatch = std::abs(err - f.dropped_energy) / rec.stacked_norm;
        stats_.max_compression_mismatch = std::max(stats_.max_compression_mismatch, mismatch);
    }

    for (NodeId v : rec.partners) {
        tree_.remove_edge(s, v);
        tree_.remove_edge(v, s);
    }
    const NodeId b = tree_.black(level, sn.index);
    const NodeId pb = tree_.node(b).parent;
    const std::size_t r = f.rank;
    tree_.set_size(b, r);
    tree_.set_size(pb, r);
    if (r > 0) {
        for (std::size_t k = 0; k < rec.partners.size(); ++k) {
            const NodeId v = rec.partners[k];
            const std::size_t mk = tree_.node(v).size;
            if (tree_.add_edge(pb, v, f.left.block(off[k], 0, mk, r))) check_created(pb, v);
            if (tree_.add_edge(v, pb, f.left.block(half + off[k], 0, mk, r).transposed())) check_created(v, pb);
        }
        if (tree_.add_edge(s, b, f.right.transposed())) check_created(s, b);
        if (tree_.add_edge(b, s, f.right)) check_created(b, s);
        const DenseMatrix neg = DenseMatrix::identity(r, -1.0);
        if (tree_.add_edge(b, pb, neg)) check_created(b, pb);
        if (tree_.add_edge(pb, b, neg)) check_created(pb, b);
        stats_.auxiliary_variables += 2 * r;
    }
    emit({StepEvent::Kind::compress, level, s, rec.partners, r, false});
    return rec;
}

void FactorEngine::run() {
    const auto start = Clock::now();
    const std::size_t l = tree_.depth();
    for (std::size_t i = l; i >= 1; --i) {
        merge_level(i);
        const std::size_t width = tree_.level_width(i) / 2;
        LevelStats ls;
        ls.level = i;
        ls.super_nodes = width;
        std::size_t size_sum = 0, rank_sum = 0, compressed_size_sum = 0;
        for (std::size_t j = 0; j < width; ++j) {
            const NodeId s = tree_.super_node(i, j);
            const std::size_t sz = tree_.node(s).size;
            size_sum += sz;
            ls.max_size = std::max(ls.max_size, sz);
            CompressionRecord rec = compress_super_node(s);
            if (!rec.partners.empty()) {
                ++ls.compressed;
                rank_sum += rec.rank;
                compressed_size_sum += sz;
                ls.max_rank = std::max(ls.max_rank, rec.rank);
            }
            eliminate_node(s);
            eliminate_node(tree_.black(i, j));
            auto [k1, k2] = ring_counts(tree_, i - 1, j);
            ls.kappa1 = std::max(ls.kappa1, k1);
            ls.kappa2 = std::max(ls.kappa2, k2);
        }
        ls.avg_size = width ? double(size_sum) / double(width) : 0.0;
        if (ls.compressed > 0) {
            ls.avg_rank = double(rank_sum) / double(ls.compressed);
            if (compressed_size_sum > 0) ls.compression_ratio = double(rank_sum) / double(compressed_size_sum);
        }
        stats_.levels.push_back(ls);
    }
    const HNode& root = tree_.node(tree_.root());
    if (root.size != 0) throw Error("root node acquired variables");

    if (!stats_.levels.empty()) {
        const double dl = double(stats_.levels.front().max_size);
        double alpha = 1.0;
        for (const LevelStats& ls : stats_.levels) {
            if (ls.level == l || dl == 0.0) continue;
            const double ratio = double(ls.max_size) / dl;
            if (ratio > 0.0) alpha = std::max(alpha, std::pow(ratio, 1.0 / double(l - ls.level)));
        }
        stats_.alpha_hat = alpha;
    }
    stats_.times.total += seconds_since(start);
}

Factorization::Factorization(std::unique_ptr<HTree> tree, FactorConfig cfg, FactorStats stats)
    : tree_(std::move(tree)), cfg_(cfg), stats_(std::move(stats)) {
    const HTree& t = *tree_;
    offset_.assign(t.node_count(), 0);
    for (NodeId id = 0; id < t.node_count(); ++id) {
        offset_[id] = scratch_;
        scratch_ += t.node(id).size;
    }

    std::vector<NodeId> order(t.eliminated_count(), no_node);
    for (NodeId id = 0; id < t.node_count(); ++id) {
        const HNode& n = t.node(id);
        if (n.eliminated) order[n.order] = id;
        else if (n.size > 0 && !n.absorbed) throw Error(t.label(id) + " was never eliminated");
    }
    plan_index_.assign(t.node_count(), no_node);
    plan_.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        plan_index_[order[k]] = k;
        PlanNode pn;
        pn.id = order[k];
        pn.offset = offset_[order[k]];
        pn.size = t.node(order[k]).size;
        pn.pivot = t.node(order[k]).pivot ? &*t.node(order[k]).pivot : nullptr;
        plan_.push_back(std::move(pn));
    }
    for (PlanNode& pn : plan_) {
        if (pn.size == 0) continue;
        const HNode& n = t.node(pn.id);
        for (const auto& [q, blk] : n.out) {
            const HNode& qn = t.node(q);
            if (q != pn.id && qn.eliminated && qn.order > n.order && qn.size > 0)
                pn.later_out.push_back({plan_index_[q], &blk});
        }
        for (NodeId q : n.in) {
            const HNode& qn = t.node(q);
            if (q != pn.id && qn.eliminated && qn.order > n.order && qn.size > 0)
                pn.later_in.push_back({plan_index_[q], &qn.out.at(pn.id)});
        }
    }
}

namespace {

Factorization run_factorization(const SparseMatrix& m, NestedPartitioning np, const FactorConfig& cfg,
                                StepObserver* observer, double partition_time) {
    auto tree = std::make_unique<HTree>(m, std::move(np));
    FactorEngine engine(*tree, cfg, observer);
    engine.stats().depth_clamped = tree->partitioning().depth_clamped();
    engine.stats().warnings = tree->partitioning().warnings();
    engine.stats().times.partition = partition_time;
    engine.run();
    FactorStats stats = std::move(engine.stats());
    return Factorization(std::move(tree), cfg, std::move(stats));
}

}  // namespace

Factorization factorize(const SparseMatrix& m, NestedPartitioning np, const FactorConfig& cfg,
                        StepObserver* observer) {
    return run_factorization(m, std::move(np), cfg, observer, 0.0);
}

Factorization factorize(const SparseMatrix& m, const FactorConfig& cfg, StepObserver* observer) {
    cfg.validate();
    const auto t0 = Clock::now();
    const std::size_t depth = cfg.depth ? cfg.depth : choose_depth(m.size(), cfg.target_leaf);
    NestedPartitioning np = build_nested_partitioning(m, depth, cfg.seed);
    return run_factorization(m, std::move(np), cfg, observer, seconds_since(t0));
}

}  // namespace hlu
