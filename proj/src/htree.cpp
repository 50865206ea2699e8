#include "hlu/htree.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "hlu/error.hpp"

namespace hlu {

const char* to_string(NodeKind kind) noexcept {
    switch (kind) {
        case NodeKind::red: return "red";
        case NodeKind::black: return "black";
        case NodeKind::super: return "super";
    }
    return "?";
}

NodeId HTree::add_node(NodeKind kind, std::size_t level, std::size_t index, std::size_t cluster_level,
                       std::size_t cluster) {
    HNode n;
    n.kind = kind;
    n.level = level;
    n.index = index;
    n.cluster_level = cluster_level;
    n.cluster = cluster;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

HTree::HTree(const SparseMatrix& m, NestedPartitioning np) : np_(std::move(np)) {
    if (m.size() != np_.size()) throw ShapeError("matrix and partitioning sizes differ");
    const std::size_t l = np_.depth();

    reds_.resize(l + 1);
    blacks_.resize(l + 1);
    supers_.resize(l + 1);
    for (std::size_t i = 0; i <= l; ++i) {
        const std::size_t w = std::size_t{1} << i;
        for (std::size_t j = 0; j < w; ++j) reds_[i].push_back(add_node(NodeKind::red, i, j, i, j));
        if (i == 0) continue;
        for (std::size_t j = 0; j < w / 2; ++j) {
            blacks_[i].push_back(add_node(NodeKind::black, i, j, i - 1, j));
            supers_[i].push_back(add_node(NodeKind::super, i, j, i - 1, j));
        }
    }
    for (std::size_t i = 1; i <= l; ++i) {
        for (std::size_t j = 0; j < blacks_[i].size(); ++j) {
            const NodeId b = blacks_[i][j], s = supers_[i][j];
            const NodeId r0 = reds_[i][2 * j], r1 = reds_[i][2 * j + 1];
            nodes_[b].parent = reds_[i - 1][j];
            nodes_[b].children = {r0, r1};
            nodes_[reds_[i - 1][j]].children = {b, no_node};
            nodes_[s].parent = b;
            nodes_[s].children = {r0, r1};
            nodes_[r0].parent = b;
            nodes_[r1].parent = b;
        }
    }

    // Leaf red nodes carry the clusters of P_l; one edge per nonzero block.
    const Partitioning& leaf = np_.level(l);
    for (std::size_t j = 0; j < leaf.cluster_count(); ++j) nodes_[reds_[l][j]].size = leaf.members(j).size();
    auto rp = m.row_ptr();
    auto ci = m.col_idx();
    auto val = m.values();
    for (std::size_t r = 0; r < m.size(); ++r) {
        const std::size_t to = leaf.cluster_of(r);
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
            if (val[k] == 0.0) continue;
            const std::size_t from = leaf.cluster_of(ci[k]);
            DenseMatrix& blk = edge_for_update(reds_[l][from], reds_[l][to]);
            blk(leaf.local_index(r), leaf.local_index(ci[k])) = val[k];
        }
    }

    // Undirected cluster adjacency per level, coarsened from the leaves.
    level_adj_.resize(l + 1);
    {
        std::vector<std::vector<std::size_t>> adj(leaf.cluster_count());
        for (std::size_t r = 0; r < m.size(); ++r)
            for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
                if (val[k] == 0.0) continue;
                const std::size_t a = leaf.cluster_of(r), b = leaf.cluster_of(ci[k]);
                if (a == b) continue;
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
        level_adj_[l] = std::move(adj);
    }
    for (std::size_t i = l; i-- > 0;) {
        std::vector<std::vector<std::size_t>> adj(std::size_t{1} << i);
        for (std::size_t c = 0; c < level_adj_[i + 1].size(); ++c)
            for (std::size_t d : level_adj_[i + 1][c])
                if ((c >> 1) != (d >> 1)) adj[c >> 1].push_back(d >> 1);
        level_adj_[i] = std::move(adj);
    }
    for (auto& lvl : level_adj_)
        for (auto& list : lvl) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
        }
}

std::string HTree::label(NodeId id) const {
    const HNode& n = node(id);
    const char tag = n.kind == NodeKind::red ? 'r' : n.kind == NodeKind::black ? 'b' : 's';
    return std::string(1, tag) + std::to_string(n.level) + "_" + std::to_string(n.index);
}

bool HTree::has_edge(NodeId from, NodeId to) const { return node(from).out.contains(to); }

const DenseMatrix& HTree::edge(NodeId from, NodeId to) const {
    const auto& out = node(from).out;
    auto it = out.find(to);
    if (it == out.end()) throw Error("no edge " + label(from) + " -> " + label(to));
    return it->second;
}

DenseMatrix& HTree::edge_for_update(NodeId from, NodeId to, bool* created) {
    HNode& src = nodes_.at(from);
    auto it = src.out.find(to);
    const bool fresh = it == src.out.end();
    if (fresh) {
        it = src.out.emplace(to, DenseMatrix(nodes_.at(to).size, src.size)).first;
        nodes_[to].in.insert(from);
    }
    if (created) *created = fresh;
    return it->second;
}

bool HTree::add_edge(NodeId from, NodeId to, const DenseMatrix& block) {
    if (block.rows() != node(to).size || block.cols() != node(from).size)
        throw ShapeError("edge " + label(from) + " -> " + label(to) + " has wrong shape");
    bool created = false;
    edge_for_update(from, to, &created) += block;
    return created;
}

void HTree::remove_edge(NodeId from, NodeId to) {
    nodes_.at(from).out.erase(to);
    nodes_.at(to).in.erase(from);
}

std::size_t HTree::edge_count() const noexcept {
    std::size_t c = 0;
    for (const auto& n : nodes_) c += n.out.size();
    return c;
}

bool HTree::is_active(NodeId id) const {
    const HNode& n = node(id);
    if (n.eliminated || n.absorbed) return false;
    if (n.kind == NodeKind::super && !n.formed) return false;
    return true;
}

std::vector<NodeId> HTree::active_successors(NodeId id) const {
    std::vector<NodeId> r;
    for (const auto& [v, blk] : node(id).out)
        if (v != id && !nodes_[v].eliminated && nodes_[v].size > 0) r.push_back(v);
    return r;
}

std::vector<NodeId> HTree::active_predecessors(NodeId id) const {
    std::vector<NodeId> r;
    for (NodeId v : node(id).in)
        if (v != id && !nodes_[v].eliminated && nodes_[v].size > 0) r.push_back(v);
    return r;
}

std::vector<NodeId> HTree::active_nodes() const {
    std::vector<NodeId> r;
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (is_active(id) && nodes_[id].size > 0) r.push_back(id);
    return r;
}

void HTree::set_size(NodeId id, std::size_t size) {
    HNode& n = nodes_.at(id);
    if (n.size == size) return;
    if (!n.out.empty() || !n.in.empty())
        throw Error("cannot resize " + label(id) + " while it has edges");
    n.size = size;
}

NodeId HTree::merge_red_nodes(std::size_t level, std::size_t j) {
    const NodeId s = super_node(level, j);
    const NodeId r[2] = {red(level, 2 * j), red(level, 2 * j + 1)};
    HNode& sn = nodes_[s];
    if (sn.formed) throw Error(label(s) + " already merged");
    const std::size_t m0 = nodes_[r[0]].size;
    const std::size_t m = m0 + nodes_[r[1]].size;
    const std::size_t off[2] = {0, m0};
    sn.size = m;

    std::map<NodeId, DenseMatrix> outs, ins;
    DenseMatrix self(m, m);
    bool has_self = false;
    for (int a = 0; a < 2; ++a) {
        for (const auto& [v, blk] : nodes_[r[a]].out) {
            if (v == r[0] || v == r[1]) {
                self.set_block(off[v == r[1]], off[a], blk);
                has_self = true;
                continue;
            }
            auto it = outs.try_emplace(v, nodes_[v].size, m).first;
            it->second.set_block(0, off[a], blk);
        }
        for (NodeId u : nodes_[r[a]].in) {
            if (u == r[0] || u == r[1]) continue;
            auto it = ins.try_emplace(u, m, nodes_[u].size).first;
            it->second.set_block(off[a], 0, nodes_[u].out.at(r[a]));
        }
    }
    for (int a = 0; a < 2; ++a) {
        for (const auto& [v, blk] : std::map<NodeId, DenseMatrix>(nodes_[r[a]].out)) remove_edge(r[a], v);
        for (NodeId u : std::set<NodeId>(nodes_[r[a]].in)) remove_edge(u, r[a]);
        nodes_[r[a]].absorbed = true;
    }
    sn.formed = true;
    if (has_self) add_edge(s, s, self);
    for (auto& [v, blk] : outs) add_edge(s, v, blk);
    for (auto& [u, blk] : ins) add_edge(u, s, blk);
    return s;
}

void HTree::mark_eliminated(NodeId id, std::optional<LuFactorization> pivot) {
    HNode& n = nodes_.at(id);
    if (n.eliminated) throw Error(label(id) + " eliminated twice");
    n.eliminated = true;
    n.order = next_order_++;
    n.pivot = std::move(pivot);
}

std::pair<std::size_t, std::size_t> HTree::lifted_clusters(NodeId u, NodeId v, std::size_t& level) const {
    const HNode& a = node(u);
    const HNode& b = node(v);
    level = std::min(a.cluster_level, b.cluster_level);
    return {NestedPartitioning::ancestor(a.cluster_level, a.cluster, level),
            NestedPartitioning::ancestor(b.cluster_level, b.cluster, level)};
}

std::size_t HTree::cluster_distance(std::size_t level, std::size_t a, std::size_t b) const {
    if (a == b) return 0;
    const auto& adj = level_adj_.at(level);
    if (std::binary_search(adj[a].begin(), adj[a].end(), b)) return 1;
    std::vector<std::size_t> dist(adj.size(), unreachable);
    std::deque<std::size_t> q{a};
    dist[a] = 0;
    while (!q.empty()) {
        const std::size_t c = q.front();
        q.pop_front();
        for (std::size_t d : adj[c]) {
            if (dist[d] != unreachable) continue;
            dist[d] = dist[c] + 1;
            if (d == b) return dist[d];
            q.push_back(d);
        }
    }
    return unreachable;
}

std::size_t HTree::node_distance(NodeId u, NodeId v) const {
    std::size_t level = 0;
    auto [a, b] = lifted_clusters(u, v, level);
    return cluster_distance(level, a, b);
}

bool HTree::is_well_separated(NodeId u, NodeId v) const {
    std::size_t level = 0;
    auto [a, b] = lifted_clusters(u, v, level);
    if (a == b) return false;
    const auto& list = level_adj_[level][a];
    return !std::binary_search(list.begin(), list.end(), b);
}

DenseMatrix HTree::dense_system(std::span<const NodeId> ids) const {
    std::map<NodeId, std::size_t> offset;
    std::size_t total = 0;
    for (NodeId id : ids) {
        offset[id] = total;
        total += node(id).size;
    }
    DenseMatrix a(total, total);
    for (NodeId u : ids)
        for (const auto& [v, blk] : node(u).out) {
            auto it = offset.find(v);
            if (it != offset.end()) a.set_block(it->second, offset[u], blk);
        }
    return a;
}

}  // namespace hlu
