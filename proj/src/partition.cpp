#include "hlu/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <utility>

#include "hlu/error.hpp"

namespace hlu {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::size_t npos = static_cast<std::size_t>(-1);

// Reusable scratch for bisecting many clusters of one graph: maps a global
// vertex to its position inside the cluster being split.
class Bisector {
public:
    explicit Bisector(const Graph& g) : g_(g), local_(g.vertex_count(), npos) {}

    Bisection run(std::span<const std::size_t> members, std::uint64_t seed);

private:
    void build_local(std::span<const std::size_t> members);
    std::size_t farthest_from(std::size_t start, std::vector<std::size_t>& dist) const;
    std::size_t pseudo_peripheral(std::size_t start) const;
    void grow(std::size_t start, std::vector<int>& side) const;
    void refine(std::vector<int>& side) const;
    void reconnect(std::vector<int>& side) const;
    std::pair<std::size_t, std::size_t> score(const std::vector<int>& side) const;

    const Graph& g_;
    std::vector<std::size_t> local_;
    std::vector<std::size_t> global_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> adj_;
};

void Bisector::build_local(std::span<const std::size_t> members) {
    global_.assign(members.begin(), members.end());
    std::sort(global_.begin(), global_.end());
    for (std::size_t i = 0; i < global_.size(); ++i) local_[global_[i]] = i;
    offsets_.assign(1, 0);
    adj_.clear();
    for (std::size_t v : global_) {
        for (std::size_t w : g_.neighbors(v))
            if (local_[w] != npos) adj_.push_back(local_[w]);
        offsets_.push_back(adj_.size());
    }
}

std::size_t Bisector::farthest_from(std::size_t start, std::vector<std::size_t>& dist) const {
    dist.assign(global_.size(), npos);
    std::vector<std::size_t> queue{start};
    dist[start] = 0;
    std::size_t far = start;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        const std::size_t v = queue[h];
        if (dist[v] > dist[far] || (dist[v] == dist[far] && v < far)) far = v;
        for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
            const std::size_t w = adj_[k];
            if (dist[w] == npos) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return far;
}

std::size_t Bisector::pseudo_peripheral(std::size_t start) const {
    std::vector<std::size_t> dist;
    std::size_t current = start;
    std::size_t ecc = 0;
    for (int it = 0; it < 8; ++it) {
        const std::size_t far = farthest_from(current, dist);
        if (dist[far] <= ecc && it > 0) break;
        ecc = dist[far];
        current = far;
    }
    return current;
}

void Bisector::grow(std::size_t start, std::vector<int>& side) const {
    const std::size_t k = global_.size();
    const std::size_t target = k / 2;
    side.assign(k, 1);
    std::vector<char> seen(k, 0);
    std::vector<std::size_t> queue{start};
    seen[start] = 1;
    std::size_t taken = 0;
    std::size_t head = 0;
    std::size_t next_unvisited = 0;
    while (taken < target) {
        if (head == queue.size()) {
            while (seen[next_unvisited]) ++next_unvisited;
            seen[next_unvisited] = 1;
            queue.push_back(next_unvisited);
        }
        const std::size_t v = queue[head++];
        side[v] = 0;
        ++taken;
        for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
            const std::size_t w = adj_[e];
            if (!seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
        }
    }
}

void Bisector::refine(std::vector<int>& side) const {
    const std::size_t k = global_.size();
    const long tol = static_cast<long>(bisection_tolerance(k));
    std::vector<long> gain(k, 0);
    long sizes[2] = {0, 0};
    for (std::size_t v = 0; v < k; ++v) {
        ++sizes[side[v]];
        for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) gain[v] += side[adj_[e]] != side[v] ? 1 : -1;
    }

    using Item = std::pair<long, long>;  // (gain, -vertex): ties go to the smaller vertex
    std::priority_queue<Item> heaps[2];
    for (std::size_t v = 0; v < k; ++v) heaps[side[v]].emplace(gain[v], -static_cast<long>(v));
    std::vector<char> locked(k, 0);

    auto top_valid = [&](int s) -> long {
        auto& h = heaps[s];
        while (!h.empty()) {
            const auto [g, nv] = h.top();
            const auto v = static_cast<std::size_t>(-nv);
            if (!locked[v] && side[v] == s && gain[v] == g) return static_cast<long>(v);
            h.pop();
        }
        return -1;
    };

    std::vector<std::size_t> moves;
    long cumulative = 0, best = 0;
    std::size_t best_prefix = 0;
    long best_imbalance = std::labs(sizes[0] - sizes[1]);
    const std::size_t patience = std::max<std::size_t>(64, k / 16);

    while (moves.size() < k && moves.size() - best_prefix < patience) {
        long cand = -1;
        for (int s = 0; s < 2; ++s) {
            const long imbalance_after = std::labs((sizes[s] - 1) - (sizes[1 - s] + 1));
            if (sizes[s] <= 1 || imbalance_after > tol) continue;
            const long v = top_valid(s);
            if (v < 0) continue;
            if (cand < 0 || gain[v] > gain[cand] || (gain[v] == gain[cand] && sizes[s] > sizes[side[cand]])) cand = v;
        }
        if (cand < 0) break;
        const auto v = static_cast<std::size_t>(cand);
        const int from = side[v];
        heaps[from].pop();
        cumulative += gain[v];
        side[v] = 1 - from;
        --sizes[from];
        ++sizes[1 - from];
        locked[v] = 1;
        moves.push_back(v);
        for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
            const std::size_t w = adj_[e];
            gain[w] += side[w] == side[v] ? -2 : 2;
            if (!locked[w]) heaps[side[w]].emplace(gain[w], -static_cast<long>(w));
        }
        const long imbalance = std::labs(sizes[0] - sizes[1]);
        if (cumulative > best || (cumulative == best && imbalance < best_imbalance)) {
            best = cumulative;
            best_prefix = moves.size();
            best_imbalance = imbalance;
        }
    }
    for (std::size_t m = moves.size(); m-- > best_prefix;) side[moves[m]] = 1 - side[moves[m]];
}

std::pair<std::size_t, std::size_t> Bisector::score(const std::vector<int>& side) const {
    const std::size_t k = global_.size();
    std::vector<char> seen(k, 0);
    std::size_t pieces = 0, cut = 0;
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < k; ++v) {
        for (std::size_t e = offsets_[v]; e < offsets_[v + 1]; ++e) cut += side[adj_[e]] != side[v];
        if (seen[v]) continue;
        ++pieces;
        seen[v] = 1;
        stack.assign(1, v);
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e) {
                const std::size_t w = adj_[e];
                if (!seen[w] && side[w] == side[u]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
    }
    return {pieces, cut / 2};
}

// Moves stray pieces of a side (every component but the largest) across
// when they touch the other side and the balance allows it. FM moves can
// strand such pieces; disconnected clusters compress poorly.
void Bisector::reconnect(std::vector<int>& side) const {
    const std::size_t k = global_.size();
    const long tol = static_cast<long>(bisection_tolerance(k));
    for (int round = 0; round < 4; ++round) {
        long sizes[2] = {0, 0};
        for (std::size_t v = 0; v < k; ++v) ++sizes[side[v]];
        std::vector<std::size_t> comp(k, npos);
        std::vector<std::vector<std::size_t>> comps;
        for (std::size_t v = 0; v < k; ++v) {
            if (comp[v] != npos) continue;
            comps.emplace_back();
            auto& members = comps.back();
            comp[v] = comps.size() - 1;
            members.push_back(v);
            for (std::size_t h = 0; h < members.size(); ++h)
                for (std::size_t e = offsets_[members[h]]; e < offsets_[members[h] + 1]; ++e) {
                    const std::size_t w = adj_[e];
                    if (comp[w] == npos && side[w] == side[v]) {
                        comp[w] = comp[v];
                        members.push_back(w);
                    }
                }
        }
        std::size_t largest[2] = {npos, npos};
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const int s = side[comps[c].front()];
            if (largest[s] == npos || comps[c].size() > comps[largest[s]].size()) largest[s] = c;
        }
        bool changed = false;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const int s = side[comps[c].front()];
            if (c == largest[s]) continue;
            bool touches = false;
            for (std::size_t v : comps[c])
                for (std::size_t e = offsets_[v]; e < offsets_[v + 1] && !touches; ++e) touches = side[adj_[e]] != s;
            const long sz = static_cast<long>(comps[c].size());
            const long after = std::labs((sizes[s] - sz) - (sizes[1 - s] + sz));
            if (!touches || sizes[s] - sz < 1) continue;
            if (after > tol && after >= std::labs(sizes[s] - sizes[1 - s])) continue;
            for (std::size_t v : comps[c]) side[v] = 1 - s;
            sizes[s] -= sz;
            sizes[1 - s] += sz;
            changed = true;
        }
        if (!changed) break;
    }
}

Bisection Bisector::run(std::span<const std::size_t> members, std::uint64_t seed) {
    Bisection out;
    if (members.size() <= 1) {
        out.left.assign(members.begin(), members.end());
        return out;
    }
    build_local(members);
    const std::size_t k = global_.size();
    const std::size_t start = static_cast<std::size_t>(splitmix64(seed) % k);
    // Grow from both ends of a pseudo-diameter and keep the better split:
    // fewer connected pieces first, then the smaller cut.
    // A third origin, the vertex farthest from both ends, covers clusters
    // with three arms.
    const std::size_t a = pseudo_peripheral(start);
    std::vector<std::size_t> dist_a, dist_b;
    const std::size_t b = farthest_from(a, dist_a);
    farthest_from(b, dist_b);
    std::size_t c = a;
    for (std::size_t v = 0; v < k; ++v) {
        const std::size_t dv = std::min(dist_a[v], dist_b[v]);
        if (dv != npos && dv > std::min(dist_a[c], dist_b[c])) c = v;
    }
    std::vector<std::size_t> origins{a};
    for (std::size_t o : {b, c})
        if (std::find(origins.begin(), origins.end(), o) == origins.end()) origins.push_back(o);
    std::vector<int> side;
    std::pair<std::size_t, std::size_t> best_score{npos, npos};
    for (std::size_t origin : origins) {
        std::vector<int> trial;
        grow(origin, trial);
        refine(trial);
        reconnect(trial);
        const auto sc = score(trial);
        if (sc < best_score) {
            best_score = sc;
            side = std::move(trial);
        }
    }

    const int left_side = side[0];  // local 0 holds the smallest index
    for (std::size_t v = 0; v < k; ++v) (side[v] == left_side ? out.left : out.right).push_back(global_[v]);
    for (std::size_t v : global_) local_[v] = npos;
    return out;
}

}  // namespace

Graph::Graph(std::vector<std::vector<std::size_t>> adjacency) {
    const std::size_t n = adjacency.size();
    std::vector<std::vector<std::size_t>> sym(n);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t w : adjacency[v]) {
            if (w >= n) throw ShapeError("graph neighbor out of range");
            if (w == v) continue;
            sym[v].push_back(w);
            sym[w].push_back(v);
        }
    offsets_.assign(1, 0);
    for (auto& list : sym) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        adj_.insert(adj_.end(), list.begin(), list.end());
        offsets_.push_back(adj_.size());
    }
}

Graph Graph::from_matrix(const SparseMatrix& m) {
    std::vector<std::vector<std::size_t>> adj(m.size());
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto val = m.values();
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k)
            if (val[k] != 0.0 && ci[k] != r) adj[r].push_back(ci[k]);
    return Graph(std::move(adj));
}

std::size_t bisection_tolerance(std::size_t cluster_size) { return std::max<std::size_t>(1, cluster_size / 10); }

std::size_t cut_size(const Graph& g, const Bisection& b) {
    std::vector<char> in_left(g.vertex_count(), 0);
    for (std::size_t v : b.left) in_left[v] = 1;
    std::size_t cut = 0;
    for (std::size_t v : b.left)
        for (std::size_t w : g.neighbors(v))
            if (!in_left[w] && std::binary_search(b.right.begin(), b.right.end(), w)) ++cut;
    return cut;
}

Bisection bisect(const Graph& g, std::span<const std::size_t> members, std::uint64_t seed) {
    Bisector b(g);
    return b.run(members, seed);
}

std::size_t choose_depth(std::size_t n, std::size_t target_leaf) {
    if (n == 0 || target_leaf == 0) throw Error("choose_depth: n and target_leaf must be positive");
    const double l = std::round(std::log2(static_cast<double>(n) / static_cast<double>(target_leaf)));
    return l < 1.0 ? 1 : static_cast<std::size_t>(l);
}

NestedPartitioning::NestedPartitioning(std::vector<Partitioning> levels) : levels_(std::move(levels)) {
    if (levels_.empty() || levels_.front().cluster_count() != 1) throw Error("level 0 must hold a single cluster");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i].cluster_count() != (std::size_t{1} << i))
            throw Error("level " + std::to_string(i) + " must have 2^" + std::to_string(i) + " clusters");
        if (levels_[i].size() != levels_.front().size()) throw Error("levels cover different index ranges");
        if (i == 0) continue;
        for (std::size_t v = 0; v < levels_[i].size(); ++v)
            if (levels_[i].cluster_of(v) / 2 != levels_[i - 1].cluster_of(v))
                throw Error("partitionings are not nested at level " + std::to_string(i));
    }
}

NestedPartitioning build_nested_partitioning(const SparseMatrix& m, std::size_t depth, std::uint64_t seed) {
    const std::size_t n = m.size();
    if (n < 2) throw Error("nested partitioning needs at least two indices");
    if (depth == 0) throw Error("depth must be at least 1");

    NestedPartitioning np;
    std::size_t max_depth = 0;
    while ((std::size_t{2} << max_depth) <= n) ++max_depth;
    if (depth > max_depth) {
        np.warnings_.push_back("depth " + std::to_string(depth) + " exceeds log2(n); clamped to " +
                               std::to_string(max_depth));
        np.depth_clamped_ = true;
        depth = max_depth;
    }

    const Graph g = Graph::from_matrix(m);
    Bisector bisector(g);
    np.levels_.emplace_back(std::vector<std::size_t>(n, 0), 1);
    for (std::size_t level = 0; level < depth; ++level) {
        const Partitioning& cur = np.levels_.back();
        bool singleton = false;
        for (std::size_t j = 0; j < cur.cluster_count(); ++j) singleton = singleton || cur.members(j).size() < 2;
        if (singleton) {
            np.warnings_.push_back("singleton cluster at level " + std::to_string(level) + "; depth clamped to " +
                                   std::to_string(level));
            np.depth_clamped_ = true;
            break;
        }
        std::vector<std::size_t> next(n);
        for (std::size_t j = 0; j < cur.cluster_count(); ++j) {
            const std::uint64_t s = splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(level) << 32) | j));
            const Bisection b = bisector.run(cur.members(j), s);
            for (std::size_t v : b.left) next[v] = 2 * j;
            for (std::size_t v : b.right) next[v] = 2 * j + 1;
        }
        np.levels_.emplace_back(std::move(next), std::size_t{2} << level);
    }
    if (const auto bad = disconnected_leaves(g, np); !bad.empty())
        np.warnings_.push_back(std::to_string(bad.size()) + " leaf cluster(s) induce disconnected subgraphs");
    return np;
}

std::vector<std::size_t> disconnected_leaves(const Graph& g, const NestedPartitioning& np) {
    const Partitioning& leaf = np.level(np.depth());
    std::vector<std::size_t> bad;
    std::vector<char> seen(g.vertex_count(), 0);
    for (std::size_t c = 0; c < leaf.cluster_count(); ++c) {
        const auto members = leaf.members(c);
        std::vector<std::size_t> queue{members.front()};
        seen[members.front()] = 1;
        for (std::size_t h = 0; h < queue.size(); ++h)
            for (std::size_t w : g.neighbors(queue[h]))
                if (!seen[w] && leaf.cluster_of(w) == c) {
                    seen[w] = 1;
                    queue.push_back(w);
                }
        if (queue.size() != members.size()) bad.push_back(c);
        for (std::size_t v : queue) seen[v] = 0;
    }
    return bad;
}

}  // namespace hlu
