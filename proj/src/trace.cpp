#include "hlu/trace.hpp"

#include <sstream>

namespace hlu {

using nlohmann::json;

json snapshot(const HTree& t) {
    json nodes = json::array();
    json edges = json::array();
    for (NodeId id = 0; id < t.node_count(); ++id) {
        if (!t.is_active(id)) continue;
        const HNode& n = t.node(id);
        nodes.push_back({{"id", t.label(id)}, {"kind", to_string(n.kind)}, {"size", n.size}});
        for (const auto& [v, blk] : n.out) {
            if (!t.is_active(v)) continue;
            edges.push_back({t.label(id), t.label(v), blk.rows(), blk.cols()});
        }
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

std::string to_dot(const HTree& t, const std::string& title) {
    std::ostringstream os;
    os << "digraph \"" << title << "\" {\n";
    for (NodeId id = 0; id < t.node_count(); ++id) {
        if (!t.is_active(id)) continue;
        const HNode& n = t.node(id);
        const char* color = n.kind == NodeKind::red ? "red" : n.kind == NodeKind::black ? "black" : "blue";
        os << "  " << t.label(id) << " [color=" << color << ", label=\"" << t.label(id) << "\\n" << n.size
           << "\"];\n";
    }
    for (NodeId id = 0; id < t.node_count(); ++id) {
        if (!t.is_active(id)) continue;
        for (const auto& [v, blk] : t.node(id).out)
            if (v != id && t.is_active(v)) os << "  " << t.label(id) << " -> " << t.label(v) << ";\n";
    }
    os << "}\n";
    return os.str();
}

void StepTrace::on_step(const StepEvent& e, const HTree& t) {
    json step;
    step["step"] = steps_.size();
    step["kind"] = to_string(e.kind);
    step["level"] = e.level;
    step["node"] = e.node == no_node ? json(nullptr) : json(t.label(e.node));
    if (e.kind == StepEvent::Kind::compress) {
        json partners = json::array();
        for (NodeId p : e.partners) partners.push_back(t.label(p));
        step["partners"] = partners;
        step["rank"] = e.rank;
    }
    step["noop"] = e.noop;
    step["graph"] = snapshot(t);
    steps_.push_back(std::move(step));
    dots_.push_back(to_dot(t, "step " + std::to_string(dots_.size())));
}

std::vector<std::string> StepTrace::summary() const {
    std::vector<std::string> out;
    for (const json& s : steps_) {
        std::string line = s["kind"].get<std::string>();
        if (s["node"].is_null()) line += " level=" + std::to_string(s["level"].get<std::size_t>());
        else line += " " + s["node"].get<std::string>();
        if (s.contains("partners")) {
            line += " partners=";
            bool first = true;
            for (const json& p : s["partners"]) {
                line += (first ? "" : "+") + p.get<std::string>();
                first = false;
            }
            line += " rank=" + std::to_string(s["rank"].get<std::size_t>());
        }
        if (s["noop"].get<bool>()) line += " (noop)";
        out.push_back(line);
    }
    return out;
}

json to_json(const FactorConfig& cfg) {
    return {{"epsilon", cfg.epsilon},
            {"rule", cfg.rule == TruncationKind::relative_sigma ? "relsigma" : "frob"},
            {"depth", cfg.depth},
            {"target_leaf", cfg.target_leaf},
            {"seed", cfg.seed},
            {"instrumentation", cfg.instrumentation}};
}

json to_json(const FactorStats& s) {
    json levels = json::array();
    for (const LevelStats& l : s.levels)
        levels.push_back({{"level", l.level},
                          {"super_nodes", l.super_nodes},
                          {"max_size", l.max_size},
                          {"avg_size", l.avg_size},
                          {"compressed", l.compressed},
                          {"avg_rank", l.avg_rank},
                          {"max_rank", l.max_rank},
                          {"compression_ratio", l.compression_ratio},
                          {"kappa1", l.kappa1},
                          {"kappa2", l.kappa2}});
    return {{"n", s.n},
            {"depth", s.depth},
            {"depth_clamped", s.depth_clamped},
            {"warnings", s.warnings},
            {"levels", levels},
            {"times",
             {{"partition", s.times.partition},
              {"merge", s.times.merge},
              {"svd", s.times.svd},
              {"gemm", s.times.gemm},
              {"pivot", s.times.pivot},
              {"total", s.times.total}}},
            {"auxiliary_variables", s.auxiliary_variables},
            {"edges_created", s.edges_created},
            {"distance_checks", s.distance_checks},
            {"distance_violations", s.distance_violations},
            {"max_created_distance", s.max_created_distance},
            {"max_compression_mismatch", s.max_compression_mismatch},
            {"alpha_hat", s.alpha_hat}};
}

json partitioning_json(const NestedPartitioning& np) {
    json levels = json::array();
    for (std::size_t i = 0; i <= np.depth(); ++i) {
        auto a = np.level(i).assignment();
        levels.push_back(std::vector<std::size_t>(a.begin(), a.end()));
    }
    return {{"n", np.size()}, {"depth", np.depth()}, {"levels", levels}};
}

}  // namespace hlu
