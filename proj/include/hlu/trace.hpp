#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hlu/factor.hpp"

namespace hlu {

/// Structural snapshot of the active system: nodes with their sizes and
/// the edges whose endpoints are both still uneliminated.
nlohmann::json snapshot(const HTree& tree);
std::string to_dot(const HTree& tree, const std::string& title = "htree");

/// Records every factorization step with a snapshot taken right after it.
class StepTrace : public StepObserver {
public:
    void on_step(const StepEvent& event, const HTree& tree) override;

    const nlohmann::json& steps() const noexcept { return steps_; }
    const std::vector<std::string>& dots() const noexcept { return dots_; }
    /// One "kind target" line per step, e.g. "compress s2_1 partners=s2_3 rank=2".
    std::vector<std::string> summary() const;

private:
    nlohmann::json steps_ = nlohmann::json::array();
    std::vector<std::string> dots_;
};

nlohmann::json to_json(const FactorConfig& cfg);
nlohmann::json to_json(const FactorStats& stats);
nlohmann::json partitioning_json(const NestedPartitioning& np);

}  // namespace hlu
