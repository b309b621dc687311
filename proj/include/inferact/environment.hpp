#pragma once

#include "inferact/model.hpp"
#include "inferact/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <string>

namespace inferact {

/// Ground truth for the synthetic evaluator: per-state mean scores in [0, 1].
/// Prompt columns: accuracy, relevance, comprehensiveness. Search columns:
/// info_relevance, info_usefulness, source_quality.
struct GroundTruthProfile {
    Matrix prompt_quality;  // num_prompt_states x 3
    Matrix search_quality;  // num_search_states x 3
    double noise_sd = 0.05;
    uint64_t seed = 0;      // seed the profile was generated from
    // Score multiplier for search emissions once the info level is saturated:
    // retrieval at that point returns redundant material. 1.0 disables.
    double redundancy_factor = 0.45;

    int num_prompts() const { return static_cast<int>(prompt_quality.rows()); }
    int num_searches() const { return static_cast<int>(search_quality.rows()); }
    int best_prompt() const;  // row with the highest mean score
};

/// Seeded random profile: roughly `good_fraction` of prompt states score high
/// (means >= 0.8), the rest land in the mediocre 0.2-0.5 band. Search state 0
/// is the idle no-search state and scores near zero; the remaining search
/// states get middling relevance/quality and usefulness in 0.5-0.9.
GroundTruthProfile make_default_profile(int prompts, int searches, uint64_t seed,
                                        double noise_sd = 0.05, double good_fraction = 0.2);

nlohmann::ordered_json profile_to_json(const GroundTruthProfile& p);
GroundTruthProfile profile_from_json(const nlohmann::json& j);

struct EnvState {
    int current_prompt = 0;
    int current_search = 0;
    int info_level = 0;
};

/// Three scores on the 0.0, 0.1, ..., 1.0 grid.
struct EvaluationScores {
    std::array<double, 3> values{};
};

/// Maps grid scores to observation indices: round(score * 10). Scores outside
/// [0, 1] throw; off-grid scores round to the nearest grid point with a
/// warning.
std::array<int, 3> scale_scores(const EvaluationScores& scores);

/// Deterministic, seeded stand-in for the LLM-evaluated research environment.
/// Every step emits all seven modalities: prompt quality from the current
/// prompt state, search quality from the current search state, and the info
/// level. Search actions advance the info level with probability equal to the
/// acting state's usefulness mean; no-action decays the search state to 0.
class SyntheticEnvironment {
public:
    SyntheticEnvironment(GroundTruthProfile profile, ModelDims dims, uint64_t seed);

    /// Emission from the current state, before any action.
    Observation initial_observation();

    /// Applies a per-factor action (mutual exclusion enforced) and returns
    /// the resulting observation.
    Observation step(const std::vector<int>& action);

    const EnvState& state() const { return state_; }
    const GroundTruthProfile& profile() const { return profile_; }

private:
    int quantize(double score) const;
    int sample_quality(double mean);
    Observation emit(bool search_acted, int acting_search_state);

    GroundTruthProfile profile_;
    ModelDims dims_;
    EnvState state_;
    std::mt19937_64 rng_;
};

}  // namespace inferact
