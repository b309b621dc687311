#pragma once

#include "inferact/model.hpp"
#include "inferact/types.hpp"

#include <vector>

namespace inferact {

struct LearningConfig {
    double eta = 50.0;
    bool learn_a = true;
    bool learn_b = true;
    std::vector<int> modalities;       // empty = all modalities
    std::vector<int> factors = {kInfoFactor};  // pB updates; prompt/search mechanics stay fixed

    static LearningConfig paper_defaults() { return {}; }
};

/// pA_m += eta * (onehot(o_m) x q(deps)) . mask for each enabled modality.
/// Returns a new DirichletState; the input is untouched.
DirichletState update_likelihood(const DirichletState& dirichlet, const Observation& obs,
                                 const BeliefState& q, const GenerativeModel& model,
                                 const LearningConfig& cfg);

/// pB_f[:, :, control_f] += eta * (q_post x q_prev') . mask for each enabled
/// factor.
DirichletState update_transitions(const DirichletState& dirichlet, const BeliefState& q_prev,
                                  const BeliefState& q_post, const std::vector<int>& controls,
                                  const LearningConfig& cfg);

}  // namespace inferact
