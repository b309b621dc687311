#pragma once

#include "inferact/model.hpp"
#include "inferact/types.hpp"

namespace inferact {

struct InferenceOptions {
    int iters = 10;           // fixed-point sweeps over factors
    double tol = 1e-6;        // early exit when max belief change drops below
};

/// Posterior state estimation by fixed-point iteration: each sweep updates
/// every factor as softmax(sum_m E_{q(other deps)}[ln A_m[o_m]] + ln prior).
/// Exact in one sweep when every modality depends on a single factor.
BeliefState infer_states(const GenerativeModel& model, const BeliefState& prior,
                         const Observation& obs, const InferenceOptions& opts = {});
BeliefState infer_states(const GenerativeModel& model, const BeliefState& prior,
                         const Observation& obs, int iters);

/// Variational free energy F = KL(q || prior) - E_q[ln p(o|s)].
/// The overload without an explicit prior uses the model's D.
double compute_vfe(const GenerativeModel& model, const BeliefState& q, const Observation& obs,
                   const BeliefState& prior);
double compute_vfe(const GenerativeModel& model, const BeliefState& q, const Observation& obs);

/// One-step forward prediction: q'_f = B_f[:, :, control_f] * q_f.
BeliefState predict_states(const GenerativeModel& model, const BeliefState& q,
                           const std::vector<int>& controls);

/// Predicted observation distribution per modality: q(o_m) = A_m * joint(q_deps).
std::vector<Vector> predict_observations(const GenerativeModel& model, const BeliefState& q);

namespace detail {
/// E_{q(deps != f)}[ln A_m[o_m | s_f, s_others]] as a vector over states of f.
Vector expected_log_likelihood(const LikelihoodTensor& a, int obs_index, const BeliefState& q,
                               int factor);
}  // namespace detail

}  // namespace inferact
