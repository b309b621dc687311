#pragma once

#include "inferact/inference.hpp"
#include "inferact/model.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace inferact {

enum class PolicyMode { cartesian, repeated };
enum class ActionSelection { deterministic, stochastic };

/// A fixed-horizon sequence of per-factor control indices.
struct Policy {
    std::vector<std::vector<int>> steps;

    int horizon() const { return static_cast<int>(steps.size()); }
};

/// Per-policy expected free energy record. G is a value to maximize:
/// G = state_info_gain + pragmatic_value + param_info_gain, and
/// -(risk + ambiguity) = state_info_gain + pragmatic_value.
struct EFEBreakdown {
    double state_info_gain = 0.0;
    double pragmatic_value = 0.0;
    double param_info_gain = 0.0;
    double risk = 0.0;
    double ambiguity = 0.0;
    double G = 0.0;
};

struct PolicyPosterior {
    std::vector<Policy> policies;
    Vector probs;
    Vector habits;  // log-preferences over policies (E enters as softmax(habits))
};

/// True for the three-factor action layout: info control 0 and never both a
/// prompt and a search control in the same step.
bool satisfies_action_constraints(const std::vector<int>& controls);
bool is_valid_policy(const Policy& policy);

/// All valid policies over the action alphabet {no-action, prompt 1..P,
/// search 1..S}. Cartesian mode: every length-H action sequence,
/// (1+P+S)^H policies. Repeated mode: the same action at every step.
std::vector<Policy> enumerate_policies(int num_prompts, int num_searches, int horizon,
                                       PolicyMode mode);

/// Sum over timesteps and modalities of q(o) . ln softmax(C). Always <= 0.
double expected_utility(const std::vector<std::vector<Vector>>& pred_obs,
                        const std::vector<Vector>& C);

/// Expected KL between posterior and prior state beliefs under each possible
/// observation, weighted by its predicted probability; the mutual information
/// between predicted states and observations, summed over modalities.
double state_info_gain(const GenerativeModel& model, const BeliefState& q_pred,
                       const std::vector<Vector>& pred_obs);

/// Risk = KL(q(o) || softmax(C)) and ambiguity = E_{q(s)} H[q(o|s)], summed
/// over modalities.
std::pair<double, double> risk_and_ambiguity(const GenerativeModel& model,
                                             const BeliefState& q_pred,
                                             const std::vector<Vector>& pred_obs,
                                             const std::vector<Vector>& C);

/// Dirichlet novelty: -sum_m q(o)' (W_m . mask) q(s), with
/// W_m = (1/colsum(pA_m) - 1/pA_m) / 2 on the learning mask. Decays to zero
/// as concentrations grow.
double param_info_gain(const GenerativeModel& model, const DirichletState& dirichlet,
                       const BeliefState& q_pred, const std::vector<Vector>& pred_obs);

/// Rolls beliefs forward through each policy and accumulates the EFE
/// components over the horizon. Results are ordered by policy index.
std::vector<EFEBreakdown> score_policies(const GenerativeModel& model,
                                         const DirichletState& dirichlet,
                                         const BeliefState& beliefs,
                                         const std::vector<Policy>& policies);

/// q(pi) = softmax(gamma * G + habits); uniform habits when omitted.
PolicyPosterior policy_posterior(std::vector<Policy> policies,
                                 const std::vector<EFEBreakdown>& scores, double gamma,
                                 const Vector& habits);
PolicyPosterior policy_posterior(std::vector<Policy> policies,
                                 const std::vector<EFEBreakdown>& scores, double gamma);

/// Deterministic mode: first step of the argmax-probability policy (ties go
/// to the lowest policy index). Stochastic mode: marginalize q(pi) onto first
/// actions and sample from softmax(alpha * ln marginal).
std::vector<int> select_action(const PolicyPosterior& posterior, double alpha,
                               ActionSelection mode, uint64_t rng_seed);

}  // namespace inferact
