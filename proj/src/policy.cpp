#include "inferact/policy.hpp"

#include "inferact/prob.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace inferact {

bool satisfies_action_constraints(const std::vector<int>& controls) {
    if (controls.size() != 3) return false;
    if (controls[2] != 0) return false;
    return !(controls[0] > 0 && controls[1] > 0);
}

bool is_valid_policy(const Policy& policy) {
    if (policy.steps.empty()) return false;
    return std::all_of(policy.steps.begin(), policy.steps.end(), satisfies_action_constraints);
}

std::vector<Policy> enumerate_policies(int num_prompts, int num_searches, int horizon,
                                       PolicyMode mode) {
    if (horizon < 1) throw std::invalid_argument("enumerate_policies: horizon must be >= 1");
    if (num_prompts < 0 || num_searches < 0)
        throw std::invalid_argument("enumerate_policies: negative action count");

    // Action alphabet: 0 = no-action, 1..P = prompt actions, P+1..P+S = search.
    const int n = 1 + num_prompts + num_searches;
    auto action_controls = [num_prompts](int a) -> std::vector<int> {
        if (a == 0) return {0, 0, 0};
        if (a <= num_prompts) return {a, 0, 0};
        return {0, a - num_prompts, 0};
    };

    std::vector<Policy> out;
    if (mode == PolicyMode::repeated) {
        out.reserve(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            Policy p;
            p.steps.assign(static_cast<std::size_t>(horizon), action_controls(a));
            out.push_back(std::move(p));
        }
        return out;
    }

    double count = std::pow(static_cast<double>(n), horizon);
    if (count > 5e6) throw std::invalid_argument("enumerate_policies: too many policies");
    out.reserve(static_cast<std::size_t>(count));
    std::vector<int> seq(static_cast<std::size_t>(horizon), 0);
    while (true) {
        Policy p;
        p.steps.reserve(seq.size());
        for (int a : seq) p.steps.push_back(action_controls(a));
        out.push_back(std::move(p));
        int t = horizon - 1;
        for (; t >= 0; --t) {  // first step varies slowest
            if (++seq[static_cast<std::size_t>(t)] < n) break;
            seq[static_cast<std::size_t>(t)] = 0;
        }
        if (t < 0) break;
    }
    return out;
}

double expected_utility(const std::vector<std::vector<Vector>>& pred_obs,
                        const std::vector<Vector>& C) {
    double eu = 0.0;
    for (const auto& step : pred_obs) {
        if (step.size() != C.size())
            throw std::invalid_argument("expected_utility: modality count mismatch");
        for (std::size_t m = 0; m < step.size(); ++m) {
            if (step[m].size() != C[m].size())
                throw std::invalid_argument("expected_utility: shape mismatch at modality " +
                                            std::to_string(m));
            eu += step[m].dot(log_softmax(C[m]));
        }
    }
    return eu;
}

namespace {

Vector joint_dep_beliefs(const LikelihoodTensor& a, const BeliefState& q) {
    std::vector<Vector> deps;
    for (int f : a.deps) deps.push_back(q[f]);
    return joint_outer(deps);
}

}  // namespace

double state_info_gain(const GenerativeModel& model, const BeliefState& q_pred,
                       const std::vector<Vector>& pred_obs) {
    double gain = 0.0;
    for (int m = 0; m < model.num_modalities(); ++m) {
        const LikelihoodTensor& a = model.A[static_cast<std::size_t>(m)];
        const Vector joint = joint_dep_beliefs(a, q_pred);
        for (int o = 0; o < a.num_obs(); ++o) {
            const double po = pred_obs[static_cast<std::size_t>(m)][o];
            if (po <= 0.0) continue;
            Vector posterior = a.values.row(o).transpose().cwiseProduct(joint);
            const double mass = posterior.sum();
            if (mass <= 0.0) continue;
            posterior /= mass;
            double kl = 0.0;
            for (Eigen::Index j = 0; j < joint.size(); ++j)
                kl += xlogy(posterior[j], posterior[j]) - xlogy(posterior[j], joint[j]);
            gain += po * kl;
        }
    }
    return gain < 0.0 ? 0.0 : gain;
}

std::pair<double, double> risk_and_ambiguity(const GenerativeModel& model,
                                             const BeliefState& q_pred,
                                             const std::vector<Vector>& pred_obs,
                                             const std::vector<Vector>& C) {
    double risk = 0.0;
    double ambiguity = 0.0;
    for (int m = 0; m < model.num_modalities(); ++m) {
        const LikelihoodTensor& a = model.A[static_cast<std::size_t>(m)];
        // KL(q(o) || softmax(C)) written against log_softmax directly, so the
        // utility and risk routes share identical preference logs.
        const Vector& po = pred_obs[static_cast<std::size_t>(m)];
        const Vector log_pref = log_softmax(C[m]);
        for (Eigen::Index o = 0; o < po.size(); ++o) {
            if (po[o] == 0.0) continue;
            risk += po[o] * (std::log(po[o]) - log_pref[o]);
        }
        const Vector joint = joint_dep_beliefs(a, q_pred);
        for (Eigen::Index j = 0; j < joint.size(); ++j) {
            if (joint[j] == 0.0) continue;
            ambiguity += joint[j] * entropy(a.values.col(j));
        }
    }
    if (risk < 0.0 && risk > -1e-9) risk = 0.0;
    return {risk, ambiguity};
}

double param_info_gain(const GenerativeModel& model, const DirichletState& dirichlet,
                       const BeliefState& q_pred, const std::vector<Vector>& pred_obs) {
    double gain = 0.0;
    for (std::size_t m = 0; m < dirichlet.pA.size(); ++m) {
        const Matrix& pa = dirichlet.pA[m];
        const Matrix& mask = dirichlet.pA_mask[m];
        const Vector joint = joint_dep_beliefs(model.A[m], q_pred);
        const Vector col_sums = pa.colwise().sum();
        const Vector& po = pred_obs[m];
        for (Eigen::Index j = 0; j < pa.cols(); ++j) {
            if (joint[j] == 0.0) continue;
            double col_term = 0.0;
            for (Eigen::Index o = 0; o < pa.rows(); ++o) {
                if (mask(o, j) == 0.0 || po[o] == 0.0) continue;
                const double w = 0.5 * (1.0 / col_sums[j] - 1.0 / pa(o, j));
                col_term += po[o] * w;
            }
            gain -= col_term * joint[j];
        }
    }
    return gain < 0.0 ? 0.0 : gain;
}

std::vector<EFEBreakdown> score_policies(const GenerativeModel& model,
                                         const DirichletState& dirichlet,
                                         const BeliefState& beliefs,
                                         const std::vector<Policy>& policies) {
    std::vector<EFEBreakdown> out(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const Policy& policy = policies[i];
        EFEBreakdown& bd = out[i];
        BeliefState q = beliefs;
        for (const std::vector<int>& controls : policy.steps) {
            q = predict_states(model, q, controls);
            const std::vector<Vector> po = predict_observations(model, q);
            bd.state_info_gain += state_info_gain(model, q, po);
            bd.pragmatic_value += expected_utility({po}, model.C);
            bd.param_info_gain += param_info_gain(model, dirichlet, q, po);
            const auto [risk, ambiguity] = risk_and_ambiguity(model, q, po, model.C);
            bd.risk += risk;
            bd.ambiguity += ambiguity;
        }
        bd.G = bd.state_info_gain + bd.pragmatic_value + bd.param_info_gain;
    }
    return out;
}

PolicyPosterior policy_posterior(std::vector<Policy> policies,
                                 const std::vector<EFEBreakdown>& scores, double gamma,
                                 const Vector& habits) {
    if (!(gamma > 0.0)) throw std::invalid_argument("policy_posterior: gamma must be > 0");
    if (scores.size() != policies.size() ||
        habits.size() != static_cast<Eigen::Index>(policies.size()))
        throw std::invalid_argument("policy_posterior: length mismatch");
    Vector logits(habits.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i)
        logits[i] = gamma * scores[static_cast<std::size_t>(i)].G + habits[i];
    PolicyPosterior post;
    post.probs = softmax(logits);
    post.habits = habits;
    post.policies = std::move(policies);
    return post;
}

PolicyPosterior policy_posterior(std::vector<Policy> policies,
                                 const std::vector<EFEBreakdown>& scores, double gamma) {
    const Vector habits = Vector::Zero(static_cast<Eigen::Index>(policies.size()));
    return policy_posterior(std::move(policies), scores, gamma, habits);
}

std::vector<int> select_action(const PolicyPosterior& posterior, double alpha,
                               ActionSelection mode, uint64_t rng_seed) {
    if (posterior.policies.empty()) throw std::invalid_argument("select_action: empty posterior");

    if (mode == ActionSelection::deterministic) {
        Eigen::Index best = 0;
        posterior.probs.maxCoeff(&best);  // first maximum wins ties
        return posterior.policies[static_cast<std::size_t>(best)].steps[0];
    }

    // Marginalize q(pi) onto first-step actions, in order of first appearance.
    std::vector<std::vector<int>> actions;
    std::vector<double> marginal;
    std::map<std::vector<int>, std::size_t> index;
    for (std::size_t i = 0; i < posterior.policies.size(); ++i) {
        const std::vector<int>& first = posterior.policies[i].steps[0];
        auto [it, inserted] = index.try_emplace(first, actions.size());
        if (inserted) {
            actions.push_back(first);
            marginal.push_back(0.0);
        }
        marginal[it->second] += posterior.probs[static_cast<Eigen::Index>(i)];
    }
    Vector log_marginal(static_cast<Eigen::Index>(marginal.size()));
    for (std::size_t i = 0; i < marginal.size(); ++i)
        log_marginal[static_cast<Eigen::Index>(i)] = alpha * safe_log(marginal[i]);
    std::mt19937_64 rng(rng_seed);
    const int pick = sample_categorical(softmax(log_marginal), rng);
    return actions[static_cast<std::size_t>(pick)];
}

}  // namespace inferact
