#include "inferact/inference.hpp"

#include "inferact/prob.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace inferact {

namespace {

void check_observation(const GenerativeModel& model, const Observation& obs) {
    if (obs.num_modalities() != model.num_modalities())
        throw std::out_of_range("observation has " + std::to_string(obs.num_modalities()) +
                                " modalities, model has " + std::to_string(model.num_modalities()));
    for (int m = 0; m < model.num_modalities(); ++m) {
        if (obs[m] < 0 || obs[m] >= model.A[static_cast<std::size_t>(m)].num_obs())
            throw std::out_of_range("observation index " + std::to_string(obs[m]) +
                                    " out of range for modality " + std::to_string(m));
    }
}

}  // namespace

namespace detail {

Vector expected_log_likelihood(const LikelihoodTensor& a, int obs_index, const BeliefState& q,
                               int factor) {
    const auto row = a.values.row(obs_index);
    int factor_pos = -1;
    for (std::size_t k = 0; k < a.deps.size(); ++k)
        if (a.deps[k] == factor) factor_pos = static_cast<int>(k);
    if (factor_pos < 0)
        throw std::invalid_argument("expected_log_likelihood: modality does not depend on factor");

    Vector out = Vector::Zero(a.dep_cards[static_cast<std::size_t>(factor_pos)]);
    const int rank = static_cast<int>(a.deps.size());
    std::vector<int> idx(static_cast<std::size_t>(rank), 0);
    for (Eigen::Index flat = 0; flat < a.num_joint_states(); ++flat) {
        double w = 1.0;
        for (int k = 0; k < rank; ++k) {
            if (k == factor_pos) continue;
            w *= q[a.deps[static_cast<std::size_t>(k)]][idx[static_cast<std::size_t>(k)]];
        }
        out[idx[static_cast<std::size_t>(factor_pos)]] += w * safe_log(row[flat]);
        for (int k = rank - 1; k >= 0; --k) {  // row-major odometer
            if (++idx[static_cast<std::size_t>(k)] < a.dep_cards[static_cast<std::size_t>(k)]) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
    }
    return out;
}

}  // namespace detail

BeliefState infer_states(const GenerativeModel& model, const BeliefState& prior,
                         const Observation& obs, const InferenceOptions& opts) {
    check_observation(model, obs);
    if (opts.iters < 1) throw std::invalid_argument("infer_states: iters must be >= 1");
    if (prior.num_factors() != model.num_factors())
        throw std::invalid_argument("infer_states: prior factor count mismatch");

    for (int m = 0; m < model.num_modalities(); ++m) {
        const LikelihoodTensor& a = model.A[static_cast<std::size_t>(m)];
        if (a.values.row(obs[m]).maxCoeff() == 0.0)
            std::cerr << "inferact: warning: modality " << m << " has zero likelihood for observation "
                      << obs[m] << "; it cannot update beliefs\n";
    }

    std::vector<Vector> log_prior(static_cast<std::size_t>(model.num_factors()));
    for (int f = 0; f < model.num_factors(); ++f)
        log_prior[static_cast<std::size_t>(f)] =
            prior[f].unaryExpr([](double x) { return safe_log(x); });

    BeliefState q = prior;
    for (int sweep = 0; sweep < opts.iters; ++sweep) {
        double max_delta = 0.0;
        for (int f = 0; f < model.num_factors(); ++f) {
            Vector logits = log_prior[static_cast<std::size_t>(f)];
            for (int m = 0; m < model.num_modalities(); ++m) {
                const LikelihoodTensor& a = model.A[static_cast<std::size_t>(m)];
                if (std::find(a.deps.begin(), a.deps.end(), f) == a.deps.end()) continue;
                logits += detail::expected_log_likelihood(a, obs[m], q, f);
            }
            Vector updated = softmax(logits);
            max_delta = std::max(max_delta, (updated - q[f]).cwiseAbs().maxCoeff());
            q[f] = std::move(updated);
        }
        if (max_delta < opts.tol) break;
    }
    return q;
}

BeliefState infer_states(const GenerativeModel& model, const BeliefState& prior,
                         const Observation& obs, int iters) {
    InferenceOptions opts;
    opts.iters = iters;
    return infer_states(model, prior, obs, opts);
}

double compute_vfe(const GenerativeModel& model, const BeliefState& q, const Observation& obs,
                   const BeliefState& prior) {
    check_observation(model, obs);
    double kl = 0.0;
    for (int f = 0; f < model.num_factors(); ++f)
        for (Eigen::Index i = 0; i < q[f].size(); ++i)
            kl += xlogy(q[f][i], q[f][i]) - xlogy(q[f][i], prior[f][i]);

    double expected_loglik = 0.0;
    for (int m = 0; m < model.num_modalities(); ++m) {
        const LikelihoodTensor& a = model.A[static_cast<std::size_t>(m)];
        std::vector<Vector> dep_beliefs;
        for (int f : a.deps) dep_beliefs.push_back(q[f]);
        const Vector joint = joint_outer(dep_beliefs);
        const auto row = a.values.row(obs[m]);
        for (Eigen::Index j = 0; j < joint.size(); ++j)
            expected_loglik += xlogy(joint[j], row[j]);
    }
    return kl - expected_loglik;
}

double compute_vfe(const GenerativeModel& model, const BeliefState& q, const Observation& obs) {
    return compute_vfe(model, q, obs, BeliefState{model.D});
}

BeliefState predict_states(const GenerativeModel& model, const BeliefState& q,
                           const std::vector<int>& controls) {
    if (static_cast<int>(controls.size()) != model.num_factors())
        throw std::invalid_argument("predict_states: need one control per factor");
    BeliefState out;
    for (int f = 0; f < model.num_factors(); ++f) {
        const TransitionTensor& b = model.B[static_cast<std::size_t>(f)];
        const int u = controls[static_cast<std::size_t>(f)];
        if (u < 0 || u >= b.num_controls())
            throw std::out_of_range("predict_states: control " + std::to_string(u) +
                                    " out of range for factor " + std::to_string(f));
        out.factors.push_back(renormalized(b.controls[static_cast<std::size_t>(u)] * q[f]));
    }
    return out;
}

std::vector<Vector> predict_observations(const GenerativeModel& model, const BeliefState& q) {
    std::vector<Vector> out;
    for (int m = 0; m < model.num_modalities(); ++m) {
        const LikelihoodTensor& a = model.A[static_cast<std::size_t>(m)];
        std::vector<Vector> dep_beliefs;
        for (int f : a.deps) dep_beliefs.push_back(q[f]);
        out.push_back(renormalized(a.values * joint_outer(dep_beliefs)));
    }
    return out;
}

}  // namespace inferact
