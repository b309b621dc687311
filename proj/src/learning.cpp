#include "inferact/learning.hpp"

#include "inferact/prob.hpp"

#include <algorithm>

namespace inferact {

namespace {

bool enabled(const std::vector<int>& which, int index) {
    return which.empty() || std::find(which.begin(), which.end(), index) != which.end();
}

void check_eta(const LearningConfig& cfg) {
    if (!(cfg.eta > 0.0)) throw std::invalid_argument("LearningConfig: eta must be > 0");
}

}  // namespace

DirichletState update_likelihood(const DirichletState& dirichlet, const Observation& obs,
                                 const BeliefState& q, const GenerativeModel& model,
                                 const LearningConfig& cfg) {
    check_eta(cfg);
    DirichletState next = dirichlet;
    if (!cfg.learn_a) return next;
    for (int m = 0; m < model.num_modalities(); ++m) {
        if (!enabled(cfg.modalities, m)) continue;
        const LikelihoodTensor& a = model.A[static_cast<std::size_t>(m)];
        if (obs[m] < 0 || obs[m] >= a.num_obs())
            throw std::out_of_range("update_likelihood: observation index out of range");
        std::vector<Vector> deps;
        for (int f : a.deps) deps.push_back(q[f]);
        const Vector joint = joint_outer(deps);
        Matrix& pa = next.pA[static_cast<std::size_t>(m)];
        const Matrix& mask = next.pA_mask[static_cast<std::size_t>(m)];
        pa.row(obs[m]) += cfg.eta * joint.transpose().cwiseProduct(mask.row(obs[m]));
    }
    return next;
}

DirichletState update_transitions(const DirichletState& dirichlet, const BeliefState& q_prev,
                                  const BeliefState& q_post, const std::vector<int>& controls,
                                  const LearningConfig& cfg) {
    check_eta(cfg);
    DirichletState next = dirichlet;
    if (!cfg.learn_b) return next;
    for (std::size_t f = 0; f < next.pB.size(); ++f) {
        if (!enabled(cfg.factors, static_cast<int>(f))) continue;
        const int u = controls[f];
        if (u < 0 || u >= static_cast<int>(next.pB[f].size()))
            throw std::out_of_range("update_transitions: control out of range for factor " +
                                    std::to_string(f));
        Matrix& pb = next.pB[f][static_cast<std::size_t>(u)];
        const Matrix& mask = next.pB_mask[f][static_cast<std::size_t>(u)];
        pb += cfg.eta *
              (q_post[static_cast<int>(f)] * q_prev[static_cast<int>(f)].transpose()).cwiseProduct(mask);
    }
    return next;
}

}  // namespace inferact
