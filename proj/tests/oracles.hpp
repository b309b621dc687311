#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check: exact Bayes by enumeration, brute-force evidence and
// observation marginals over the full joint state space, and seeded random
// model generators for property tests.

#include "inferact/model.hpp"
#include "inferact/prob.hpp"
#include "inferact/types.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using inferact::BeliefState;
using inferact::GenerativeModel;
using inferact::Matrix;
using inferact::Observation;
using inferact::Vector;

/// Iterates all joint state assignments of the model's factors.
template <typename Fn>
void for_each_joint_state(const std::vector<int>& cards, Fn&& fn) {
    std::vector<int> idx(cards.size(), 0);
    while (true) {
        fn(idx);
        int d = static_cast<int>(cards.size()) - 1;
        for (; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < cards[static_cast<std::size_t>(d)]) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
        if (d < 0) break;
    }
}

/// A modality's likelihood entry for a full joint state assignment.
inline double likelihood_entry(const inferact::LikelihoodTensor& a, int obs,
                               const std::vector<int>& joint_state) {
    Eigen::Index col = 0;
    for (std::size_t k = 0; k < a.deps.size(); ++k)
        col = col * a.dep_cards[k] + joint_state[static_cast<std::size_t>(a.deps[k])];
    return a.values(obs, col);
}

/// p(o) = sum over joint states of prod_f prior_f(s_f) * prod_m A_m[o_m | s].
inline double evidence(const GenerativeModel& model, const BeliefState& prior,
                       const Observation& obs) {
    double p = 0.0;
    for_each_joint_state(model.factor_cards, [&](const std::vector<int>& s) {
        double w = 1.0;
        for (int f = 0; f < model.num_factors(); ++f) w *= prior[f][s[static_cast<std::size_t>(f)]];
        for (int m = 0; m < model.num_modalities(); ++m)
            w *= likelihood_entry(model.A[static_cast<std::size_t>(m)], obs[m], s);
        p += w;
    });
    return p;
}

/// Exact single-factor posterior: prior element-wise times every modality's
/// likelihood row, then normalized.
inline Vector exact_single_factor_posterior(const GenerativeModel& model, const Vector& prior,
                                            const Observation& obs) {
    Vector post = prior;
    for (int m = 0; m < model.num_modalities(); ++m)
        post = post.cwiseProduct(
            model.A[static_cast<std::size_t>(m)].values.row(obs[m]).transpose());
    return post / post.sum();
}

/// Brute-force predicted observation marginal for one modality.
inline Vector predicted_obs_marginal(const GenerativeModel& model, const BeliefState& q,
                                     int modality) {
    const inferact::LikelihoodTensor& a = model.A[static_cast<std::size_t>(modality)];
    Vector out = Vector::Zero(a.num_obs());
    for_each_joint_state(model.factor_cards, [&](const std::vector<int>& s) {
        double w = 1.0;
        for (int f = 0; f < model.num_factors(); ++f) w *= q[f][s[static_cast<std::size_t>(f)]];
        for (int o = 0; o < a.num_obs(); ++o) out[o] += w * likelihood_entry(a, o, s);
    });
    return out;
}

/// Smoothed random distribution (keeps entries well away from the log floor).
inline Vector random_dist(int n, std::mt19937_64& rng) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = -std::log(inferact::runif(rng) + 1e-12);
    v /= v.sum();
    return (0.9 * v.array() + 0.1 / n).matrix();
}

inline Matrix random_stochastic(int rows, int cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c) m.col(c) = random_dist(rows, rng);
    return m;
}

/// Random model in the three-factor layout: cards in [2, max_card], two
/// modalities with random dependencies, random preferences in [-3, 3], and
/// random stochastic transitions with the paper-style control counts.
inline GenerativeModel random_model(std::mt19937_64& rng, int max_card = 4) {
    GenerativeModel model;
    auto card = [&] { return 2 + static_cast<int>(inferact::runif(rng) * (max_card - 1)); };
    model.factor_cards = {card(), card(), card()};
    for (int m = 0; m < 2; ++m) {
        inferact::LikelihoodTensor a;
        const int first = static_cast<int>(inferact::runif(rng) * 3.0);
        a.deps.push_back(first);
        if (inferact::runif(rng) < 0.4) a.deps.push_back((first + 1) % 3);
        Eigen::Index joint = 1;
        for (int f : a.deps) {
            a.dep_cards.push_back(model.factor_cards[static_cast<std::size_t>(f)]);
            joint *= a.dep_cards.back();
        }
        const int num_obs = card();
        a.values = random_stochastic(num_obs, static_cast<int>(joint), rng);
        model.A.push_back(std::move(a));
        model.C.push_back(Vector::NullaryExpr(
            num_obs, [&](Eigen::Index) { return 6.0 * inferact::runif(rng) - 3.0; }));
    }
    for (int f = 0; f < 3; ++f) {
        inferact::TransitionTensor b;
        const int c = model.factor_cards[static_cast<std::size_t>(f)];
        const int controls = f == 2 ? 1 : c + 1;
        for (int u = 0; u < controls; ++u) b.controls.push_back(random_stochastic(c, c, rng));
        model.B.push_back(std::move(b));
        model.D.push_back(random_dist(c, rng));
    }
    return model;
}

inline BeliefState random_beliefs(const GenerativeModel& model, std::mt19937_64& rng) {
    BeliefState q;
    for (int c : model.factor_cards) q.factors.push_back(random_dist(c, rng));
    return q;
}

}  // namespace oracle
