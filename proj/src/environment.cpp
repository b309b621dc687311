#include "inferact/environment.hpp"

#include "inferact/policy.hpp"
#include "inferact/prob.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace inferact {

int GroundTruthProfile::best_prompt() const {
    Eigen::Index best = 0;
    prompt_quality.rowwise().mean().maxCoeff(&best);
    return static_cast<int>(best);
}

GroundTruthProfile make_default_profile(int prompts, int searches, uint64_t seed, double noise_sd,
                                        double good_fraction) {
    if (prompts < 1 || searches < 1)
        throw std::invalid_argument("make_default_profile: need at least one state per factor");
    GroundTruthProfile p;
    p.noise_sd = noise_sd;
    p.seed = seed;
    std::mt19937_64 rng(mix_seed(seed, 0x70726f66ULL));  // profile stream

    const int num_good = std::max(1, static_cast<int>(std::lround(good_fraction * prompts)));
    std::vector<int> order(static_cast<std::size_t>(prompts));
    std::iota(order.begin(), order.end(), 0);
    for (int i = prompts - 1; i > 0; --i) {  // Fisher-Yates on the deterministic stream
        const int j = static_cast<int>(runif(rng) * (i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    p.prompt_quality.resize(prompts, 3);
    for (int i = 0; i < prompts; ++i) {
        const bool good = std::find(order.begin(), order.begin() + num_good, i) !=
                          order.begin() + num_good;
        for (int k = 0; k < 3; ++k) {
            const double lo = good ? 0.80 : 0.20;
            const double hi = good ? 0.95 : 0.50;
            p.prompt_quality(i, k) = lo + (hi - lo) * runif(rng);
        }
    }

    // Active search states (1..S-1) return fresh material that scores well
    // while there is still something to learn; the decay target (state 0) is
    // the settled baseline corpus. Once the info level saturates, the
    // redundancy factor drags active-search scores below the baseline, so
    // searching stops paying and the durable reward signal is the prompt
    // structure.
    p.search_quality.resize(searches, 3);
    p.search_quality(0, 0) = 0.36 + 0.04 * runif(rng);
    p.search_quality(0, 1) = 0.48 + 0.04 * runif(rng);
    p.search_quality(0, 2) = 0.36 + 0.04 * runif(rng);
    for (int s = 1; s < searches; ++s) {
        p.search_quality(s, 0) = 0.50 + 0.08 * runif(rng);  // info_relevance
        p.search_quality(s, 1) = 0.55 + 0.08 * runif(rng);  // info_usefulness
        p.search_quality(s, 2) = 0.50 + 0.08 * runif(rng);  // source_quality
    }
    return p;
}

nlohmann::ordered_json profile_to_json(const GroundTruthProfile& p) {
    nlohmann::ordered_json j;
    j["version"] = "inferact-profile/1";
    j["noise_sd"] = p.noise_sd;
    j["seed"] = p.seed;
    j["redundancy_factor"] = p.redundancy_factor;
    auto rows = [](const Matrix& m) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            out.push_back(std::move(row));
        }
        return out;
    };
    j["prompt_quality"] = rows(p.prompt_quality);
    j["search_quality"] = rows(p.search_quality);
    return j;
}

GroundTruthProfile profile_from_json(const nlohmann::json& j) {
    if (j.at("version").get<std::string>() != "inferact-profile/1")
        throw std::invalid_argument("profile_from_json: unsupported version");
    GroundTruthProfile p;
    p.noise_sd = j.at("noise_sd").get<double>();
    p.seed = j.at("seed").get<uint64_t>();
    p.redundancy_factor = j.value("redundancy_factor", 1.0);
    auto matrix = [](const nlohmann::json& rows) {
        if (rows.empty()) throw std::invalid_argument("profile_from_json: empty quality table");
        Matrix m(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.at(0).size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                m(r, c) = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
        return m;
    };
    p.prompt_quality = matrix(j.at("prompt_quality"));
    p.search_quality = matrix(j.at("search_quality"));
    if ((p.prompt_quality.array() < 0.0).any() || (p.prompt_quality.array() > 1.0).any() ||
        (p.search_quality.array() < 0.0).any() || (p.search_quality.array() > 1.0).any())
        throw std::invalid_argument("profile_from_json: quality means must lie in [0, 1]");
    return p;
}

std::array<int, 3> scale_scores(const EvaluationScores& scores) {
    std::array<int, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) {
        const double s = scores.values[k];
        if (s < 0.0 || s > 1.0)
            throw std::out_of_range("scale_scores: score " + std::to_string(s) +
                                    " outside [0, 1]");
        const double scaled = s * 10.0;
        const long idx = std::lround(scaled);
        if (std::abs(scaled - static_cast<double>(idx)) > 1e-8)
            std::cerr << "inferact: warning: score " << s
                      << " off the 0.1 grid; rounding to " << (idx / 10.0) << "\n";
        out[k] = static_cast<int>(idx);
    }
    return out;
}

SyntheticEnvironment::SyntheticEnvironment(GroundTruthProfile profile, ModelDims dims,
                                           uint64_t seed)
    : profile_(std::move(profile)), dims_(dims), rng_(mix_seed(seed, 0x656e76ULL)) {
    if (profile_.num_prompts() != dims_.prompts || profile_.num_searches() != dims_.searches)
        throw std::invalid_argument("SyntheticEnvironment: profile does not match dims");
}

int SyntheticEnvironment::quantize(double score) const {
    const double clamped = std::clamp(score, 0.0, 1.0);
    return static_cast<int>(std::lround(clamped * (dims_.quality_levels - 1)));
}

int SyntheticEnvironment::sample_quality(double mean) {
    return quantize(mean + profile_.noise_sd * rnorm(rng_));
}

Observation SyntheticEnvironment::emit(bool search_acted, int acting_search_state) {
    Observation obs;
    obs.indices.resize(kNumModalities);
    for (int k = 0; k < 3; ++k)
        obs.indices[static_cast<std::size_t>(k)] =
            sample_quality(profile_.prompt_quality(state_.current_prompt, k));
    // Active retrieval with a saturated info level returns redundant
    // material and is scored down accordingly.
    const bool redundant = search_acted && state_.info_level == dims_.info_levels - 1;
    const double scale = redundant ? profile_.redundancy_factor : 1.0;
    for (int k = 0; k < 3; ++k)
        obs.indices[static_cast<std::size_t>(3 + k)] =
            sample_quality(scale * profile_.search_quality(state_.current_search, k));
    if (search_acted && state_.info_level < dims_.info_levels - 1) {
        const double usefulness = profile_.search_quality(acting_search_state, 1);
        if (runif(rng_) < usefulness) ++state_.info_level;
    }
    obs.indices[kInfoModality] = state_.info_level;
    return obs;
}

Observation SyntheticEnvironment::initial_observation() { return emit(false, 0); }

Observation SyntheticEnvironment::step(const std::vector<int>& action) {
    if (!satisfies_action_constraints(action))
        throw std::invalid_argument("SyntheticEnvironment::step: invalid action");
    const int prompt_ctrl = action[0];
    const int search_ctrl = action[1];
    if (prompt_ctrl > dims_.prompts || search_ctrl > dims_.searches)
        throw std::invalid_argument("SyntheticEnvironment::step: control out of range");

    if (prompt_ctrl > 0) {
        state_.current_prompt = prompt_ctrl - 1;
        return emit(false, 0);
    }
    if (search_ctrl > 0) {
        state_.current_search = search_ctrl - 1;
        return emit(true, state_.current_search);
    }
    state_.current_search = 0;  // no-action decays the search state
    return emit(false, 0);
}

}  // namespace inferact
