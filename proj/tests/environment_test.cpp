#include "inferact/environment.hpp"

#include "inferact/prob.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace inferact;

TEST_CASE("make_default_profile structure") {
    const GroundTruthProfile p = make_default_profile(5, 3, 42);
    CHECK(p.num_prompts() == 5);
    CHECK(p.num_searches() == 3);
    CHECK((p.prompt_quality.array() >= 0.0).all());
    CHECK((p.prompt_quality.array() <= 1.0).all());

    // Exactly one good prompt at 20% of five states.
    int good = 0;
    for (int i = 0; i < 5; ++i)
        if (p.prompt_quality.row(i).mean() >= 0.8) ++good;
    CHECK(good == 1);
    CHECK(p.prompt_quality.row(p.best_prompt()).mean() >= 0.8);

    // Fresh searches outscore the baseline state while unsaturated, but the
    // redundancy discount drags them below it once the info level is full.
    for (int s = 1; s < 3; ++s) {
        CHECK(p.search_quality(s, 0) > p.search_quality(0, 0));
        CHECK(p.search_quality(s, 1) >= 0.45);
        CHECK(p.redundancy_factor * p.search_quality(s, 0) < p.search_quality(0, 0));
        CHECK(p.redundancy_factor * p.search_quality(s, 2) < p.search_quality(0, 2));
    }

    // Seeded generation is reproducible.
    const GroundTruthProfile q = make_default_profile(5, 3, 42);
    CHECK(p.prompt_quality == q.prompt_quality);
    CHECK(p.search_quality == q.search_quality);
}

TEST_CASE("profile JSON round-trip") {
    const GroundTruthProfile p = make_default_profile(4, 3, 7, 0.1, 0.25);
    const auto j = profile_to_json(p);
    CHECK(j.at("version") == "inferact-profile/1");
    const GroundTruthProfile back = profile_from_json(nlohmann::json::parse(j.dump()));
    CHECK((back.prompt_quality - p.prompt_quality).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.search_quality - p.search_quality).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.noise_sd == p.noise_sd);

    auto bad = j;
    bad["prompt_quality"][0][0] = 1.5;
    CHECK_THROWS_AS(profile_from_json(nlohmann::json::parse(bad.dump())), std::invalid_argument);
}

TEST_CASE("scale_scores") {
    CHECK(scale_scores({{0.0, 1.0, 0.5}}) == std::array<int, 3>{0, 10, 5});
    CHECK(scale_scores({{0.7, 0.3, 0.1}}) == std::array<int, 3>{7, 3, 1});
    // Off-grid values round to the nearest grid point (with a warning).
    CHECK(scale_scores({{0.73, 0.0, 0.0}})[0] == 7);
    CHECK(scale_scores({{0.85, 0.0, 0.0}})[0] == 9);  // lround half-away-from-zero
    CHECK_THROWS_AS(scale_scores({{1.3, 0.0, 0.0}}), std::out_of_range);
    CHECK_THROWS_AS(scale_scores({{-0.1, 0.0, 0.0}}), std::out_of_range);
}

TEST_CASE("env_step semantics with a noiseless profile") {
    GroundTruthProfile p = make_default_profile(3, 3, 1);
    p.noise_sd = 0.0;
    p.prompt_quality.row(0) << 1.0, 1.0, 1.0;
    p.search_quality.row(1) << 0.5, 1.0, 0.7;  // certain info progression
    p.search_quality.row(2) << 0.4, 0.0, 0.2;  // never progresses
    const ModelDims dims{3, 3, 3, 11};

    SyntheticEnvironment env(p, dims, 9);
    (void)env.initial_observation();

    // Prompt action pins the prompt state; top means map to the top bin.
    Observation obs = env.step({1, 0, 0});
    CHECK(env.state().current_prompt == 0);
    CHECK(obs[0] == 10);
    CHECK(obs[1] == 10);
    CHECK(obs[2] == 10);
    CHECK(obs[6] == 0);

    // Search with usefulness 1 advances the info level and reports it.
    obs = env.step({0, 2, 0});
    CHECK(env.state().current_search == 1);
    CHECK(obs[3] == 5);
    CHECK(obs[4] == 10);
    CHECK(obs[5] == 7);
    CHECK(obs[6] == 1);
    CHECK(env.state().info_level == 1);

    // Usefulness-zero search never advances it.
    obs = env.step({0, 3, 0});
    CHECK(env.state().current_search == 2);
    CHECK(obs[6] == 1);

    // No-action decays the search state and re-emits current observations.
    obs = env.step({0, 0, 0});
    CHECK(env.state().current_search == 0);
    CHECK(obs[0] == 10);  // prompt state unchanged

    CHECK_THROWS_AS(env.step({1, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(env.step({9, 0, 0}), std::invalid_argument);
}

TEST_CASE("same seed and action sequence give identical observations") {
    const GroundTruthProfile p = make_default_profile(4, 3, 3);
    const ModelDims dims{4, 3, 3, 11};
    SyntheticEnvironment a(p, dims, 77);
    SyntheticEnvironment b(p, dims, 77);
    std::mt19937_64 rng(123);
    CHECK(a.initial_observation().indices == b.initial_observation().indices);
    for (int t = 0; t < 200; ++t) {
        std::vector<int> action{0, 0, 0};
        const double u = runif(rng);
        if (u < 0.4)
            action[0] = 1 + static_cast<int>(runif(rng) * 4);
        else if (u < 0.8)
            action[1] = 1 + static_cast<int>(runif(rng) * 3);
        CHECK(a.step(action).indices == b.step(action).indices);
    }
}

TEST_CASE("fuzz: observations stay in range, info level is monotone") {
    std::mt19937_64 rng(31337);
    for (int run = 0; run < 10; ++run) {
        const int P = 2 + static_cast<int>(runif(rng) * 6);
        const int S = 2 + static_cast<int>(runif(rng) * 4);
        GroundTruthProfile p = make_default_profile(P, S, rng());
        p.noise_sd = runif(rng) * 0.3;
        const ModelDims dims{P, S, 3, 11};
        SyntheticEnvironment env(p, dims, rng());
        int info = env.initial_observation()[6];
        for (int t = 0; t < 1000; ++t) {
            std::vector<int> action{0, 0, 0};
            const double u = runif(rng);
            if (u < 0.4)
                action[0] = 1 + static_cast<int>(runif(rng) * P);
            else if (u < 0.8)
                action[1] = 1 + static_cast<int>(runif(rng) * S);
            const Observation obs = env.step(action);
            REQUIRE(obs.num_modalities() == 7);
            for (int m = 0; m < 6; ++m) {
                REQUIRE(obs[m] >= 0);
                REQUIRE(obs[m] <= 10);
            }
            REQUIRE(obs[6] >= info);  // never decreases within an episode
            REQUIRE(obs[6] <= 2);
            info = obs[6];
        }
    }
}

TEST_CASE("saturated info level marks active retrieval as redundant") {
    GroundTruthProfile p = make_default_profile(3, 3, 1);
    p.noise_sd = 0.0;
    p.search_quality.row(1) << 0.6, 1.0, 0.8;
    const ModelDims dims{3, 3, 3, 11};
    SyntheticEnvironment env(p, dims, 4);
    (void)env.initial_observation();

    Observation obs = env.step({0, 2, 0});  // fresh: full scores, info 0 -> 1
    CHECK(obs[3] == 6);
    CHECK(obs[5] == 8);
    CHECK(obs[6] == 1);
    obs = env.step({0, 2, 0});  // info 1 -> 2
    CHECK(obs[6] == 2);
    obs = env.step({0, 2, 0});  // saturated: scores scaled by 0.45
    CHECK(obs[3] == 3);         // round(10 * 0.45 * 0.6)
    CHECK(obs[5] == 4);         // round(10 * 0.45 * 0.8)
    // Passive emissions from the same state stay at baseline.
    obs = env.step({1, 0, 0});
    CHECK(obs[3] == 6);
    CHECK(obs[5] == 8);
}
