#pragma once

#include "inferact/environment.hpp"
#include "inferact/learning.hpp"
#include "inferact/model.hpp"
#include "inferact/policy.hpp"
#include "inferact/remote.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace inferact {

enum class EnvKind { synthetic, remote };

struct RunConfig {
    ModelDims dims;
    double eta = 50.0;
    double gamma = 8.0;
    double alpha = 16.0;
    int horizon = 2;
    PolicyMode policy_mode = PolicyMode::cartesian;
    ActionSelection action_mode = ActionSelection::stochastic;
    int steps = 100;
    uint64_t seed = 1;
    int infer_iters = 10;
    int top_k = 5;
    int snapshot_interval = 25;    // step 0 and the final step always snapshot
    int early_stop_window = 0;     // 0 disables the unchanged-action early stop
    bool learn_a = true;
    bool learn_b = true;

    EnvKind env_kind = EnvKind::synthetic;
    std::string profile_path;      // synthetic: optional profile JSON; empty = seeded default
    double profile_noise_sd = 0.05;
    double profile_good_fraction = 0.2;
    RemoteConfig remote;
    std::string texts_path;        // remote: JSON with prompt_texts / search_texts

    std::string log_path;          // empty = keep records in memory only
    std::string snapshot_path;     // optional final model + Dirichlet JSON
};

/// Field-by-field validation; each message names the offending field.
std::vector<std::string> validate_config(const RunConfig& cfg);

/// Strict parse: unknown keys anywhere are errors naming the key.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

struct TopPolicy {
    int policy_index = 0;
    Policy policy;
    EFEBreakdown efe;
};

/// One loop iteration. duration_ms is measured but deliberately kept out of
/// the JSONL serialization so logs are byte-reproducible.
struct StepRecord {
    int step = 0;
    std::vector<int> action;
    Observation observation;
    BeliefState beliefs;
    double vfe = 0.0;
    std::vector<TopPolicy> top_policies;
    Vector action_efe;  // G of the repeated single-action policy per alphabet action
    std::optional<DirichletState> snapshot;
    double duration_ms = 0.0;
};

nlohmann::ordered_json step_record_to_json(const StepRecord& r);
StepRecord step_record_from_json(const nlohmann::json& j);

struct RunResult {
    std::vector<StepRecord> records;
    GenerativeModel final_model;
    DirichletState final_dirichlet;
    std::optional<GroundTruthProfile> profile;
    int prompt_actions = 0;
    int search_actions = 0;
    int no_actions = 0;
    double final_vfe = 0.0;
    double total_ms = 0.0;
    bool completed = false;
    std::string abort_reason;
};

/// Algorithm ordering per step: observe, infer states, score policies,
/// compute the policy posterior, select the first action of the chosen
/// policy, step the environment, apply learning updates. Deterministic
/// end-to-end for the synthetic environment and a fixed seed. Environment
/// failures abort with the partial log flushed.
RunResult run_experiment(const RunConfig& cfg);

/// Next step's prior: the posterior pushed through the selected action's
/// transitions. Replaces D after the first step.
BeliefState belief_rollover(const BeliefState& posterior, const GenerativeModel& model,
                            const std::vector<int>& selected_action);

}  // namespace inferact
