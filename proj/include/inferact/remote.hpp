#pragma once

#include "inferact/environment.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace inferact {

enum class MetricSet { prompt, search };

/// Metric key triples, in observation-modality order.
const std::vector<std::string>& metric_keys(MetricSet set);

struct RemoteConfig {
    std::string endpoint;   // full URL, e.g. http://host:8080/v1/chat/completions
    std::string model;
    double timeout_s = 30.0;
    int max_retries = 3;
    std::string api_key_env = "INFERACT_API_KEY";
    std::string transcript_path;  // optional JSONL request/response audit log
};

struct EvaluationRequest {
    MetricSet metrics = MetricSet::search;
    std::string text;
};

/// Sends a chat-completion request instructing JSON-only output with exactly
/// the three metric keys, parses the first balanced JSON object in the reply,
/// and returns grid-valid scores. Malformed replies and transport failures
/// are retried up to max_retries; out-of-range scores and a missing
/// credential are hard errors.
EvaluationScores remote_evaluate(const EvaluationRequest& request, const RemoteConfig& cfg);

/// Extracts the first balanced JSON object from free-form model output.
/// Returns an empty string when none is found.
std::string extract_json_object(const std::string& text);

/// Environment whose quality scores come from a remote evaluator judging
/// caller-supplied texts (one per prompt state and per search state). State
/// transitions mirror the synthetic environment; info progression uses the
/// returned usefulness score as the step probability.
class RemoteEnvironment {
public:
    RemoteEnvironment(RemoteConfig cfg, std::vector<std::string> prompt_texts,
                      std::vector<std::string> search_texts, ModelDims dims, uint64_t seed);

    Observation initial_observation();
    Observation step(const std::vector<int>& action);
    const EnvState& state() const { return state_; }

private:
    Observation emit(bool search_acted);

    RemoteConfig cfg_;
    std::vector<std::string> prompt_texts_;
    std::vector<std::string> search_texts_;
    ModelDims dims_;
    EnvState state_;
    std::mt19937_64 rng_;
};

}  // namespace inferact
