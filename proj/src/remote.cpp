#include "inferact/remote.hpp"

#include "inferact/policy.hpp"
#include "inferact/prob.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace inferact {

const std::vector<std::string>& metric_keys(MetricSet set) {
    static const std::vector<std::string> prompt_keys = {"accuracy", "relevance",
                                                         "comprehensiveness"};
    static const std::vector<std::string> search_keys = {"info_relevance", "info_usefulness",
                                                         "source_quality"};
    return set == MetricSet::prompt ? prompt_keys : search_keys;
}

std::string extract_json_object(const std::string& text) {
    const std::size_t start = text.find('{');
    if (start == std::string::npos) return {};
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}') {
            if (--depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return {};
}

namespace {

struct ParsedEndpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

ParsedEndpoint split_endpoint(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos)
        throw std::invalid_argument("remote_evaluate: endpoint must include a scheme");
    const std::size_t path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string instruction_for(const EvaluationRequest& request) {
    const auto& keys = metric_keys(request.metrics);
    std::string out = "Evaluate the text below on three metrics. Respond with only a JSON "
                      "object and no other text, using exactly these keys, each scored from "
                      "0.0 to 1.0 in steps of 0.1:\n{\n";
    for (std::size_t i = 0; i < keys.size(); ++i) {
        out += "    \"" + keys[i] + "\": <score>";
        out += i + 1 < keys.size() ? ",\n" : "\n";
    }
    out += "}\n\nText:\n" + request.text;
    return out;
}

void append_transcript(const std::string& path, const nlohmann::ordered_json& entry) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::app);
    if (out) out << entry.dump() << '\n';
}

EvaluationScores parse_scores(const std::string& content, MetricSet set) {
    const std::string object = extract_json_object(content);
    if (object.empty()) throw std::runtime_error("no JSON object in evaluator reply");
    const nlohmann::json j = nlohmann::json::parse(object);
    EvaluationScores scores;
    const auto& keys = metric_keys(set);
    for (std::size_t k = 0; k < keys.size(); ++k) {
        if (!j.contains(keys[k]) || !j.at(keys[k]).is_number())
            throw std::runtime_error("evaluator reply missing numeric key '" + keys[k] + "'");
        scores.values[k] = j.at(keys[k]).get<double>();
    }
    return scores;
}

}  // namespace

EvaluationScores remote_evaluate(const EvaluationRequest& request, const RemoteConfig& cfg) {
    if (cfg.endpoint.empty()) throw std::invalid_argument("remote_evaluate: endpoint not set");
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw std::runtime_error("remote_evaluate: credential missing (set " + cfg.api_key_env +
                                 ")");

    const ParsedEndpoint ep = split_endpoint(cfg.endpoint);
    httplib::Client client(ep.base);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(cfg.timeout_s * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(static_cast<int>(cfg.timeout_s * 1000)));
    client.set_bearer_token_auth(key);

    nlohmann::ordered_json body;
    body["model"] = cfg.model;
    body["temperature"] = 0.0;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "user"}, {"content", instruction_for(request)}}});
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        httplib::Result res = client.Post(ep.path, payload, "application/json");
        nlohmann::ordered_json entry;
        entry["attempt"] = attempt;
        entry["request"] = body;
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            entry["error"] = last_error;
            append_transcript(cfg.transcript_path, entry);
            continue;
        }
        entry["status"] = res->status;
        entry["response"] = res->body;
        append_transcript(cfg.transcript_path, entry);
        if (res->status != 200) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        std::string content;
        try {
            const nlohmann::json reply = nlohmann::json::parse(res->body);
            content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            last_error = std::string("malformed completion body: ") + e.what();
            continue;
        }
        EvaluationScores scores;
        try {
            scores = parse_scores(content, request.metrics);
        } catch (const std::exception& e) {
            last_error = e.what();
            continue;
        }
        for (double v : scores.values) {
            if (v < 0.0 || v > 1.0)
                throw std::out_of_range("remote_evaluate: score " + std::to_string(v) +
                                        " outside [0, 1]");
        }
        return scores;
    }
    throw std::runtime_error("remote_evaluate: giving up after " +
                             std::to_string(cfg.max_retries + 1) + " attempts (" + last_error +
                             ")");
}

RemoteEnvironment::RemoteEnvironment(RemoteConfig cfg, std::vector<std::string> prompt_texts,
                                     std::vector<std::string> search_texts, ModelDims dims,
                                     uint64_t seed)
    : cfg_(std::move(cfg)),
      prompt_texts_(std::move(prompt_texts)),
      search_texts_(std::move(search_texts)),
      dims_(dims),
      rng_(mix_seed(seed, 0x72656d6fULL)) {
    if (static_cast<int>(prompt_texts_.size()) != dims_.prompts ||
        static_cast<int>(search_texts_.size()) != dims_.searches)
        throw std::invalid_argument("RemoteEnvironment: need one text per prompt and search state");
}

Observation RemoteEnvironment::emit(bool search_acted) {
    EvaluationRequest prompt_req{MetricSet::prompt,
                                 prompt_texts_[static_cast<std::size_t>(state_.current_prompt)]};
    EvaluationRequest search_req{MetricSet::search,
                                 search_texts_[static_cast<std::size_t>(state_.current_search)]};
    const auto prompt_obs = scale_scores(remote_evaluate(prompt_req, cfg_));
    const EvaluationScores search_scores = remote_evaluate(search_req, cfg_);
    const auto search_obs = scale_scores(search_scores);

    if (search_acted && state_.info_level < dims_.info_levels - 1) {
        if (runif(rng_) < search_scores.values[1]) ++state_.info_level;
    }
    Observation obs;
    obs.indices = {prompt_obs[0], prompt_obs[1], prompt_obs[2],
                   search_obs[0], search_obs[1], search_obs[2], state_.info_level};
    return obs;
}

Observation RemoteEnvironment::initial_observation() { return emit(false); }

Observation RemoteEnvironment::step(const std::vector<int>& action) {
    if (!satisfies_action_constraints(action))
        throw std::invalid_argument("RemoteEnvironment::step: invalid action");
    const int prompt_ctrl = action[0];
    const int search_ctrl = action[1];
    if (prompt_ctrl > dims_.prompts || search_ctrl > dims_.searches)
        throw std::invalid_argument("RemoteEnvironment::step: control out of range");
    if (prompt_ctrl > 0) {
        state_.current_prompt = prompt_ctrl - 1;
        return emit(false);
    }
    if (search_ctrl > 0) {
        state_.current_search = search_ctrl - 1;
        return emit(true);
    }
    state_.current_search = 0;
    return emit(false);
}

}  // namespace inferact
