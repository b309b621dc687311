#include "inferact/remote.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace inferact;

TEST_CASE("extract_json_object") {
    CHECK(extract_json_object("{\"a\":1}") == "{\"a\":1}");
    CHECK(extract_json_object("Sure! Here you go: {\"a\": {\"b\": 2}} hope that helps") ==
          "{\"a\": {\"b\": 2}}");
    CHECK(extract_json_object("{\"s\": \"br}ace\"}") == "{\"s\": \"br}ace\"}");
    CHECK(extract_json_object("no json here") == "");
    CHECK(extract_json_object("{unbalanced") == "");
}

namespace {

/// Loopback chat-completion server returning canned message contents.
struct FakeEvaluator {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::vector<std::string> replies;
    std::atomic<int> calls{0};

    explicit FakeEvaluator(std::vector<std::string> contents) : replies(std::move(contents)) {
        server.Post("/v1/chat/completions", [this](const httplib::Request&, httplib::Response& res) {
            const int n = calls.fetch_add(1);
            const std::string& content =
                replies[std::min<std::size_t>(static_cast<std::size_t>(n), replies.size() - 1)];
            nlohmann::json body;
            body["choices"] = {{{"message", {{"role", "assistant"}, {"content", content}}}}};
            res.set_content(body.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~FakeEvaluator() {
        server.stop();
        thread.join();
    }

    RemoteConfig config() const {
        RemoteConfig cfg;
        cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
        cfg.model = "test-model";
        cfg.max_retries = 2;
        cfg.timeout_s = 5.0;
        return cfg;
    }
};

struct KeyGuard {
    KeyGuard() { setenv("INFERACT_API_KEY", "test-key", 1); }
    ~KeyGuard() { unsetenv("INFERACT_API_KEY"); }
};

}  // namespace

TEST_CASE("remote_evaluate parses the three-key schema") {
    KeyGuard key;
    FakeEvaluator fake(
        {R"({"info_relevance":0.8,"info_usefulness":0.6,"source_quality":0.9})"});
    const EvaluationScores s =
        remote_evaluate({MetricSet::search, "some results"}, fake.config());
    CHECK(s.values[0] == doctest::Approx(0.8));
    CHECK(s.values[1] == doctest::Approx(0.6));
    CHECK(s.values[2] == doctest::Approx(0.9));
    CHECK(scale_scores(s) == std::array<int, 3>{8, 6, 9});
}

TEST_CASE("remote_evaluate extracts JSON wrapped in prose and retries garbage") {
    KeyGuard key;
    FakeEvaluator fake(
        {"total nonsense without any braces",
         "Here are the scores: {\"accuracy\":0.5,\"relevance\":0.7,\"comprehensiveness\":1.0}"});
    const EvaluationScores s =
        remote_evaluate({MetricSet::prompt, "agent response"}, fake.config());
    CHECK(fake.calls.load() == 2);
    CHECK(s.values[0] == doctest::Approx(0.5));
    CHECK(s.values[2] == doctest::Approx(1.0));
}

TEST_CASE("remote_evaluate rejects out-of-range scores") {
    KeyGuard key;
    FakeEvaluator fake(
        {R"({"info_relevance":1.3,"info_usefulness":0.5,"source_quality":0.5})"});
    CHECK_THROWS_AS(remote_evaluate({MetricSet::search, "x"}, fake.config()), std::out_of_range);
}

TEST_CASE("remote_evaluate surfaces persistent malformed output after retries") {
    KeyGuard key;
    FakeEvaluator fake({R"({"wrong_key":0.5})"});
    CHECK_THROWS_WITH_AS(remote_evaluate({MetricSet::search, "x"}, fake.config()),
                         doctest::Contains("giving up"), std::runtime_error);
    CHECK(fake.calls.load() == 3);  // initial try + 2 retries
}

TEST_CASE("remote_evaluate requires the credential") {
    unsetenv("INFERACT_API_KEY");
    RemoteConfig cfg;
    cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    CHECK_THROWS_WITH_AS(remote_evaluate({MetricSet::search, "x"}, cfg),
                         doctest::Contains("credential"), std::runtime_error);
}

TEST_CASE("RemoteEnvironment emits all modalities and advances info state") {
    KeyGuard key;
    FakeEvaluator fake(
        {R"({"accuracy":0.9,"relevance":0.8,"comprehensiveness":0.7,)"
         R"("info_relevance":0.6,"info_usefulness":1.0,"source_quality":0.5})"});
    const ModelDims dims{2, 2, 3, 11};
    RemoteEnvironment env(fake.config(), {"prompt a", "prompt b"}, {"idle", "search one"}, dims, 5);

    Observation obs = env.step({0, 2, 0});
    CHECK(obs.indices == std::vector<int>{9, 8, 7, 6, 10, 5, 1});
    CHECK(env.state().info_level == 1);
    obs = env.step({1, 0, 0});
    CHECK(env.state().current_prompt == 0);
    CHECK(obs[6] == 1);
}
