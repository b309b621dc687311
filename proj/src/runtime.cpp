#include "inferact/runtime.hpp"

#include "inferact/prob.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>

namespace inferact {

namespace {

constexpr uint64_t kActionStream = 0x616374ULL;

using nlohmann::ordered_json;

/// Index of the policy that repeats alphabet action `a` every step.
std::size_t repeated_policy_index(int a, int num_actions, int horizon, PolicyMode mode) {
    if (mode == PolicyMode::repeated) return static_cast<std::size_t>(a);
    std::size_t idx = 0;
    for (int t = 0; t < horizon; ++t) idx = idx * static_cast<std::size_t>(num_actions) +
                                             static_cast<std::size_t>(a);
    return idx;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::logic_error("runtime invariant violated: " + what);
}

}  // namespace

std::vector<std::string> validate_config(const RunConfig& cfg) {
    std::vector<std::string> out;
    auto bad = [&out](const std::string& field, const std::string& why) {
        out.push_back(field + ": " + why);
    };
    if (cfg.dims.prompts < 2) bad("dims.prompts", "must be >= 2");
    if (cfg.dims.searches < 2) bad("dims.searches", "must be >= 2");
    if (cfg.dims.info_levels < 2) bad("dims.info_levels", "must be >= 2");
    if (cfg.dims.quality_levels < 2) bad("dims.quality_levels", "must be >= 2");
    if (!(cfg.eta > 0.0)) bad("eta", "must be > 0");
    if (!(cfg.gamma > 0.0)) bad("gamma", "must be > 0");
    if (!(cfg.alpha > 0.0)) bad("alpha", "must be > 0");
    if (cfg.horizon < 1) bad("horizon", "must be >= 1");
    if (cfg.steps < 1) bad("steps", "must be >= 1");
    if (cfg.infer_iters < 1) bad("infer_iters", "must be >= 1");
    if (cfg.top_k < 0) bad("top_k", "must be >= 0");
    if (cfg.snapshot_interval < 0) bad("snapshot_interval", "must be >= 0");
    if (cfg.early_stop_window < 0) bad("early_stop_window", "must be >= 0");
    if (cfg.env_kind == EnvKind::remote) {
        if (cfg.remote.endpoint.empty()) bad("env.endpoint", "required for the remote environment");
        if (cfg.texts_path.empty()) bad("env.texts", "required for the remote environment");
        const char* key = std::getenv(cfg.remote.api_key_env.c_str());
        if (key == nullptr || *key == '\0')
            bad("env", "credential missing: set " + cfg.remote.api_key_env);
    }
    return out;
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                         const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("config: unknown key \"" + (scope.empty() ? key : scope +
                                        "." + key) + "\"");
    }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    reject_unknown_keys(j, {"dims", "eta", "gamma", "alpha", "horizon", "policy_mode",
                            "action_mode", "steps", "seed", "infer_iters", "top_k",
                            "snapshot_interval", "early_stop_window", "learn_a", "learn_b", "env",
                            "log", "snapshot"},
                        "");
    if (j.contains("dims")) {
        const auto& d = j.at("dims");
        reject_unknown_keys(d, {"prompts", "searches", "info_levels", "quality_levels"}, "dims");
        cfg.dims.prompts = d.value("prompts", cfg.dims.prompts);
        cfg.dims.searches = d.value("searches", cfg.dims.searches);
        cfg.dims.info_levels = d.value("info_levels", cfg.dims.info_levels);
        cfg.dims.quality_levels = d.value("quality_levels", cfg.dims.quality_levels);
    }
    cfg.eta = j.value("eta", cfg.eta);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.horizon = j.value("horizon", cfg.horizon);
    if (j.contains("policy_mode")) {
        const std::string mode = j.at("policy_mode").get<std::string>();
        if (mode == "cartesian")
            cfg.policy_mode = PolicyMode::cartesian;
        else if (mode == "repeated")
            cfg.policy_mode = PolicyMode::repeated;
        else
            throw std::invalid_argument("config: policy_mode must be cartesian or repeated");
    }
    if (j.contains("action_mode")) {
        const std::string mode = j.at("action_mode").get<std::string>();
        if (mode == "deterministic")
            cfg.action_mode = ActionSelection::deterministic;
        else if (mode == "stochastic")
            cfg.action_mode = ActionSelection::stochastic;
        else
            throw std::invalid_argument("config: action_mode must be deterministic or stochastic");
    }
    cfg.steps = j.value("steps", cfg.steps);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.infer_iters = j.value("infer_iters", cfg.infer_iters);
    cfg.top_k = j.value("top_k", cfg.top_k);
    cfg.snapshot_interval = j.value("snapshot_interval", cfg.snapshot_interval);
    cfg.early_stop_window = j.value("early_stop_window", cfg.early_stop_window);
    cfg.learn_a = j.value("learn_a", cfg.learn_a);
    cfg.learn_b = j.value("learn_b", cfg.learn_b);
    if (j.contains("env")) {
        const auto& e = j.at("env");
        reject_unknown_keys(e, {"type", "profile", "noise_sd", "good_fraction", "endpoint",
                                "model", "timeout_s", "max_retries", "texts", "transcript"},
                            "env");
        const std::string type = e.value("type", "synthetic");
        if (type == "synthetic")
            cfg.env_kind = EnvKind::synthetic;
        else if (type == "remote")
            cfg.env_kind = EnvKind::remote;
        else
            throw std::invalid_argument("config: env.type must be synthetic or remote");
        cfg.profile_path = e.value("profile", cfg.profile_path);
        cfg.profile_noise_sd = e.value("noise_sd", cfg.profile_noise_sd);
        cfg.profile_good_fraction = e.value("good_fraction", cfg.profile_good_fraction);
        cfg.remote.endpoint = e.value("endpoint", cfg.remote.endpoint);
        cfg.remote.model = e.value("model", cfg.remote.model);
        cfg.remote.timeout_s = e.value("timeout_s", cfg.remote.timeout_s);
        cfg.remote.max_retries = e.value("max_retries", cfg.remote.max_retries);
        cfg.texts_path = e.value("texts", cfg.texts_path);
        cfg.remote.transcript_path = e.value("transcript", cfg.remote.transcript_path);
    }
    cfg.log_path = j.value("log", cfg.log_path);
    cfg.snapshot_path = j.value("snapshot", cfg.snapshot_path);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    nlohmann::json j;
    in >> j;
    return run_config_from_json(j);
}

ordered_json step_record_to_json(const StepRecord& r) {
    ordered_json j;
    j["version"] = "inferact-log/1";
    j["step"] = r.step;
    j["action"] = r.action;
    j["observation"] = r.observation.indices;
    j["beliefs"] = ordered_json::array();
    for (const Vector& q : r.beliefs.factors)
        j["beliefs"].push_back(std::vector<double>(q.data(), q.data() + q.size()));
    j["vfe"] = r.vfe;
    j["top_policies"] = ordered_json::array();
    for (const TopPolicy& tp : r.top_policies) {
        ordered_json p;
        p["policy"] = tp.policy_index;
        p["steps"] = tp.policy.steps;
        p["G"] = tp.efe.G;
        p["state_info_gain"] = tp.efe.state_info_gain;
        p["pragmatic_value"] = tp.efe.pragmatic_value;
        p["param_info_gain"] = tp.efe.param_info_gain;
        p["risk"] = tp.efe.risk;
        p["ambiguity"] = tp.efe.ambiguity;
        j["top_policies"].push_back(std::move(p));
    }
    j["action_efe"] = std::vector<double>(r.action_efe.data(),
                                          r.action_efe.data() + r.action_efe.size());
    if (r.snapshot) {
        ordered_json snap;
        snap["pA"] = ordered_json::array();
        for (const Matrix& m : r.snapshot->pA) {
            ordered_json t;
            t["shape"] = {m.rows(), m.cols()};
            std::vector<double> data;
            data.reserve(static_cast<std::size_t>(m.size()));
            for (Eigen::Index row = 0; row < m.rows(); ++row)
                for (Eigen::Index col = 0; col < m.cols(); ++col) data.push_back(m(row, col));
            t["data"] = std::move(data);
            snap["pA"].push_back(std::move(t));
        }
        j["snapshot"] = std::move(snap);
    }
    return j;
}

StepRecord step_record_from_json(const nlohmann::json& j) {
    if (j.at("version").get<std::string>() != "inferact-log/1")
        throw std::invalid_argument("step_record_from_json: unsupported version");
    StepRecord r;
    r.step = j.at("step").get<int>();
    r.action = j.at("action").get<std::vector<int>>();
    r.observation.indices = j.at("observation").get<std::vector<int>>();
    for (const auto& q : j.at("beliefs")) {
        const auto v = q.get<std::vector<double>>();
        r.beliefs.factors.push_back(
            Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    r.vfe = j.at("vfe").get<double>();
    for (const auto& p : j.at("top_policies")) {
        TopPolicy tp;
        tp.policy_index = p.at("policy").get<int>();
        tp.policy.steps = p.at("steps").get<std::vector<std::vector<int>>>();
        tp.efe.G = p.at("G").get<double>();
        tp.efe.state_info_gain = p.at("state_info_gain").get<double>();
        tp.efe.pragmatic_value = p.at("pragmatic_value").get<double>();
        tp.efe.param_info_gain = p.at("param_info_gain").get<double>();
        tp.efe.risk = p.at("risk").get<double>();
        tp.efe.ambiguity = p.at("ambiguity").get<double>();
        r.top_policies.push_back(std::move(tp));
    }
    const auto efe = j.at("action_efe").get<std::vector<double>>();
    r.action_efe = Eigen::Map<const Vector>(efe.data(), static_cast<Eigen::Index>(efe.size()));
    if (j.contains("snapshot")) {
        DirichletState snap;
        for (const auto& t : j.at("snapshot").at("pA")) {
            const Eigen::Index rows = t.at("shape").at(0);
            const Eigen::Index cols = t.at("shape").at(1);
            const auto data = t.at("data").get<std::vector<double>>();
            Matrix m(rows, cols);
            std::size_t i = 0;
            for (Eigen::Index row = 0; row < rows; ++row)
                for (Eigen::Index col = 0; col < cols; ++col) m(row, col) = data[i++];
            snap.pA.push_back(std::move(m));
        }
        snap.reset_masks();
        r.snapshot = std::move(snap);
    }
    return r;
}

BeliefState belief_rollover(const BeliefState& posterior, const GenerativeModel& model,
                            const std::vector<int>& selected_action) {
    return predict_states(model, posterior, selected_action);
}

namespace {

/// Minimal uniform interface over the two environment kinds.
struct Env {
    std::function<Observation()> initial;
    std::function<Observation(const std::vector<int>&)> step;
};

Env make_env(const RunConfig& cfg, RunResult& result, std::shared_ptr<void>& holder) {
    if (cfg.env_kind == EnvKind::synthetic) {
        GroundTruthProfile profile;
        if (cfg.profile_path.empty()) {
            profile = make_default_profile(cfg.dims.prompts, cfg.dims.searches, cfg.seed,
                                           cfg.profile_noise_sd, cfg.profile_good_fraction);
        } else {
            std::ifstream in(cfg.profile_path);
            if (!in) throw std::runtime_error("cannot read profile file " + cfg.profile_path);
            nlohmann::json j;
            in >> j;
            profile = profile_from_json(j);
        }
        result.profile = profile;
        auto env = std::make_shared<SyntheticEnvironment>(std::move(profile), cfg.dims, cfg.seed);
        holder = env;
        return {[env] { return env->initial_observation(); },
                [env](const std::vector<int>& a) { return env->step(a); }};
    }

    std::ifstream in(cfg.texts_path);
    if (!in) throw std::runtime_error("cannot read texts file " + cfg.texts_path);
    nlohmann::json j;
    in >> j;
    auto env = std::make_shared<RemoteEnvironment>(
        cfg.remote, j.at("prompt_texts").get<std::vector<std::string>>(),
        j.at("search_texts").get<std::vector<std::string>>(), cfg.dims, cfg.seed);
    holder = env;
    return {[env] { return env->initial_observation(); },
            [env](const std::vector<int>& a) { return env->step(a); }};
}

std::vector<TopPolicy> top_policies(const std::vector<Policy>& policies,
                                    const std::vector<EFEBreakdown>& scores, int k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a].G > scores[b].G; });
    std::vector<TopPolicy> out;
    for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < k; ++i)
        out.push_back({static_cast<int>(order[i]), policies[order[i]], scores[order[i]]});
    return out;
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg) {
    {
        const std::vector<std::string> problems = validate_config(cfg);
        if (!problems.empty()) {
            std::string msg = "invalid config";
            for (const std::string& p : problems) msg += "\n  " + p;
            throw std::invalid_argument(msg);
        }
    }

    RunResult result;
    auto [model, dirichlet] = build_paper_model(cfg.dims);

    std::shared_ptr<void> env_holder;
    Env env = make_env(cfg, result, env_holder);

    LearningConfig lcfg;
    lcfg.eta = cfg.eta;
    lcfg.learn_a = cfg.learn_a;
    lcfg.learn_b = cfg.learn_b;

    const std::vector<Policy> policies =
        enumerate_policies(cfg.dims.prompts, cfg.dims.searches, cfg.horizon, cfg.policy_mode);
    const int num_actions = 1 + cfg.dims.prompts + cfg.dims.searches;

    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path, std::ios::trunc);
        if (!log) throw std::runtime_error("cannot open log file " + cfg.log_path);
    }

    const double initial_pA_total = dirichlet.total_pA();
    const int learned_modalities =
        lcfg.learn_a ? (lcfg.modalities.empty() ? model.num_modalities()
                                                : static_cast<int>(lcfg.modalities.size()))
                     : 0;

    BeliefState prior{model.D};
    Observation obs;
    const auto t_start = std::chrono::steady_clock::now();
    try {
        obs = env.initial();
    } catch (const std::exception& e) {
        result.abort_reason = e.what();
        return result;
    }

    BeliefState prev_posterior;
    std::vector<int> prev_action;
    std::vector<int> last_action;
    int last_top_policy = -1;
    int unchanged_streak = 0;
    int steps_done = 0;

    for (int t = 0; t < cfg.steps; ++t) {
        const auto step_start = std::chrono::steady_clock::now();
        StepRecord rec;
        rec.step = t;
        rec.observation = obs;
        if (t == 0 || t == cfg.steps - 1 ||
            (cfg.snapshot_interval > 0 && t % cfg.snapshot_interval == 0))
            rec.snapshot = dirichlet;

        BeliefState q = infer_states(model, prior, obs, cfg.infer_iters);
        for (const Vector& f : q.factors)
            require(is_categorical(f, kDriftError), "posterior not normalized");
        rec.beliefs = q;
        rec.vfe = compute_vfe(model, q, obs, prior);

        const std::vector<EFEBreakdown> scores = score_policies(model, dirichlet, q, policies);
        for (const EFEBreakdown& s : scores)
            require(std::abs(s.state_info_gain + s.pragmatic_value + s.risk + s.ambiguity) <= 1e-6,
                    "EFE dual-form identity");
        PolicyPosterior posterior = policy_posterior(policies, scores, cfg.gamma);
        const std::vector<int> action = select_action(
            posterior, cfg.alpha, cfg.action_mode, mix_seed(cfg.seed, kActionStream + static_cast<uint64_t>(t)));
        require(satisfies_action_constraints(action), "selected action violates mutual exclusion");
        rec.action = action;

        rec.action_efe.resize(num_actions);
        for (int a = 0; a < num_actions; ++a)
            rec.action_efe[a] =
                scores[repeated_policy_index(a, num_actions, cfg.horizon, cfg.policy_mode)].G;
        rec.top_policies = top_policies(policies, scores, cfg.top_k);

        Eigen::Index top = 0;
        posterior.probs.maxCoeff(&top);

        // Environment step, then learning for this step's observation (and
        // the previous step's transition, now that both beliefs exist).
        Observation next_obs;
        bool env_failed = false;
        try {
            next_obs = env.step(action);
        } catch (const std::exception& e) {
            result.abort_reason = e.what();
            env_failed = true;
        }

        if (!env_failed) {
            dirichlet = update_likelihood(dirichlet, obs, q, model, lcfg);
            if (t > 0) dirichlet = update_transitions(dirichlet, prev_posterior, q, prev_action, lcfg);
            const NormalizedDirichlet means = normalize_dirichlet(dirichlet);
            if (lcfg.learn_a) {
                for (int m = 0; m < model.num_modalities(); ++m) {
                    if (!lcfg.modalities.empty() &&
                        std::find(lcfg.modalities.begin(), lcfg.modalities.end(), m) ==
                            lcfg.modalities.end())
                        continue;
                    model.A[static_cast<std::size_t>(m)].values = means.A[static_cast<std::size_t>(m)];
                }
            }
            if (lcfg.learn_b) {
                for (int f : lcfg.factors)
                    if (f >= 0 && f < model.num_factors())
                        model.B[static_cast<std::size_t>(f)].controls =
                            means.B[static_cast<std::size_t>(f)];
            }
        }

        rec.duration_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - step_start)
                              .count();
        if (log.is_open()) {
            log << step_record_to_json(rec).dump() << '\n';
            log.flush();
        }
        if (action[0] > 0)
            ++result.prompt_actions;
        else if (action[1] > 0)
            ++result.search_actions;
        else
            ++result.no_actions;
        result.final_vfe = rec.vfe;
        result.records.push_back(std::move(rec));
        ++steps_done;
        if (env_failed) {
            result.total_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t_start)
                                  .count();
            result.final_model = std::move(model);
            result.final_dirichlet = std::move(dirichlet);
            return result;
        }

        if (cfg.early_stop_window > 0) {
            if (action == last_action && static_cast<int>(top) == last_top_policy)
                ++unchanged_streak;
            else
                unchanged_streak = 0;
            last_action = action;
            last_top_policy = static_cast<int>(top);
            if (unchanged_streak >= cfg.early_stop_window) {
                prev_posterior = q;
                prev_action = action;
                break;
            }
        }

        prev_posterior = q;
        prev_action = action;
        prior = belief_rollover(q, model, action);
        obs = next_obs;
    }

    if (lcfg.learn_a && lcfg.modalities.empty()) {
        const double expected =
            initial_pA_total + cfg.eta * static_cast<double>(steps_done) * learned_modalities;
        require(std::abs(dirichlet.total_pA() - expected) <= 1e-6,
                "Dirichlet mass bookkeeping");
    }

    if (!cfg.snapshot_path.empty()) {
        std::ofstream snap(cfg.snapshot_path, std::ios::trunc);
        if (!snap) throw std::runtime_error("cannot open snapshot file " + cfg.snapshot_path);
        snap << model_to_json(model, &dirichlet).dump(2) << '\n';
    }

    result.total_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    result.final_model = std::move(model);
    result.final_dirichlet = std::move(dirichlet);
    result.completed = true;
    return result;
}

}  // namespace inferact
