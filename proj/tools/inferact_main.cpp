// inferact: run active-inference experiments, export figure data, and
// analyze run logs.

#include "inferact/reporting.hpp"
#include "inferact/runtime.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>

namespace {

using namespace inferact;

int cmd_run(const std::string& config_path, const std::map<std::string, std::string>& overrides) {
    RunConfig cfg = load_run_config(config_path);
    if (auto it = overrides.find("steps"); it != overrides.end()) cfg.steps = std::stoi(it->second);
    if (auto it = overrides.find("seed"); it != overrides.end())
        cfg.seed = std::stoull(it->second);
    if (auto it = overrides.find("log"); it != overrides.end()) cfg.log_path = it->second;
    if (auto it = overrides.find("snapshot"); it != overrides.end())
        cfg.snapshot_path = it->second;
    if (auto it = overrides.find("profile"); it != overrides.end()) cfg.profile_path = it->second;
    if (auto it = overrides.find("env"); it != overrides.end()) {
        if (it->second == "synthetic")
            cfg.env_kind = EnvKind::synthetic;
        else if (it->second == "remote")
            cfg.env_kind = EnvKind::remote;
        else
            throw std::invalid_argument("--env must be synthetic or remote");
    }
    if (auto it = overrides.find("endpoint"); it != overrides.end())
        cfg.remote.endpoint = it->second;
    if (auto it = overrides.find("model"); it != overrides.end()) cfg.remote.model = it->second;
    if (auto it = overrides.find("texts"); it != overrides.end()) cfg.texts_path = it->second;

    const RunResult result = run_experiment(cfg);
    if (!result.completed) {
        std::cerr << "run aborted after " << result.records.size()
                  << " steps: " << result.abort_reason << "\n";
        return 1;
    }
    std::cout << "steps: " << result.records.size() << "\n"
              << "final VFE: " << result.final_vfe << "\n"
              << "actions: prompt " << result.prompt_actions << ", search "
              << result.search_actions << ", none " << result.no_actions << "\n"
              << "wall clock: " << result.total_ms / 1000.0 << " s\n";
    if (!cfg.log_path.empty()) std::cout << "log: " << cfg.log_path << "\n";
    if (!cfg.snapshot_path.empty()) std::cout << "snapshot: " << cfg.snapshot_path << "\n";
    return 0;
}

int cmd_export(const ExportSpec& spec) {
    export_log(load_log(spec.log_path), spec);
    return 0;
}

int cmd_analyze(const std::string& log_path, const std::string& out_path) {
    const AnalysisReport report = analyze_log(load_log(log_path));
    const std::string text = analysis_to_json(report).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open output file " + out_path);
        out << text;
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const RunConfig cfg = load_run_config(config_path);
    const auto problems = validate_config(cfg);
    if (!problems.empty()) {
        for (const std::string& p : problems) std::cerr << "invalid: " << p << "\n";
        return 1;
    }
    auto [model, dirichlet] = build_paper_model(cfg.dims);
    const auto violations = validate_model(model);
    if (!violations.empty()) {
        for (const std::string& v : violations) std::cerr << "model violation: " << v << "\n";
        return 1;
    }
    std::cout << "config ok: " << cfg.dims.prompts << " prompts, " << cfg.dims.searches
              << " searches, " << cfg.dims.info_levels << " info levels, "
              << (cfg.env_kind == EnvKind::synthetic ? "synthetic" : "remote")
              << " environment\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete active-inference engine and experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::map<std::string, std::string> overrides;
    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("--config", config_path, "Config JSON path")->required();
    for (const char* key : {"steps", "seed", "log", "snapshot", "profile", "env", "endpoint",
                            "model", "texts"})
        run->add_option_function<std::string>(
            std::string("--") + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
            std::string("Override config field '") + key + "'");

    ExportSpec spec;
    std::string kind = "action_timeline";
    std::string format = "csv";
    auto* exp = app.add_subcommand("export", "Export figure-ready data from a run log");
    exp->add_option("--log", spec.log_path, "Run log (JSONL)")->required();
    exp->add_option("--kind", kind, "a_matrices | efe_grid | action_heatmap | action_timeline")
        ->required();
    exp->add_option("--step", spec.step, "Step selection (default: last)");
    exp->add_option("--out", spec.out_path, "Output path (a_matrices: filename prefix)")
        ->required();
    exp->add_option("--format", format, "csv | json");

    std::string analyze_log_path;
    std::string analyze_out;
    auto* ana = app.add_subcommand("analyze", "Summarize a run log");
    ana->add_option("--log", analyze_log_path, "Run log (JSONL)")->required();
    ana->add_option("--out", analyze_out, "Write the report here instead of stdout");

    std::string validate_path;
    auto* val = app.add_subcommand("validate-config", "Check a config file and its model");
    val->add_option("--config", validate_path, "Config JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, overrides);
        if (exp->parsed()) {
            static const std::map<std::string, ExportKind> kinds = {
                {"a_matrices", ExportKind::a_matrices},
                {"efe_grid", ExportKind::efe_grid},
                {"action_heatmap", ExportKind::action_heatmap},
                {"action_timeline", ExportKind::action_timeline}};
            const auto it = kinds.find(kind);
            if (it == kinds.end()) throw std::invalid_argument("unknown export kind: " + kind);
            spec.kind = it->second;
            if (format == "json")
                spec.format = ExportFormat::json;
            else if (format != "csv")
                throw std::invalid_argument("unknown format: " + format);
            return cmd_export(spec);
        }
        if (ana->parsed()) return cmd_analyze(analyze_log_path, analyze_out);
        if (val->parsed()) return cmd_validate(validate_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
