#pragma once

#include "inferact/runtime.hpp"

#include <string>
#include <vector>

namespace inferact {

enum class ExportKind { a_matrices, efe_grid, action_heatmap, action_timeline };
enum class ExportFormat { csv, json };

struct ExportSpec {
    std::string log_path;
    ExportKind kind = ExportKind::action_timeline;
    int step = -1;  // -1: last step (a_matrices: last snapshot)
    std::string out_path;
    ExportFormat format = ExportFormat::csv;
};

struct RunLog {
    std::vector<StepRecord> records;
    int num_prompts = 0;   // recovered from the action alphabet length
    int num_searches = 0;

    int size() const { return static_cast<int>(records.size()); }
};

RunLog load_log(const std::string& path);

/// Writes figure-ready data files. a_matrices produces one file per modality
/// named <out>A<m>.csv (or a single JSON document); the other kinds produce a
/// single file at <out>.
void export_log(const RunLog& log, const ExportSpec& spec);

struct AnalysisReport {
    std::vector<double> search_fraction_per_quartile;   // 4 entries
    std::vector<double> mean_quality_per_quartile;      // mean obs level, modalities 0-5
    // (step, per-modality mean column entropy of the normalized snapshot pA)
    std::vector<std::pair<int, std::vector<double>>> entropy_trajectory;
    int transition_step = -1;  // first step whose trailing 10 actions are prompt-major; -1 = none
};

AnalysisReport analyze_log(const RunLog& log);
nlohmann::ordered_json analysis_to_json(const AnalysisReport& report);

}  // namespace inferact
