#include "inferact/reporting.hpp"

#include "inferact/prob.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace inferact {

namespace {

using nlohmann::ordered_json;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

const StepRecord& record_at(const RunLog& log, int step) {
    for (const StepRecord& r : log.records)
        if (r.step == step) return r;
    throw std::out_of_range("step " + std::to_string(step) + " not in log");
}

/// Column-normalized snapshot pA at the requested step (or the last snapshot).
std::pair<int, std::vector<Matrix>> snapshot_at(const RunLog& log, int step) {
    const StepRecord* found = nullptr;
    for (const StepRecord& r : log.records) {
        if (!r.snapshot) continue;
        if (step < 0 || r.step == step) found = &r;
        if (step >= 0 && r.step == step) break;
    }
    if (!found || (step >= 0 && found->step != step)) {
        std::string steps;
        for (const StepRecord& r : log.records)
            if (r.snapshot) steps += (steps.empty() ? "" : ", ") + std::to_string(r.step);
        throw std::out_of_range("no snapshot at step " + std::to_string(step) +
                                " (snapshots at: " + steps + ")");
    }
    std::vector<Matrix> normalized;
    for (const Matrix& pa : found->snapshot->pA) {
        Matrix n(pa.rows(), pa.cols());
        for (Eigen::Index c = 0; c < pa.cols(); ++c) n.col(c) = pa.col(c) / pa.col(c).sum();
        normalized.push_back(std::move(n));
    }
    return {found->step, std::move(normalized)};
}

std::string efe_grid_csv(const RunLog& log, const StepRecord& rec) {
    std::ostringstream os;
    os.precision(17);
    os << "prompt_action\\search_action";
    for (int s = 0; s <= log.num_searches; ++s) os << ',' << s;
    os << '\n';
    for (int p = 0; p <= log.num_prompts; ++p) {
        os << p;
        for (int s = 0; s <= log.num_searches; ++s) {
            os << ',';
            if (p > 0 && s > 0) continue;  // no legal [p,s,0] action
            const int a = p > 0 ? p : (s > 0 ? log.num_prompts + s : 0);
            os << rec.action_efe[a];
        }
        os << '\n';
    }
    return os.str();
}

Matrix heatmap_counts(const RunLog& log) {
    Matrix counts = Matrix::Zero(log.num_prompts + 1, log.num_searches + 1);
    for (const StepRecord& r : log.records) {
        if (r.action[0] == 0 && r.action[1] == 0) continue;  // no-actions excluded
        counts(r.action[0], r.action[1]) += 1.0;
    }
    return counts;
}

std::string action_type(const StepRecord& r) {
    if (r.action[0] > 0) return "prompt";
    if (r.action[1] > 0) return "search";
    return "none";
}

int action_id(const StepRecord& r) { return r.action[0] > 0 ? r.action[0] : r.action[1]; }

}  // namespace

RunLog load_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read log file " + path);
    RunLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        log.records.push_back(step_record_from_json(nlohmann::json::parse(line)));
    }
    if (log.records.empty()) throw std::runtime_error("log file " + path + " is empty");
    // Alphabet = 1 + P + S actions; beliefs factor 0 has P states.
    log.num_prompts = static_cast<int>(log.records[0].beliefs.factors.at(0).size());
    log.num_searches =
        static_cast<int>(log.records[0].action_efe.size()) - 1 - log.num_prompts;
    if (log.num_searches < 1) throw std::runtime_error("log file " + path + " is malformed");
    return log;
}

void export_log(const RunLog& log, const ExportSpec& spec) {
    switch (spec.kind) {
        case ExportKind::a_matrices: {
            const auto [step, matrices] = snapshot_at(log, spec.step);
            if (spec.format == ExportFormat::csv) {
                for (std::size_t m = 0; m < matrices.size(); ++m)
                    write_file(spec.out_path + "A" + std::to_string(m) + ".csv",
                               matrix_to_csv(matrices[m]));
            } else {
                ordered_json j;
                j["step"] = step;
                j["A"] = ordered_json::array();
                for (const Matrix& m : matrices) {
                    ordered_json t;
                    t["shape"] = {m.rows(), m.cols()};
                    std::vector<double> data;
                    for (Eigen::Index r = 0; r < m.rows(); ++r)
                        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
                    t["data"] = std::move(data);
                    j["A"].push_back(std::move(t));
                }
                write_file(spec.out_path, j.dump(2) + "\n");
            }
            return;
        }
        case ExportKind::efe_grid: {
            const StepRecord& rec =
                spec.step < 0 ? log.records.back() : record_at(log, spec.step);
            if (spec.format == ExportFormat::csv) {
                write_file(spec.out_path, efe_grid_csv(log, rec));
            } else {
                ordered_json j;
                j["step"] = rec.step;
                j["action_efe"] = std::vector<double>(
                    rec.action_efe.data(), rec.action_efe.data() + rec.action_efe.size());
                write_file(spec.out_path, j.dump(2) + "\n");
            }
            return;
        }
        case ExportKind::action_heatmap: {
            const Matrix counts = heatmap_counts(log);
            if (spec.format == ExportFormat::csv) {
                write_file(spec.out_path, matrix_to_csv(counts));
            } else {
                ordered_json j;
                j["shape"] = {counts.rows(), counts.cols()};
                std::vector<double> data;
                for (Eigen::Index r = 0; r < counts.rows(); ++r)
                    for (Eigen::Index c = 0; c < counts.cols(); ++c) data.push_back(counts(r, c));
                j["counts"] = std::move(data);
                write_file(spec.out_path, j.dump(2) + "\n");
            }
            return;
        }
        case ExportKind::action_timeline: {
            if (spec.format == ExportFormat::csv) {
                std::ostringstream os;
                os << "step,type,id\n";
                for (const StepRecord& r : log.records)
                    os << r.step << ',' << action_type(r) << ',' << action_id(r) << '\n';
                write_file(spec.out_path, os.str());
            } else {
                ordered_json j = ordered_json::array();
                for (const StepRecord& r : log.records)
                    j.push_back({{"step", r.step}, {"type", action_type(r)}, {"id", action_id(r)}});
                write_file(spec.out_path, j.dump(2) + "\n");
            }
            return;
        }
    }
    throw std::invalid_argument("export_log: unknown export kind");
}

AnalysisReport analyze_log(const RunLog& log) {
    if (log.records.empty()) throw std::invalid_argument("analyze_log: empty log");
    AnalysisReport report;
    const int n = log.size();

    for (int quartile = 0; quartile < 4; ++quartile) {
        const int lo = quartile * n / 4;
        const int hi = quartile == 3 ? n : (quartile + 1) * n / 4;
        int searches = 0;
        double quality = 0.0;
        int quality_terms = 0;
        for (int i = lo; i < hi; ++i) {
            const StepRecord& r = log.records[static_cast<std::size_t>(i)];
            if (r.action[1] > 0) ++searches;
            for (int m = 0; m < 6; ++m) {
                quality += r.observation[m];
                ++quality_terms;
            }
        }
        const int span = hi - lo;
        report.search_fraction_per_quartile.push_back(span > 0 ? static_cast<double>(searches) / span
                                                               : 0.0);
        report.mean_quality_per_quartile.push_back(quality_terms > 0 ? quality / quality_terms
                                                                     : 0.0);
    }

    for (const StepRecord& r : log.records) {
        if (!r.snapshot) continue;
        std::vector<double> entropies;
        for (const Matrix& pa : r.snapshot->pA) {
            double h = 0.0;
            for (Eigen::Index c = 0; c < pa.cols(); ++c)
                h += entropy((pa.col(c) / pa.col(c).sum()).eval());
            entropies.push_back(h / static_cast<double>(pa.cols()));
        }
        report.entropy_trajectory.emplace_back(r.step, std::move(entropies));
    }

    constexpr int kWindow = 10;
    for (int t = kWindow - 1; t < n; ++t) {
        int prompts = 0;
        int searches = 0;
        for (int i = t - kWindow + 1; i <= t; ++i) {
            const StepRecord& r = log.records[static_cast<std::size_t>(i)];
            if (r.action[0] > 0) ++prompts;
            if (r.action[1] > 0) ++searches;
        }
        if (prompts > searches) {
            report.transition_step = log.records[static_cast<std::size_t>(t)].step;
            break;
        }
    }
    return report;
}

nlohmann::ordered_json analysis_to_json(const AnalysisReport& report) {
    ordered_json j;
    j["search_fraction_per_quartile"] = report.search_fraction_per_quartile;
    j["mean_quality_per_quartile"] = report.mean_quality_per_quartile;
    j["entropy_trajectory"] = ordered_json::array();
    for (const auto& [step, entropies] : report.entropy_trajectory)
        j["entropy_trajectory"].push_back({{"step", step}, {"mean_column_entropy", entropies}});
    if (report.transition_step < 0)
        j["transition_step"] = "none";
    else
        j["transition_step"] = report.transition_step;
    return j;
}

}  // namespace inferact
