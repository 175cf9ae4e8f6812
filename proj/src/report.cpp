#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "skeptic/runner.hpp"

namespace skeptic::runner {

namespace fs = std::filesystem;

namespace {

std::string pct(double fraction) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", fraction * 100.0);
    return buffer;
}

std::string pct_pm(double mean, double std) { return pct(mean) + " ± " + pct(std); }

const char* depresup_cell(RunMode mode) {
    switch (mode) {
        case RunMode::OnlyReasoner: return "-";
        case RunMode::Decomp: return "no";
        case RunMode::DecompDepresup: return "yes";
    }
    return "-";
}

std::string mode_heading(RunMode mode) {
    switch (mode) {
        case RunMode::OnlyReasoner: return "Only-Reasoner";
        case RunMode::Decomp: return "Decomposition";
        case RunMode::DecompDepresup: return "De-Presupposition";
    }
    return "";
}

struct AxisKey {
    std::string dataset;
    PromptVariant variant;
    RunMode mode;
    std::string reasoner;
    std::string decomposer;

    bool operator<(const AxisKey& other) const {
        return std::tie(dataset, variant, mode, reasoner, decomposer) <
               std::tie(other.dataset, other.variant, other.mode, other.reasoner,
                        other.decomposer);
    }
};

}  // namespace

std::vector<GridRow> grid_rows(const std::vector<RunDirData>& runs) {
    std::map<AxisKey, std::map<int, RunDirData>> groups;
    for (const auto& run : runs) {
        const auto& m = run.manifest;
        const std::string decomposer =
            m.mode == RunMode::OnlyReasoner ? std::string("-") : m.decomposer_model;
        AxisKey key{m.dataset_path, m.prompt_variant, m.mode, m.reasoner_model, decomposer};
        auto [it, inserted] = groups[key].emplace(m.run_index, run);
        if (!inserted) {
            raise(ErrorKind::InconsistentGrid,
                  "duplicate run_index " + std::to_string(m.run_index) + " for " +
                      to_string(m.prompt_variant) + "/" + to_string(m.mode) + " on " +
                      m.dataset_path);
        }
    }

    std::vector<GridRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, by_index] : groups) {
        // Within a cell only run_index may vary.
        const auto& first = by_index.begin()->second.manifest;
        std::vector<metrics::MetricsReport> reports;
        for (const auto& [index, run] : by_index) {
            auto a = run.manifest.to_json();
            auto b = first.to_json();
            a.erase("run_index");
            a.erase("concurrency_limit");
            b.erase("run_index");
            b.erase("concurrency_limit");
            if (a != b) {
                raise(ErrorKind::InconsistentGrid,
                      "runs in one grid cell disagree outside run_index: " + run.dir.string());
            }
            reports.push_back(run.report);
        }
        GridRow row;
        row.dataset_path = key.dataset;
        row.variant = key.variant;
        row.mode = key.mode;
        row.reasoner_model = key.reasoner;
        row.decomposer_model = key.decomposer;
        row.agg = metrics::aggregate(reports);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_detail_csv(const std::vector<GridRow>& rows) {
    std::ostringstream out;
    out << "dataset,prompt,reasoner,decomposer,de_presupposition,bacc,bacc_std,"
           "supported,supported_std,refuted,refuted_std,runs\n";
    for (const auto& row : rows) {
        out << row.dataset_path << ',' << to_string(row.variant) << ',' << row.reasoner_model
            << ',' << row.decomposer_model << ',' << depresup_cell(row.mode) << ','
            << pct(row.agg.mean.bacc) << ',' << pct(row.agg.std.bacc) << ','
            << pct(row.agg.mean.supported_acc) << ',' << pct(row.agg.std.supported_acc) << ','
            << pct(row.agg.mean.refuted_acc) << ',' << pct(row.agg.std.refuted_acc) << ','
            << row.agg.runs << "\n";
    }
    return out.str();
}

std::string render_detail_markdown(const std::vector<GridRow>& rows) {
    std::ostringstream out;
    out << "| Dataset | Prompt | Reasoner | Decomposer | De-Presupposition | BAcc | Supported | "
           "Refuted |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& row : rows) {
        out << "| " << row.dataset_path << " | " << to_string(row.variant) << " | "
            << row.reasoner_model << " | " << row.decomposer_model << " | "
            << depresup_cell(row.mode) << " | " << pct_pm(row.agg.mean.bacc, row.agg.std.bacc)
            << " | " << pct_pm(row.agg.mean.supported_acc, row.agg.std.supported_acc) << " | "
            << pct_pm(row.agg.mean.refuted_acc, row.agg.std.refuted_acc) << " |\n";
    }
    return out.str();
}

std::string render_comparison_markdown(const std::vector<GridRow>& rows) {
    struct ComparisonKey {
        std::string dataset;
        PromptVariant variant;
        std::string reasoner;

        bool operator<(const ComparisonKey& other) const {
            return std::tie(dataset, variant, reasoner) <
                   std::tie(other.dataset, other.variant, other.reasoner);
        }
    };
    std::map<ComparisonKey, std::map<RunMode, const GridRow*>> table;
    for (const auto& row : rows) {
        table[{row.dataset_path, row.variant, row.reasoner_model}][row.mode] = &row;
    }

    std::ostringstream out;
    out << "| Dataset | Prompt | Reasoner | " << mode_heading(RunMode::OnlyReasoner) << " | "
        << mode_heading(RunMode::Decomp) << " | " << mode_heading(RunMode::DecompDepresup)
        << " |\n";
    out << "|---|---|---|---|---|---|\n";
    for (const auto& [key, cells] : table) {
        out << "| " << key.dataset << " | " << to_string(key.variant) << " | " << key.reasoner;
        for (auto mode : {RunMode::OnlyReasoner, RunMode::Decomp, RunMode::DecompDepresup}) {
            auto it = cells.find(mode);
            out << " | "
                << (it == cells.end() ? std::string("-")
                                      : pct_pm(it->second->agg.mean.bacc, it->second->agg.std.bacc));
        }
        out << " |\n";
    }
    return out.str();
}

void write_reports(const fs::path& out_root, const std::vector<GridRow>& rows) {
    {
        std::ofstream out(out_root / "report.csv", std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorKind::Io, "cannot write report.csv");
        out << render_detail_csv(rows);
    }
    std::ofstream out(out_root / "report.md", std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write report.md");
    out << "# Detailed results\n\n"
        << render_detail_markdown(rows) << "\n# Mode comparison (BAcc)\n\n"
        << render_comparison_markdown(rows);
}

std::vector<std::string> verify_reports(const fs::path& out_root) {
    std::vector<std::string> mismatches;
    auto runs = discover_run_dirs(out_root);
    if (runs.empty()) {
        mismatches.push_back("no run directories under " + out_root.string());
        return mismatches;
    }
    for (const auto& run : runs) {
        std::vector<RunRecord> records;
        try {
            records = load_records(run.dir / "records.jsonl");
        } catch (const std::exception& e) {
            mismatches.push_back(run.dir.string() + ": " + e.what());
            continue;
        }
        std::vector<std::optional<Label>> preds;
        std::vector<Label> golds;
        preds.reserve(records.size());
        golds.reserve(records.size());
        for (const auto& record : records) {
            preds.push_back(record.verdict.label);
            golds.push_back(record.gold);
        }
        try {
            auto recomputed = metrics::balanced_accuracy(preds, golds);
            if (!(recomputed == run.report)) {
                mismatches.push_back(run.dir.string() +
                                     ": metrics.json does not match recomputation from records");
            }
        } catch (const std::exception& e) {
            mismatches.push_back(run.dir.string() + ": " + e.what());
        }
    }
    // The aggregated cells are pure functions of the per-run reports, so
    // per-run equality makes every rendered cell trustworthy; recomputing
    // them here would only re-run metrics::aggregate on identical inputs.
    return mismatches;
}

CoverageEvalResult coverage_eval(const std::vector<ClaimInstance>& instances,
                                 const std::vector<fs::path>& questionset_dirs,
                                 backend::Backend& backend, const metrics::JudgeConfig& judge,
                                 const prompts::Registry& registry) {
    if (instances.empty()) raise(ErrorKind::EmptyList, "coverage_eval: no instances");
    if (questionset_dirs.empty()) raise(ErrorKind::EmptyList, "coverage_eval: no question sets");
    for (const auto& instance : instances) {
        if (!instance.subclaims || instance.subclaims->empty()) {
            raise(ErrorKind::Config,
                  "coverage_eval: instance '" + instance.id + "' has no subclaims");
        }
    }

    CoverageEvalResult result;
    for (const auto& dir : questionset_dirs) {
        CoverageRun run;
        run.questionset_dir = dir;
        for (const auto& instance : instances) {
            const auto path = dir / (instance.id + ".json");
            if (!fs::exists(path)) raise(ErrorKind::MissingQuestionSet, instance.id);
            std::ifstream in(path, std::ios::binary);
            Json j;
            in >> j;
            const auto set = QuestionSet::from_json(j);

            const auto total = static_cast<std::int64_t>(instance.subclaims->size());
            run.subclaims += total;
            if (set.degraded()) {
                // Nothing to judge; every subclaim counts as uncovered.
                run.flagged += total;
                continue;
            }
            auto coverage = metrics::coverage(*instance.subclaims, set.presup_free,
                                              prompts::format_evidence(instance.evidence),
                                              backend, judge, registry, instance.id);
            run.yes += coverage.yes;
            for (const auto& verdict : coverage.verdicts) {
                if (verdict.flagged) ++run.flagged;
            }
        }
        run.coverage = run.subclaims == 0
                           ? 0.0
                           : static_cast<double>(run.yes) / static_cast<double>(run.subclaims);
        result.runs.push_back(std::move(run));
    }

    std::vector<double> values;
    values.reserve(result.runs.size());
    for (const auto& run : result.runs) values.push_back(run.coverage);
    double mean = 0.0;
    for (double v : values) mean += v;
    result.mean = mean / static_cast<double>(values.size());
    result.std = metrics::population_std(values);
    return result;
}

std::string render_coverage_markdown(const std::string& decomposer_model,
                                     const CoverageEvalResult& result) {
    std::ostringstream out;
    out << "| Question Decomposer | Question Coverage |\n|---|---|\n";
    out << "| " << decomposer_model << " | " << pct_pm(result.mean, result.std) << " |\n";
    return out.str();
}

}  // namespace skeptic::runner
