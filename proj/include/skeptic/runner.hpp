#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skeptic/backend.hpp"
#include "skeptic/core.hpp"
#include "skeptic/metrics.hpp"
#include "skeptic/prompts.hpp"

namespace skeptic::runner {

/// One verified instance. wall_time_ms is kept in memory for progress
/// reporting but never persisted: records.jsonl must stay byte-identical
/// across reruns of the same configuration.
struct RunRecord {
    std::string instance_id;
    int run_index = 0;
    RunMode mode = RunMode::OnlyReasoner;
    PromptVariant variant = PromptVariant::Sg1;
    Label gold = Label::Supported;    // persisted so runs verify without the dataset
    std::string question_set_digest;  // empty when the run carries no questions
    Verdict verdict;
    std::string raw_digest;
    std::string fingerprint;
    std::optional<std::string> error;  // backend failure captured for this instance
    std::int64_t wall_time_ms = 0;

    Json to_json() const;  // deterministic persisted form (raw replaced by raw_digest)
    static RunRecord from_json(const Json& j);
};

struct RunResult {
    std::filesystem::path run_dir;
    metrics::MetricsReport report;
    std::vector<RunRecord> records;  // instance order
    std::int64_t resumed = 0;        // records already present before this call
};

struct EngineOptions {
    std::optional<std::filesystem::path> cache_dir;  // absent: no response cache
};

/// Experiment orchestrator. A run directory is keyed by the manifest's
/// experiment digest and holds manifest.json, records.jsonl and
/// metrics.json; question sets are shared across prompt variants under
/// <out_root>/questionsets/. Re-running resumes: instances whose
/// fingerprint already has a record are skipped.
class Engine {
public:
    Engine(const prompts::Registry& registry, std::shared_ptr<backend::Backend> transport,
           EngineOptions options = {});

    RunResult run(const RunManifest& manifest, const std::vector<ClaimInstance>& instances,
                  const std::filesystem::path& out_root);

    static std::filesystem::path run_dir_for(const RunManifest& manifest,
                                             const std::filesystem::path& out_root);
    static std::filesystem::path questionset_dir_for(const RunManifest& manifest,
                                                     const std::filesystem::path& out_root);

    backend::CachingBackend& backend() { return *caching_; }

private:
    QuestionSet question_set_for(const ClaimInstance& instance, const RunManifest& manifest,
                                 const std::filesystem::path& qs_dir);

    const prompts::Registry& registry_;
    std::shared_ptr<backend::Backend> transport_;
    std::shared_ptr<backend::CachingBackend> caching_;
};

/// Contents of one run directory.
struct RunDirData {
    std::filesystem::path dir;
    RunManifest manifest;
    metrics::MetricsReport report;
};

RunDirData load_run_dir(const std::filesystem::path& dir);
std::vector<RunDirData> discover_run_dirs(const std::filesystem::path& out_root);
std::vector<RunRecord> load_records(const std::filesystem::path& records_path);

/// One aggregated table cell: a (dataset, variant, mode, models) group
/// averaged over run_index.
struct GridRow {
    std::string dataset_path;
    PromptVariant variant = PromptVariant::Sg1;
    RunMode mode = RunMode::OnlyReasoner;
    std::string reasoner_model;
    std::string decomposer_model;
    metrics::AggregateReport agg;
};

/// Groups runs and aggregates across run_index. Runs must agree on every
/// field outside the grid axes (decoding, seed); otherwise InconsistentGrid.
std::vector<GridRow> grid_rows(const std::vector<RunDirData>& runs);

std::string render_detail_csv(const std::vector<GridRow>& rows);
std::string render_detail_markdown(const std::vector<GridRow>& rows);
/// Three-column mode comparison per (dataset, variant, models) group.
std::string render_comparison_markdown(const std::vector<GridRow>& rows);

/// Writes report.csv and report.md under out_root.
void write_reports(const std::filesystem::path& out_root, const std::vector<GridRow>& rows);

/// Recomputes every cell from raw records and golds; returns the list of
/// mismatches (empty means everything checks out).
std::vector<std::string> verify_reports(const std::filesystem::path& out_root);

struct CoverageRun {
    std::filesystem::path questionset_dir;
    double coverage = 0.0;
    std::int64_t yes = 0;
    std::int64_t subclaims = 0;
    std::int64_t flagged = 0;
};

struct CoverageEvalResult {
    std::vector<CoverageRun> runs;  // one entry per question-generation run
    double mean = 0.0;
    double std = 0.0;
};

/// Judges stored question sets against gold subclaims. Every instance must
/// carry subclaims and have a question-set file in each directory.
CoverageEvalResult coverage_eval(const std::vector<ClaimInstance>& instances,
                                 const std::vector<std::filesystem::path>& questionset_dirs,
                                 backend::Backend& backend, const metrics::JudgeConfig& judge,
                                 const prompts::Registry& registry);

std::string render_coverage_markdown(const std::string& decomposer_model,
                                     const CoverageEvalResult& result);

}  // namespace skeptic::runner
