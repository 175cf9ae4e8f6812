#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "skeptic/backend.hpp"
#include "skeptic/core.hpp"
#include "skeptic/prompts.hpp"

namespace skeptic::metrics {

/// SUPPORTED is the positive class.
struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;

    Json to_json() const;
    static ConfusionCounts from_json(const Json& j);
    bool operator==(const ConfusionCounts&) const = default;
};

struct MetricsReport {
    double bacc = 0.0;
    double supported_acc = 0.0;
    double refuted_acc = 0.0;
    std::int64_t n = 0;
    std::int64_t failed_parses = 0;
    ConfusionCounts confusion;

    Json to_json() const;
    static MetricsReport from_json(const Json& j);
    bool operator==(const MetricsReport&) const = default;
};

/// The combining step of balanced accuracy: the mean of the two
/// per-class accuracies.
double combine_class_accuracies(double supported_acc, double refuted_acc);

/// A missing prediction counts as incorrect for its gold class and is
/// tallied in failed_parses. Requires at least one gold of each class.
MetricsReport balanced_accuracy(const std::vector<std::optional<Label>>& preds,
                                const std::vector<Label>& golds);

/// Per-field mean and standard deviation, MetricsReport-shaped.
struct MetricsStats {
    double bacc = 0.0;
    double supported_acc = 0.0;
    double refuted_acc = 0.0;
    double n = 0.0;
    double failed_parses = 0.0;
};

struct AggregateReport {
    MetricsStats mean;
    MetricsStats std;  // population std (divide by N)
    int runs = 0;

    Json to_json() const;
};

double population_std(const std::vector<double>& values);

AggregateReport aggregate(const std::vector<MetricsReport>& reports);

enum class CoverageAnswer {
    Yes,
    No,
};

/// Reads the token following the last "ANSWER:" marker (case-insensitive).
std::optional<CoverageAnswer> parse_coverage_answer(const std::string& raw);

struct SubclaimVerdict {
    std::string subclaim;
    bool covered = false;
    bool flagged = false;  // judge failed or answer unparseable; counted as No
    std::string raw;
};

struct CoverageResult {
    double coverage = 0.0;  // yes-count / subclaim-count
    std::int64_t yes = 0;
    std::vector<SubclaimVerdict> verdicts;
};

struct JudgeConfig {
    std::string model;
    Json decoding = Json::object();
    int concurrency = 1;
};

/// One judge call per subclaim, with the evidence given as context.
CoverageResult coverage(const std::vector<std::string>& subclaims,
                        const std::vector<std::string>& questions, const std::string& evidence,
                        backend::Backend& backend, const JudgeConfig& judge,
                        const prompts::Registry& registry, const std::string& instance_id = {});

}  // namespace skeptic::metrics
