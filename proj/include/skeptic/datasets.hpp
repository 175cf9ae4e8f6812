#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skeptic/core.hpp"

namespace skeptic::datasets {

enum class LabelScheme {
    Binary,
    Wice3,
};

std::string to_string(LabelScheme scheme);
LabelScheme parse_label_scheme(std::string_view text);

struct ExpectedCounts {
    std::int64_t n = 0;
    std::int64_t supported = 0;
    std::int64_t refuted = 0;
};

struct DatasetManifest {
    std::string name;
    std::filesystem::path path;
    std::string format = "jsonl";
    LabelScheme label_scheme = LabelScheme::Binary;
    std::optional<ExpectedCounts> expected_counts;

    Json to_json() const;
    static DatasetManifest from_json(const Json& j);
};

/// SUPPORTED stays SUPPORTED; PARTIALLY_SUPPORTED and REFUTED both
/// collapse to Refuted.
Label binarize(RawLabel3 label);

/// One JSON object per line: {id, claim, evidence: [text], label,
/// subclaims?}. Binary scheme takes labels SUPPORTED / NOT_SUPPORTED;
/// wice3 additionally takes PARTIALLY_SUPPORTED and binarizes. Blank
/// lines are skipped; anything else malformed raises SchemaError naming
/// the 1-based line number.
std::vector<ClaimInstance> load_jsonl(const std::filesystem::path& path, LabelScheme scheme);

/// load_jsonl plus a loud check against expected_counts when present.
std::vector<ClaimInstance> load(const DatasetManifest& manifest);

void save_jsonl(const std::vector<ClaimInstance>& instances, const std::filesystem::path& path);

/// Exactly n_per_class instances per class, drawn by seeded uniform
/// sampling without replacement, output sorted by id. Deterministic for a
/// given seed on every platform.
std::vector<ClaimInstance> balanced_subsample(const std::vector<ClaimInstance>& instances,
                                              std::size_t n_per_class, std::uint64_t seed);

struct DatasetStats {
    std::int64_t n = 0;
    std::int64_t supported = 0;
    std::int64_t refuted = 0;
    double mean_claim_words = 0.0;
    double mean_evidence_words = 0.0;  // summed across documents per instance
};

/// Word counts use whitespace tokenization; informational only.
DatasetStats stats(const std::vector<ClaimInstance>& instances);

}  // namespace skeptic::datasets
