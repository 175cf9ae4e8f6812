#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "skeptic/error.hpp"

namespace skeptic {

using Json = nlohmann::json;

/// Binary verdict. The model-facing wire strings are "SUPPORTED" and
/// "NOT_SUPPORTED"; Refuted serializes as the latter everywhere.
enum class Label {
    Supported,
    Refuted,
};

/// Three-way ingestion label (WICE). Collapsed to Label by
/// datasets::binarize before anything downstream sees it.
enum class RawLabel3 {
    Supported,
    PartiallySupported,
    Refuted,
};

enum class RunMode {
    OnlyReasoner,
    Decomp,
    DecompDepresup,
};

enum class PromptVariant {
    Sg1,
    Sg2,
    MiniCheck,
};

enum class ParseStatus {
    Ok,
    Recovered,
    Failed,
};

std::string to_string(Label label);
std::string to_string(RawLabel3 label);
std::string to_string(RunMode mode);
std::string to_string(PromptVariant variant);
std::string to_string(ParseStatus status);

std::optional<Label> try_parse_label(std::string_view text);
Label parse_label(std::string_view text);
RawLabel3 parse_raw_label3(std::string_view text);
RunMode parse_run_mode(std::string_view text);
PromptVariant parse_prompt_variant(std::string_view text);
ParseStatus parse_parse_status(std::string_view text);

std::string trim(std::string_view text);

/// One claim plus its gold evidence and label. Immutable after load.
struct ClaimInstance {
    std::string id;
    std::string claim;
    std::vector<std::string> evidence;  // source order preserved
    Label gold = Label::Supported;
    std::optional<std::vector<std::string>> subclaims;  // gold decomposition (WICE)

    void validate() const;
    Json to_json() const;
    static ClaimInstance from_json(const Json& j);
};

/// Decomposed questions and their presupposition-free expansion.
/// provenance[i] is the index into `decomposed` that presup_free[i]
/// was rewritten from.
struct QuestionSet {
    std::vector<std::string> decomposed;
    std::vector<std::string> presup_free;
    std::vector<std::size_t> provenance;

    /// True when generation produced no usable questions; the runner
    /// falls back to the question-free reasoner prompt.
    bool degraded() const { return presup_free.empty(); }

    void validate() const;
    Json to_json() const;
    static QuestionSet from_json(const Json& j);
    std::string digest() const;
};

/// Parsed reasoner output. parse_status == Failed iff label is absent;
/// `raw` is the backend response byte-for-byte.
struct Verdict {
    std::optional<Label> label;
    std::string reasoning;
    std::string raw;
    ParseStatus parse_status = ParseStatus::Failed;

    void validate() const;
    Json to_json() const;
    static Verdict from_json(const Json& j);
};

/// Full experiment configuration for one run.
struct RunManifest {
    std::string dataset_path;
    RunMode mode = RunMode::OnlyReasoner;
    PromptVariant prompt_variant = PromptVariant::Sg1;
    std::string reasoner_model;
    std::string decomposer_model;  // unused when mode == OnlyReasoner
    Json decoding = Json::object();  // temperature / reasoning_effort / max_tokens / extras
    int run_index = 0;
    std::int64_t seed = 0;
    int concurrency_limit = 1;

    void validate() const;
    Json to_json() const;
    static RunManifest from_json(const Json& j);

    /// Canonical JSON text; reload(canonical()) round-trips exactly.
    std::string canonical() const;

    /// Digest identifying the experiment a run directory belongs to.
    /// concurrency_limit is an execution detail and does not participate.
    std::string experiment_digest() const;

    bool operator==(const RunManifest& other) const;
};

/// Cache/resume key: digest over the instance content and every manifest
/// field that can change the response (mode, variant, models, decoding,
/// run_index).
std::string instance_fingerprint(const ClaimInstance& instance, const RunManifest& manifest);

}  // namespace skeptic
