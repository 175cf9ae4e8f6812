#pragma once

#include <optional>
#include <string>

#include "skeptic/backend.hpp"
#include "skeptic/core.hpp"
#include "skeptic/prompts.hpp"

namespace skeptic::reasoner {

struct VerifyTask {
    ClaimInstance instance;
    std::optional<QuestionSet> questions;  // absent iff mode == OnlyReasoner
    PromptVariant variant = PromptVariant::Sg1;
    RunMode mode = RunMode::OnlyReasoner;

    void validate() const;
};

/// Removes well-formed <think>...</think> regions. If any tag is left
/// unpaired the text comes back unchanged.
std::string strip_think_blocks(const std::string& raw);

/// Never throws; unparseable text yields parse_status == Failed.
///
/// SG1/SG2: the substring from the first '{' to the last '}' is decoded as
/// JSON and "decision" read case-normalized; status is Ok only when the
/// response is exactly that object, Recovered when it was embedded in
/// prose or recovered by token scan. MiniCheck: exact label match is Ok,
/// otherwise a token scan preferring the last standalone occurrence, with
/// NOT_SUPPORTED taking precedence over the SUPPORTED substring inside it.
Verdict parse_verdict(const std::string& raw, PromptVariant variant);

struct ReasonerConfig {
    std::string model;
    Json decoding = Json::object();
};

backend::ChatRequest build_verify_request(const VerifyTask& task, const ReasonerConfig& config,
                                          const prompts::Registry& registry);

Verdict verify(const VerifyTask& task, backend::Backend& backend, const ReasonerConfig& config,
               const prompts::Registry& registry);

}  // namespace skeptic::reasoner
