#pragma once

#include <string>
#include <vector>

#include "skeptic/backend.hpp"
#include "skeptic/core.hpp"
#include "skeptic/prompts.hpp"

namespace skeptic::decomposition {

/// Questions parsed out of a model response plus the non-conforming
/// lines, kept for audit.
struct ParsedQuestionList {
    std::vector<std::string> questions;
    std::vector<std::string> dropped_lines;
};

/// Accepts "- question" bullets and tolerates "1." / "1:" numbering.
/// Think blocks are stripped first; blank lines are ignored; anything
/// else lands in dropped_lines.
ParsedQuestionList parse_question_list(const std::string& raw);

struct DecomposerConfig {
    std::string model;
    Json decoding = Json::object();
};

ParsedQuestionList decompose_claim(const std::string& claim, backend::Backend& backend,
                                   const DecomposerConfig& config, const prompts::Registry& registry,
                                   const std::string& instance_id = {});

ParsedQuestionList depresuppose_question(const std::string& question, backend::Backend& backend,
                                         const DecomposerConfig& config,
                                         const prompts::Registry& registry,
                                         const std::string& instance_id = {});

/// Full question-generation stage for one claim.
///
/// Decomp: presup_free mirrors the decomposed questions. DecompDepresup:
/// each decomposed question is rewritten in isolation and the rewrites are
/// concatenated in decomposition order. Either way exact-string duplicates
/// are removed keeping the first occurrence, and provenance records which
/// decomposed question each surviving entry came from.
///
/// A rewrite that comes back empty falls back to the original question; a
/// decomposition that comes back empty yields a degraded (empty) set.
QuestionSet build_question_set(const std::string& claim, RunMode mode, backend::Backend& backend,
                               const DecomposerConfig& config, const prompts::Registry& registry,
                               const std::string& instance_id = {});

}  // namespace skeptic::decomposition
