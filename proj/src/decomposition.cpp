#include "skeptic/decomposition.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "skeptic/reasoner.hpp"

namespace skeptic::decomposition {

namespace {

// "- question", tolerating "1." / "1:" numbering. Returns the question
// text or nullopt for a non-conforming line.
std::optional<std::string> question_from_line(const std::string& line) {
    if (line.rfind("- ", 0) == 0) {
        auto q = trim(line.substr(2));
        if (q.empty()) return std::nullopt;
        return q;
    }
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ':')) {
        auto q = trim(line.substr(i + 1));
        if (q.empty()) return std::nullopt;
        return q;
    }
    return std::nullopt;
}

ParsedQuestionList ask_for_questions(prompts::TemplateId template_id, const prompts::Bindings& bindings,
                                     backend::Backend& backend, const DecomposerConfig& config,
                                     const prompts::Registry& registry,
                                     const std::string& instance_id) {
    const std::string prompt = registry.render(template_id, bindings);
    auto request = backend::make_chat_request(config.model, prompt, config.decoding,
                                              {prompts::to_string(template_id), instance_id});
    const auto response = backend.complete(request);
    return parse_question_list(response.content);
}

}  // namespace

ParsedQuestionList parse_question_list(const std::string& raw) {
    ParsedQuestionList out;
    std::istringstream lines(reasoner::strip_think_blocks(raw));
    std::string line;
    while (std::getline(lines, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        if (auto question = question_from_line(stripped)) {
            out.questions.push_back(std::move(*question));
        } else {
            out.dropped_lines.push_back(stripped);
        }
    }
    return out;
}

ParsedQuestionList decompose_claim(const std::string& claim, backend::Backend& backend,
                                   const DecomposerConfig& config,
                                   const prompts::Registry& registry,
                                   const std::string& instance_id) {
    if (trim(claim).empty()) raise(ErrorKind::Config, "decompose_claim: claim is empty");
    return ask_for_questions(prompts::TemplateId::QuestionDecomposition, {{"claim", claim}},
                             backend, config, registry, instance_id);
}

ParsedQuestionList depresuppose_question(const std::string& question, backend::Backend& backend,
                                         const DecomposerConfig& config,
                                         const prompts::Registry& registry,
                                         const std::string& instance_id) {
    if (trim(question).empty()) raise(ErrorKind::Config, "depresuppose_question: question is empty");
    return ask_for_questions(prompts::TemplateId::DePresupposition, {{"question", question}},
                             backend, config, registry, instance_id);
}

QuestionSet build_question_set(const std::string& claim, RunMode mode, backend::Backend& backend,
                               const DecomposerConfig& config, const prompts::Registry& registry,
                               const std::string& instance_id) {
    if (mode == RunMode::OnlyReasoner) {
        raise(ErrorKind::Config, "build_question_set: ONLY_REASONER generates no questions");
    }

    QuestionSet set;
    auto decomposed = decompose_claim(claim, backend, config, registry, instance_id);
    if (decomposed.questions.empty()) return set;  // degraded instance
    set.decomposed = decomposed.questions;

    std::set<std::string> seen;
    auto add = [&](const std::string& question, std::size_t source) {
        if (!seen.insert(question).second) return;
        set.presup_free.push_back(question);
        set.provenance.push_back(source);
    };

    if (mode == RunMode::Decomp) {
        for (std::size_t i = 0; i < set.decomposed.size(); ++i) add(set.decomposed[i], i);
    } else {
        for (std::size_t i = 0; i < set.decomposed.size(); ++i) {
            const std::string sub_id =
                instance_id.empty() ? instance_id : instance_id + "#q" + std::to_string(i);
            auto rewrites =
                depresuppose_question(set.decomposed[i], backend, config, registry, sub_id);
            if (rewrites.questions.empty()) {
                // Empty rewrite: keep the original question for this slot.
                add(set.decomposed[i], i);
                continue;
            }
            for (const auto& question : rewrites.questions) add(question, i);
        }
    }
    set.validate();
    return set;
}

}  // namespace skeptic::decomposition
