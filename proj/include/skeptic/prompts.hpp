#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "skeptic/core.hpp"

namespace skeptic::prompts {

enum class TemplateId {
    QuestionDecomposition,
    DePresupposition,
    ReasonerSg1,
    ReasonerSg2,
    ReasonerMiniCheck,
    CoverageJudge,
};

std::string to_string(TemplateId id);
TemplateId parse_template_id(std::string_view text);

struct PromptTemplate {
    TemplateId id;
    std::string body;  // placeholders written as {name}
    std::set<std::string> required_vars;
};

using Bindings = std::map<std::string, std::string>;

/// Substitutes {name} placeholders in a single left-to-right pass; bound
/// values are never rescanned, so brace-bearing values pass through intact.
std::string render_body(const std::string& body, const Bindings& bindings,
                        const std::set<std::string>& required_vars);

/// Loads template assets from a directory of UTF-8, LF-terminated text
/// files. Each file ends with one trailing LF that is not part of the
/// template body. Placeholder sets are validated at load time.
class Registry {
public:
    explicit Registry(std::filesystem::path dir = default_dir());

    /// SKEPTIC_PROMPT_DIR when set, otherwise the build-time asset path.
    static std::filesystem::path default_dir();

    const PromptTemplate& get(TemplateId id) const;
    std::string render(TemplateId id, const Bindings& bindings) const;

    /// Reasoner prompt for a variant. With `with_questions` false the
    /// question block and the instruction lines referring to it are absent
    /// (Only-Reasoner baseline, and degraded instances).
    std::string render_reasoner(PromptVariant variant, bool with_questions,
                                const Bindings& bindings) const;

    static TemplateId reasoner_template(PromptVariant variant);

    /// Tag id used for mock-script matching; question-free renders get a
    /// distinct "_NOQUESTIONS" suffix.
    static std::string reasoner_tag(PromptVariant variant, bool with_questions);

private:
    struct Loaded {
        std::string body;
        std::set<std::string> vars;
    };
    Loaded load_asset(const std::string& filename, const std::set<std::string>& expected_vars);

    std::filesystem::path dir_;
    std::map<TemplateId, PromptTemplate> templates_;
    std::map<PromptVariant, PromptTemplate> question_free_;
};

/// "N: question" lines, N starting at 1.
std::string format_questions(const std::vector<std::string>& questions);

/// Documents joined with one blank line, source order preserved.
std::string format_evidence(const std::vector<std::string>& docs);

}  // namespace skeptic::prompts
