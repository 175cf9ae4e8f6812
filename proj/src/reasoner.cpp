#include "skeptic/reasoner.hpp"

#include <algorithm>
#include <cctype>

namespace skeptic::reasoner {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool equals_nocase(std::string_view text, std::size_t pos, std::string_view token) {
    if (pos + token.size() > text.size()) return false;
    for (std::size_t i = 0; i < token.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(text[pos + i])) !=
            std::toupper(static_cast<unsigned char>(token[i]))) {
            return false;
        }
    }
    return true;
}

struct TokenHit {
    std::size_t pos = 0;
    Label label = Label::Supported;
};

// Scans for standalone SUPPORTED / NOT_SUPPORTED tokens (case-insensitive)
// and keeps the last one. A SUPPORTED immediately preceded by "NOT" plus a
// single separator is the tail of a refuted token, never a supported hit.
std::optional<Label> scan_label_tokens(std::string_view text) {
    static constexpr std::string_view kSupported = "SUPPORTED";
    std::optional<TokenHit> best;
    for (std::size_t pos = 0; pos + kSupported.size() <= text.size(); ++pos) {
        if (!equals_nocase(text, pos, kSupported)) continue;
        const std::size_t end = pos + kSupported.size();
        if (end < text.size() && is_word_char(text[end])) continue;

        bool negated = false;
        if (pos >= 4) {
            const char sep = text[pos - 1];
            if ((sep == '_' || sep == '-' || sep == ' ') && equals_nocase(text, pos - 4, "NOT")) {
                negated = true;
            }
        }
        if (negated) {
            best = TokenHit{pos - 4, Label::Refuted};
        } else if (pos == 0 || !is_word_char(text[pos - 1])) {
            best = TokenHit{pos, Label::Supported};
        }
    }
    if (!best) return std::nullopt;
    return best->label;
}

Verdict token_scan_verdict(const std::string& stripped, std::string raw) {
    Verdict verdict;
    verdict.raw = std::move(raw);
    if (auto label = scan_label_tokens(stripped)) {
        verdict.label = *label;
        verdict.parse_status = ParseStatus::Recovered;
    } else {
        verdict.parse_status = ParseStatus::Failed;
    }
    return verdict;
}

std::string upper(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return text;
}

}  // namespace

void VerifyTask::validate() const {
    instance.validate();
    const bool question_free = !questions.has_value();
    if ((mode == RunMode::OnlyReasoner) != question_free) {
        raise(ErrorKind::Config, "verify task: questions must be absent exactly for ONLY_REASONER");
    }
}

std::string strip_think_blocks(const std::string& raw) {
    static constexpr std::string_view kOpen = "<think>";
    static constexpr std::string_view kClose = "</think>";

    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = raw.find(kOpen, pos);
        if (open == std::string::npos) {
            out.append(raw, pos, raw.size() - pos);
            break;
        }
        const auto close = raw.find(kClose, open + kOpen.size());
        if (close == std::string::npos) return raw;  // unbalanced open tag
        out.append(raw, pos, open - pos);
        pos = close + kClose.size();
    }
    // A stray tag outside the removed regions also counts as unbalanced.
    if (out.find(kOpen) != std::string::npos || out.find(kClose) != std::string::npos) {
        return raw;
    }
    return out;
}

Verdict parse_verdict(const std::string& raw, PromptVariant variant) {
    const std::string stripped = trim(strip_think_blocks(raw));

    if (variant == PromptVariant::MiniCheck) {
        if (auto label = try_parse_label(stripped)) {
            Verdict verdict;
            verdict.raw = raw;
            verdict.label = *label;
            verdict.parse_status = ParseStatus::Ok;
            return verdict;
        }
        return token_scan_verdict(stripped, raw);
    }

    const auto open = stripped.find('{');
    const auto close = stripped.rfind('}');
    if (open != std::string::npos && close != std::string::npos && open < close) {
        const std::string blob = stripped.substr(open, close - open + 1);
        Json parsed = Json::parse(blob, nullptr, false);
        if (parsed.is_object() && parsed.contains("decision") &&
            parsed.at("decision").is_string()) {
            const std::string decision = upper(trim(parsed.at("decision").get<std::string>()));
            if (auto label = try_parse_label(decision)) {
                Verdict verdict;
                verdict.raw = raw;
                verdict.label = *label;
                if (parsed.contains("reasoning") && parsed.at("reasoning").is_string()) {
                    verdict.reasoning = parsed.at("reasoning").get<std::string>();
                }
                // Ok only when the response is exactly the instructed object;
                // JSON dug out of surrounding prose is a recovery.
                const bool exact = open == 0 && close == stripped.size() - 1;
                verdict.parse_status = exact ? ParseStatus::Ok : ParseStatus::Recovered;
                return verdict;
            }
        }
    }
    return token_scan_verdict(stripped, raw);
}

backend::ChatRequest build_verify_request(const VerifyTask& task, const ReasonerConfig& config,
                                          const prompts::Registry& registry) {
    task.validate();
    const bool with_questions = task.questions.has_value() && !task.questions->degraded();

    prompts::Bindings bindings{
        {"CLAIM", task.instance.claim},
        {"EVIDENCE", prompts::format_evidence(task.instance.evidence)},
    };
    if (with_questions) {
        bindings["QUESTIONS"] = prompts::format_questions(task.questions->presup_free);
    }
    const std::string prompt = registry.render_reasoner(task.variant, with_questions, bindings);

    return backend::make_chat_request(
        config.model, prompt, config.decoding,
        {prompts::Registry::reasoner_tag(task.variant, with_questions), task.instance.id});
}

Verdict verify(const VerifyTask& task, backend::Backend& backend, const ReasonerConfig& config,
               const prompts::Registry& registry) {
    const auto request = build_verify_request(task, config, registry);
    const auto response = backend.complete(request);
    return parse_verdict(response.content, task.variant);
}

}  // namespace skeptic::reasoner
