#include "skeptic/prompts.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

namespace skeptic::prompts {

namespace {

const std::regex kPlaceholder(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");

struct AssetSpec {
    TemplateId id;
    const char* filename;
    std::set<std::string> vars;
};

const std::vector<AssetSpec>& asset_specs() {
    static const std::vector<AssetSpec> specs = {
        {TemplateId::QuestionDecomposition, "question_decomposition.txt", {"claim"}},
        {TemplateId::DePresupposition, "de_presupposition.txt", {"question"}},
        {TemplateId::ReasonerSg1, "reasoner_sg1.txt", {"CLAIM", "EVIDENCE", "QUESTIONS"}},
        {TemplateId::ReasonerSg2, "reasoner_sg2.txt", {"CLAIM", "EVIDENCE", "QUESTIONS"}},
        {TemplateId::ReasonerMiniCheck, "reasoner_minicheck.txt", {"CLAIM", "EVIDENCE", "QUESTIONS"}},
        {TemplateId::CoverageJudge, "coverage_judge.txt", {"claim", "evidence", "questions"}},
    };
    return specs;
}

const char* question_free_filename(PromptVariant variant) {
    switch (variant) {
        case PromptVariant::Sg1: return "reasoner_sg1_noquestions.txt";
        case PromptVariant::Sg2: return "reasoner_sg2_noquestions.txt";
        case PromptVariant::MiniCheck: return "reasoner_minicheck_noquestions.txt";
    }
    return "";
}

std::set<std::string> scan_vars(const std::string& body) {
    std::set<std::string> vars;
    for (auto it = std::sregex_iterator(body.begin(), body.end(), kPlaceholder);
         it != std::sregex_iterator(); ++it) {
        vars.insert((*it)[1].str());
    }
    return vars;
}

}  // namespace

std::string to_string(TemplateId id) {
    switch (id) {
        case TemplateId::QuestionDecomposition: return "QUESTION_DECOMPOSITION";
        case TemplateId::DePresupposition: return "DE_PRESUPPOSITION";
        case TemplateId::ReasonerSg1: return "REASONER_SG1";
        case TemplateId::ReasonerSg2: return "REASONER_SG2";
        case TemplateId::ReasonerMiniCheck: return "REASONER_MINICHECK";
        case TemplateId::CoverageJudge: return "COVERAGE_JUDGE";
    }
    return "";
}

TemplateId parse_template_id(std::string_view text) {
    for (const auto& spec : asset_specs()) {
        if (to_string(spec.id) == text) return spec.id;
    }
    raise(ErrorKind::UnknownTemplate, std::string(text));
}

std::string render_body(const std::string& body, const Bindings& bindings,
                        const std::set<std::string>& required_vars) {
    for (const auto& name : required_vars) {
        if (!bindings.count(name)) raise(ErrorKind::MissingVariable, name);
    }
    std::string out;
    out.reserve(body.size());
    auto begin = std::sregex_iterator(body.begin(), body.end(), kPlaceholder);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const auto& match = *it;
        const std::string name = match[1].str();
        auto bound = bindings.find(name);
        if (bound == bindings.end()) raise(ErrorKind::MissingVariable, name);
        out.append(body, last, static_cast<std::size_t>(match.position()) - last);
        out.append(bound->second);
        last = static_cast<std::size_t>(match.position() + match.length());
    }
    out.append(body, last, body.size() - last);
    return out;
}

Registry::Registry(std::filesystem::path dir) : dir_(std::move(dir)) {
    for (const auto& spec : asset_specs()) {
        auto loaded = load_asset(spec.filename, spec.vars);
        templates_[spec.id] = PromptTemplate{spec.id, std::move(loaded.body), spec.vars};
    }
    for (auto variant : {PromptVariant::Sg1, PromptVariant::Sg2, PromptVariant::MiniCheck}) {
        std::set<std::string> vars{"CLAIM", "EVIDENCE"};
        auto loaded = load_asset(question_free_filename(variant), vars);
        question_free_[variant] =
            PromptTemplate{reasoner_template(variant), std::move(loaded.body), vars};
    }
}

std::filesystem::path Registry::default_dir() {
    if (const char* env = std::getenv("SKEPTIC_PROMPT_DIR"); env && *env) return env;
#ifdef SKEPTIC_DEFAULT_PROMPT_DIR
    return SKEPTIC_DEFAULT_PROMPT_DIR;
#else
    return "assets/prompts";
#endif
}

Registry::Loaded Registry::load_asset(const std::string& filename,
                                      const std::set<std::string>& expected_vars) {
    const auto path = dir_ / filename;
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open prompt asset " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string body = buffer.str();
    // The trailing LF is file formatting, not template content.
    if (!body.empty() && body.back() == '\n') body.pop_back();

    auto vars = scan_vars(body);
    if (vars != expected_vars) {
        std::string have;
        for (const auto& v : vars) have += v + " ";
        raise(ErrorKind::Config,
              "prompt asset " + filename + " declares unexpected placeholders: " + have);
    }
    return Loaded{std::move(body), std::move(vars)};
}

const PromptTemplate& Registry::get(TemplateId id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) raise(ErrorKind::UnknownTemplate, to_string(id));
    return it->second;
}

std::string Registry::render(TemplateId id, const Bindings& bindings) const {
    const auto& tmpl = get(id);
    return render_body(tmpl.body, bindings, tmpl.required_vars);
}

std::string Registry::render_reasoner(PromptVariant variant, bool with_questions,
                                      const Bindings& bindings) const {
    if (with_questions) return render(reasoner_template(variant), bindings);
    const auto& tmpl = question_free_.at(variant);
    return render_body(tmpl.body, bindings, tmpl.required_vars);
}

TemplateId Registry::reasoner_template(PromptVariant variant) {
    switch (variant) {
        case PromptVariant::Sg1: return TemplateId::ReasonerSg1;
        case PromptVariant::Sg2: return TemplateId::ReasonerSg2;
        case PromptVariant::MiniCheck: return TemplateId::ReasonerMiniCheck;
    }
    return TemplateId::ReasonerSg1;
}

std::string Registry::reasoner_tag(PromptVariant variant, bool with_questions) {
    std::string tag = to_string(reasoner_template(variant));
    if (!with_questions) tag += "_NOQUESTIONS";
    return tag;
}

std::string format_questions(const std::vector<std::string>& questions) {
    if (questions.empty()) raise(ErrorKind::EmptyQuestionList, "no questions to format");
    std::string out;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ": " + questions[i];
    }
    return out;
}

std::string format_evidence(const std::vector<std::string>& docs) {
    if (docs.empty()) raise(ErrorKind::EmptyEvidence, "no evidence documents to format");
    std::string out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i) out += "\n\n";
        out += docs[i];
    }
    return out;
}

}  // namespace skeptic::prompts
