#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skeptic/prompts.hpp"

using namespace skeptic;
using prompts::TemplateId;

namespace {

const prompts::Bindings kSentinels{
    {"claim", "<<CLAIM>>"},       {"question", "<<QUESTION>>"},
    {"CLAIM", "<<CLAIM>>"},       {"EVIDENCE", "<<EVIDENCE>>"},
    {"QUESTIONS", "<<QUESTIONS>>"}, {"evidence", "<<EVIDENCE>>"},
    {"questions", "<<QUESTIONS>>"},
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string golden(const std::string& name) {
    return read_file(std::filesystem::path(SKEPTIC_FIXTURE_DIR) / "prompts" / name);
}

const prompts::Registry& registry() {
    static prompts::Registry reg;
    return reg;
}

}  // namespace

TEST_CASE("every template byte-matches its golden render") {
    const std::pair<TemplateId, const char*> cases[] = {
        {TemplateId::QuestionDecomposition, "question_decomposition.golden.txt"},
        {TemplateId::DePresupposition, "de_presupposition.golden.txt"},
        {TemplateId::ReasonerSg1, "reasoner_sg1.golden.txt"},
        {TemplateId::ReasonerSg2, "reasoner_sg2.golden.txt"},
        {TemplateId::ReasonerMiniCheck, "reasoner_minicheck.golden.txt"},
        {TemplateId::CoverageJudge, "coverage_judge.golden.txt"},
    };
    for (const auto& [id, file] : cases) {
        INFO("template ", prompts::to_string(id));
        CHECK(registry().render(id, kSentinels) == golden(file));
    }
}

TEST_CASE("question-free reasoner variants byte-match their goldens") {
    const std::pair<PromptVariant, const char*> cases[] = {
        {PromptVariant::Sg1, "reasoner_sg1_noquestions.golden.txt"},
        {PromptVariant::Sg2, "reasoner_sg2_noquestions.golden.txt"},
        {PromptVariant::MiniCheck, "reasoner_minicheck_noquestions.golden.txt"},
    };
    for (const auto& [variant, file] : cases) {
        INFO("variant ", to_string(variant));
        auto rendered = registry().render_reasoner(variant, false, kSentinels);
        CHECK(rendered == golden(file));
        CHECK(rendered.find("<<QUESTIONS>>") == std::string::npos);
        CHECK(rendered.find("uestions") == std::string::npos);
    }
}

TEST_CASE("decomposition prompt ends with the claim slot") {
    auto rendered = registry().render(TemplateId::QuestionDecomposition, {{"claim", "X"}});
    CHECK(rendered.ends_with("Claim: X\nQuestions:"));
}

TEST_CASE("minicheck prompt ends with its answer section") {
    auto rendered = registry().render(
        TemplateId::ReasonerMiniCheck,
        {{"CLAIM", "c"}, {"EVIDENCE", "e"}, {"QUESTIONS", "1: q"}});
    CHECK(rendered.ends_with("Answer:"));
}

TEST_CASE("rendering is a pure function of its inputs") {
    auto once = registry().render(TemplateId::ReasonerSg2, kSentinels);
    auto twice = registry().render(TemplateId::ReasonerSg2, kSentinels);
    CHECK(once == twice);
}

TEST_CASE("placeholder-looking text inside bound values survives untouched") {
    auto rendered = registry().render(TemplateId::DePresupposition,
                                      {{"question", "Is {placeholder} literal?"}});
    CHECK(rendered.find("Is {placeholder} literal?") != std::string::npos);
}

TEST_CASE("missing bindings raise MissingVariable") {
    CHECK_THROWS_WITH_AS(registry().render(TemplateId::QuestionDecomposition, {}),
                         "MissingVariable: claim", Error);
    CHECK_THROWS_AS(
        registry().render(TemplateId::ReasonerSg1, {{"CLAIM", "c"}, {"EVIDENCE", "e"}}), Error);
}

TEST_CASE("unknown template names are rejected") {
    CHECK_THROWS_AS(prompts::parse_template_id("REASONER_SG3"), Error);
    CHECK(prompts::parse_template_id("COVERAGE_JUDGE") == TemplateId::CoverageJudge);
}

TEST_CASE("tampered assets fail loudly at load") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "skeptic_prompt_tamper";
    fs::remove_all(dir);
    fs::copy(prompts::Registry::default_dir(), dir);
    {
        std::ofstream out(dir / "reasoner_sg1.txt", std::ios::binary | std::ios::trunc);
        out << "Claim: {CLAIM}\nEvidence: {EVIDENCE}\n";  // QUESTIONS placeholder missing
    }
    CHECK_THROWS_AS(prompts::Registry{dir}, Error);
    fs::remove_all(dir);
}

TEST_CASE("format_questions numbers from one") {
    CHECK(prompts::format_questions({"A?", "B?"}) == "1: A?\n2: B?");
    CHECK(prompts::format_questions({"only"}) == "1: only");
    CHECK_THROWS_AS(prompts::format_questions({}), Error);

    std::vector<std::string> twelve;
    for (int i = 0; i < 12; ++i) twelve.push_back("q" + std::to_string(i));
    const auto block = prompts::format_questions(twelve);
    CHECK(std::count(block.begin(), block.end(), '\n') == 11);
    CHECK(block.starts_with("1: q0"));
    CHECK(block.find("\n12: q11") != std::string::npos);
}

TEST_CASE("format_evidence joins documents with a blank line") {
    CHECK(prompts::format_evidence({"doc one", "doc two"}) == "doc one\n\ndoc two");
    CHECK(prompts::format_evidence({"single"}) == "single");
    CHECK_THROWS_AS(prompts::format_evidence({}), Error);
}
