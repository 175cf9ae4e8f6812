#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "skeptic/core.hpp"
#include "skeptic/datasets.hpp"

using namespace skeptic;

namespace {

ClaimInstance fixture_instance() {
    ClaimInstance instance;
    instance.id = "fix-001";
    instance.claim = "A Bollywood movie won the Oscar in 1928.";
    instance.evidence = {"The Academy Awards were first presented in 1929.",
                         "No Bollywood film was nominated in the 1920s."};
    instance.gold = Label::Refuted;
    return instance;
}

RunManifest fixture_manifest() {
    RunManifest manifest;
    manifest.dataset_path = "data/fixture.jsonl";
    manifest.mode = RunMode::DecompDepresup;
    manifest.prompt_variant = PromptVariant::Sg1;
    manifest.reasoner_model = "qwq-32b";
    manifest.decomposer_model = "qwq-32b";
    manifest.decoding = Json{{"reasoning_effort", "high"}};
    manifest.run_index = 0;
    manifest.seed = 42;
    manifest.concurrency_limit = 4;
    return manifest;
}

}  // namespace

TEST_CASE("label round-trips through its wire strings") {
    for (auto label : {Label::Supported, Label::Refuted}) {
        CHECK(parse_label(to_string(label)) == label);
    }
    CHECK(to_string(Label::Refuted) == "NOT_SUPPORTED");
    CHECK(!try_parse_label("REFUTED").has_value());
    CHECK_THROWS_AS(parse_label("PARTIALLY_SUPPORTED"), Error);
}

TEST_CASE("three-way labels map totally and surjectively onto the binary ones") {
    bool hit_supported = false;
    bool hit_refuted = false;
    for (auto raw : {RawLabel3::Supported, RawLabel3::PartiallySupported, RawLabel3::Refuted}) {
        switch (datasets::binarize(raw)) {
            case Label::Supported: hit_supported = true; break;
            case Label::Refuted: hit_refuted = true; break;
        }
    }
    CHECK(hit_supported);
    CHECK(hit_refuted);
}

TEST_CASE("mode, variant and status enums parse what they print") {
    for (auto mode : {RunMode::OnlyReasoner, RunMode::Decomp, RunMode::DecompDepresup}) {
        CHECK(parse_run_mode(to_string(mode)) == mode);
    }
    for (auto variant : {PromptVariant::Sg1, PromptVariant::Sg2, PromptVariant::MiniCheck}) {
        CHECK(parse_prompt_variant(to_string(variant)) == variant);
    }
    for (auto status : {ParseStatus::Ok, ParseStatus::Recovered, ParseStatus::Failed}) {
        CHECK(parse_parse_status(to_string(status)) == status);
    }
}

TEST_CASE("claim instance validation rejects degenerate content") {
    auto instance = fixture_instance();
    CHECK_NOTHROW(instance.validate());

    SUBCASE("empty claim") {
        instance.claim = "   \t ";
        CHECK_THROWS_AS(instance.validate(), Error);
    }
    SUBCASE("no evidence") {
        instance.evidence.clear();
        CHECK_THROWS_AS(instance.validate(), Error);
    }
    SUBCASE("blank evidence document") {
        instance.evidence.push_back("  ");
        CHECK_THROWS_AS(instance.validate(), Error);
    }
}

TEST_CASE("claim instance JSON round-trip") {
    auto instance = fixture_instance();
    SUBCASE("with subclaims") {
        instance.subclaims = std::vector<std::string>{"There was an Oscar in 1928."};
    }
    SUBCASE("without subclaims") {}
    auto restored = ClaimInstance::from_json(instance.to_json());
    CHECK(restored.id == instance.id);
    CHECK(restored.claim == instance.claim);
    CHECK(restored.evidence == instance.evidence);
    CHECK(restored.gold == instance.gold);
    CHECK(restored.subclaims == instance.subclaims);
    CHECK(restored.to_json().dump() == instance.to_json().dump());
}

TEST_CASE("question set invariants") {
    QuestionSet set;
    set.decomposed = {"Was there an Oscar in 1928?", "Did any Bollywood movie win it?"};
    set.presup_free = set.decomposed;
    set.provenance = {0, 1};
    CHECK_NOTHROW(set.validate());
    CHECK(!set.degraded());

    SUBCASE("duplicate presup_free entries") {
        set.presup_free.push_back(set.presup_free.front());
        set.provenance.push_back(0);
        CHECK_THROWS_AS(set.validate(), Error);
    }
    SUBCASE("provenance out of range") {
        set.provenance.back() = 5;
        CHECK_THROWS_AS(set.validate(), Error);
    }
    SUBCASE("provenance length mismatch") {
        set.provenance.pop_back();
        CHECK_THROWS_AS(set.validate(), Error);
    }
    SUBCASE("embedded newline") {
        set.presup_free.back() = "line one\nline two";
        CHECK_THROWS_AS(set.validate(), Error);
    }
    SUBCASE("round-trip") {
        auto restored = QuestionSet::from_json(set.to_json());
        CHECK(restored.to_json() == set.to_json());
        CHECK(restored.digest() == set.digest());
    }
}

TEST_CASE("verdict pairs FAILED with an absent label") {
    Verdict verdict;
    verdict.parse_status = ParseStatus::Failed;
    CHECK_NOTHROW(verdict.validate());

    verdict.label = Label::Supported;
    CHECK_THROWS_AS(verdict.validate(), Error);

    verdict.parse_status = ParseStatus::Ok;
    verdict.raw = R"({"decision": "SUPPORTED"})";
    CHECK_NOTHROW(verdict.validate());
    auto restored = Verdict::from_json(verdict.to_json());
    CHECK(restored.label == verdict.label);
    CHECK(restored.raw == verdict.raw);
}

TEST_CASE("manifest serializes canonically and reloads identically") {
    const auto manifest = fixture_manifest();
    const auto canonical = manifest.canonical();
    const auto reloaded = RunManifest::from_json(Json::parse(canonical));
    CHECK(reloaded == manifest);
    CHECK(reloaded.canonical() == canonical);
}

TEST_CASE("manifest validation") {
    auto manifest = fixture_manifest();
    manifest.concurrency_limit = 0;
    CHECK_THROWS_AS(manifest.validate(), Error);

    manifest = fixture_manifest();
    manifest.mode = RunMode::Decomp;
    manifest.decomposer_model.clear();
    CHECK_THROWS_AS(manifest.validate(), Error);
}

TEST_CASE("fingerprint is deterministic and field-sensitive") {
    const auto instance = fixture_instance();
    const auto manifest = fixture_manifest();
    const auto base = instance_fingerprint(instance, manifest);
    CHECK(instance_fingerprint(instance, manifest) == base);

    auto changed = manifest;
    changed.run_index = 1;
    CHECK(instance_fingerprint(instance, changed) != base);

    changed = manifest;
    changed.decoding["temperature"] = 0.7;
    CHECK(instance_fingerprint(instance, changed) != base);

    changed = manifest;
    changed.prompt_variant = PromptVariant::Sg2;
    CHECK(instance_fingerprint(instance, changed) != base);

    changed = manifest;
    changed.reasoner_model = "other-model";
    CHECK(instance_fingerprint(instance, changed) != base);

    auto other = instance;
    other.claim += " Slightly different.";
    CHECK(instance_fingerprint(other, manifest) != base);

    // concurrency_limit and seed do not feed the fingerprint
    changed = manifest;
    changed.concurrency_limit = 32;
    changed.seed = 7;
    CHECK(instance_fingerprint(instance, changed) == base);
}

TEST_CASE("fingerprint golden value stays frozen") {
    // Pinned once from the reference routine; any change to canonical
    // serialization or hashing must be deliberate and show up here.
    const auto digest = instance_fingerprint(fixture_instance(), fixture_manifest());
    CHECK(digest == "8dfb4d91088ac0d439d334d057bbbab7fdc9585fbef149aa811644b3593a1aa4");
}
