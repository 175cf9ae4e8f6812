#include "skeptic/core.hpp"

#include <algorithm>
#include <set>

#include "skeptic/digest.hpp"

namespace skeptic {

std::string to_string(Label label) {
    return label == Label::Supported ? "SUPPORTED" : "NOT_SUPPORTED";
}

std::string to_string(RawLabel3 label) {
    switch (label) {
        case RawLabel3::Supported: return "SUPPORTED";
        case RawLabel3::PartiallySupported: return "PARTIALLY_SUPPORTED";
        case RawLabel3::Refuted: return "NOT_SUPPORTED";
    }
    return "NOT_SUPPORTED";
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::OnlyReasoner: return "ONLY_REASONER";
        case RunMode::Decomp: return "DECOMP";
        case RunMode::DecompDepresup: return "DECOMP_DEPRESUP";
    }
    return "ONLY_REASONER";
}

std::string to_string(PromptVariant variant) {
    switch (variant) {
        case PromptVariant::Sg1: return "SG1";
        case PromptVariant::Sg2: return "SG2";
        case PromptVariant::MiniCheck: return "MINICHECK";
    }
    return "SG1";
}

std::string to_string(ParseStatus status) {
    switch (status) {
        case ParseStatus::Ok: return "OK";
        case ParseStatus::Recovered: return "RECOVERED";
        case ParseStatus::Failed: return "FAILED";
    }
    return "FAILED";
}

std::optional<Label> try_parse_label(std::string_view text) {
    if (text == "SUPPORTED") return Label::Supported;
    if (text == "NOT_SUPPORTED") return Label::Refuted;
    return std::nullopt;
}

Label parse_label(std::string_view text) {
    auto label = try_parse_label(text);
    if (!label) raise(ErrorKind::SchemaError, "unknown label '" + std::string(text) + "'");
    return *label;
}

RawLabel3 parse_raw_label3(std::string_view text) {
    if (text == "SUPPORTED") return RawLabel3::Supported;
    if (text == "PARTIALLY_SUPPORTED") return RawLabel3::PartiallySupported;
    if (text == "NOT_SUPPORTED") return RawLabel3::Refuted;
    raise(ErrorKind::SchemaError, "unknown three-way label '" + std::string(text) + "'");
}

RunMode parse_run_mode(std::string_view text) {
    if (text == "ONLY_REASONER") return RunMode::OnlyReasoner;
    if (text == "DECOMP") return RunMode::Decomp;
    if (text == "DECOMP_DEPRESUP") return RunMode::DecompDepresup;
    raise(ErrorKind::SchemaError, "unknown run mode '" + std::string(text) + "'");
}

PromptVariant parse_prompt_variant(std::string_view text) {
    if (text == "SG1") return PromptVariant::Sg1;
    if (text == "SG2") return PromptVariant::Sg2;
    if (text == "MINICHECK") return PromptVariant::MiniCheck;
    raise(ErrorKind::SchemaError, "unknown prompt variant '" + std::string(text) + "'");
}

ParseStatus parse_parse_status(std::string_view text) {
    if (text == "OK") return ParseStatus::Ok;
    if (text == "RECOVERED") return ParseStatus::Recovered;
    if (text == "FAILED") return ParseStatus::Failed;
    raise(ErrorKind::SchemaError, "unknown parse status '" + std::string(text) + "'");
}

std::string trim(std::string_view text) {
    const char* ws = " \t\r\n\f\v";
    auto begin = text.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    auto end = text.find_last_not_of(ws);
    return std::string(text.substr(begin, end - begin + 1));
}

// --- ClaimInstance ---------------------------------------------------------

void ClaimInstance::validate() const {
    if (id.empty()) raise(ErrorKind::SchemaError, "instance id is empty");
    if (trim(claim).empty()) raise(ErrorKind::SchemaError, "instance '" + id + "': claim is empty");
    if (evidence.empty()) {
        raise(ErrorKind::SchemaError, "instance '" + id + "': evidence list is empty");
    }
    for (const auto& doc : evidence) {
        if (trim(doc).empty()) {
            raise(ErrorKind::SchemaError, "instance '" + id + "': empty evidence document");
        }
    }
    if (subclaims) {
        for (const auto& sub : *subclaims) {
            if (trim(sub).empty()) {
                raise(ErrorKind::SchemaError, "instance '" + id + "': empty subclaim");
            }
        }
    }
}

Json ClaimInstance::to_json() const {
    Json j{
        {"id", id},
        {"claim", claim},
        {"evidence", evidence},
        {"gold", to_string(gold)},
    };
    if (subclaims) j["subclaims"] = *subclaims;
    return j;
}

ClaimInstance ClaimInstance::from_json(const Json& j) {
    ClaimInstance instance;
    instance.id = j.at("id").get<std::string>();
    instance.claim = j.at("claim").get<std::string>();
    instance.evidence = j.at("evidence").get<std::vector<std::string>>();
    instance.gold = parse_label(j.at("gold").get<std::string>());
    if (j.contains("subclaims")) {
        instance.subclaims = j.at("subclaims").get<std::vector<std::string>>();
    }
    instance.validate();
    return instance;
}

// --- QuestionSet -----------------------------------------------------------

void QuestionSet::validate() const {
    auto check_entries = [](const std::vector<std::string>& qs, const char* what) {
        for (const auto& q : qs) {
            if (trim(q).empty()) raise(ErrorKind::SchemaError, std::string(what) + ": empty entry");
            if (q.find('\n') != std::string::npos) {
                raise(ErrorKind::SchemaError, std::string(what) + ": entry spans multiple lines");
            }
        }
    };
    check_entries(decomposed, "decomposed");
    check_entries(presup_free, "presup_free");

    std::set<std::string> seen;
    for (const auto& q : presup_free) {
        if (!seen.insert(q).second) {
            raise(ErrorKind::SchemaError, "presup_free: duplicate question '" + q + "'");
        }
    }
    if (provenance.size() != presup_free.size()) {
        raise(ErrorKind::SchemaError, "provenance size does not match presup_free");
    }
    for (auto source : provenance) {
        if (source >= decomposed.size()) {
            raise(ErrorKind::SchemaError, "provenance index out of range");
        }
    }
}

Json QuestionSet::to_json() const {
    return Json{
        {"decomposed", decomposed},
        {"presup_free", presup_free},
        {"provenance", provenance},
    };
}

QuestionSet QuestionSet::from_json(const Json& j) {
    QuestionSet set;
    set.decomposed = j.at("decomposed").get<std::vector<std::string>>();
    set.presup_free = j.at("presup_free").get<std::vector<std::string>>();
    set.provenance = j.at("provenance").get<std::vector<std::size_t>>();
    set.validate();
    return set;
}

std::string QuestionSet::digest() const { return sha256_hex(to_json().dump()); }

// --- Verdict ---------------------------------------------------------------

void Verdict::validate() const {
    if ((parse_status == ParseStatus::Failed) == label.has_value()) {
        raise(ErrorKind::SchemaError, "verdict: parse_status FAILED must pair with absent label");
    }
}

Json Verdict::to_json() const {
    return Json{
        {"label", label ? Json(to_string(*label)) : Json(nullptr)},
        {"reasoning", reasoning},
        {"raw", raw},
        {"parse_status", to_string(parse_status)},
    };
}

Verdict Verdict::from_json(const Json& j) {
    Verdict verdict;
    if (!j.at("label").is_null()) verdict.label = parse_label(j.at("label").get<std::string>());
    verdict.reasoning = j.at("reasoning").get<std::string>();
    verdict.raw = j.at("raw").get<std::string>();
    verdict.parse_status = parse_parse_status(j.at("parse_status").get<std::string>());
    verdict.validate();
    return verdict;
}

// --- RunManifest -----------------------------------------------------------

void RunManifest::validate() const {
    if (dataset_path.empty()) raise(ErrorKind::Config, "manifest: dataset_path is empty");
    if (reasoner_model.empty()) raise(ErrorKind::Config, "manifest: reasoner_model is empty");
    if (mode != RunMode::OnlyReasoner && decomposer_model.empty()) {
        raise(ErrorKind::Config, "manifest: decomposer_model required for mode " + to_string(mode));
    }
    if (!decoding.is_object()) raise(ErrorKind::Config, "manifest: decoding must be a JSON object");
    if (run_index < 0) raise(ErrorKind::Config, "manifest: run_index must be >= 0");
    if (concurrency_limit < 1) raise(ErrorKind::Config, "manifest: concurrency_limit must be >= 1");
}

Json RunManifest::to_json() const {
    return Json{
        {"dataset_path", dataset_path},
        {"mode", to_string(mode)},
        {"prompt_variant", to_string(prompt_variant)},
        {"reasoner_model", reasoner_model},
        {"decomposer_model", decomposer_model},
        {"decoding", decoding},
        {"run_index", run_index},
        {"seed", seed},
        {"concurrency_limit", concurrency_limit},
    };
}

RunManifest RunManifest::from_json(const Json& j) {
    RunManifest manifest;
    manifest.dataset_path = j.at("dataset_path").get<std::string>();
    manifest.mode = parse_run_mode(j.at("mode").get<std::string>());
    manifest.prompt_variant = parse_prompt_variant(j.at("prompt_variant").get<std::string>());
    manifest.reasoner_model = j.at("reasoner_model").get<std::string>();
    manifest.decomposer_model = j.at("decomposer_model").get<std::string>();
    manifest.decoding = j.at("decoding");
    manifest.run_index = j.at("run_index").get<int>();
    manifest.seed = j.at("seed").get<std::int64_t>();
    manifest.concurrency_limit = j.at("concurrency_limit").get<int>();
    manifest.validate();
    return manifest;
}

std::string RunManifest::canonical() const { return to_json().dump(); }

std::string RunManifest::experiment_digest() const {
    Json j = to_json();
    j.erase("concurrency_limit");
    return sha256_hex(j.dump());
}

bool RunManifest::operator==(const RunManifest& other) const {
    return to_json() == other.to_json();
}

std::string instance_fingerprint(const ClaimInstance& instance, const RunManifest& manifest) {
    Json j{
        {"claim", instance.claim},
        {"evidence", instance.evidence},
        {"mode", to_string(manifest.mode)},
        {"prompt_variant", to_string(manifest.prompt_variant)},
        {"reasoner_model", manifest.reasoner_model},
        {"decomposer_model", manifest.decomposer_model},
        {"decoding", manifest.decoding},
        {"run_index", manifest.run_index},
    };
    return sha256_hex(j.dump());
}

}  // namespace skeptic
