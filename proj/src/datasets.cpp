#include "skeptic/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace skeptic::datasets {

std::string to_string(LabelScheme scheme) {
    return scheme == LabelScheme::Binary ? "binary" : "wice3";
}

LabelScheme parse_label_scheme(std::string_view text) {
    if (text == "binary") return LabelScheme::Binary;
    if (text == "wice3") return LabelScheme::Wice3;
    raise(ErrorKind::Config, "unknown label scheme '" + std::string(text) + "'");
}

Json DatasetManifest::to_json() const {
    Json j{{"name", name},
           {"path", path.string()},
           {"format", format},
           {"label_scheme", to_string(label_scheme)}};
    if (expected_counts) {
        j["expected_counts"] = Json{{"n", expected_counts->n},
                                    {"supported", expected_counts->supported},
                                    {"refuted", expected_counts->refuted}};
    }
    return j;
}

DatasetManifest DatasetManifest::from_json(const Json& j) {
    DatasetManifest manifest;
    manifest.name = j.at("name").get<std::string>();
    manifest.path = j.at("path").get<std::string>();
    manifest.format = j.value("format", "jsonl");
    if (manifest.format != "jsonl") {
        raise(ErrorKind::Config, "unsupported dataset format '" + manifest.format + "'");
    }
    manifest.label_scheme = parse_label_scheme(j.at("label_scheme").get<std::string>());
    if (j.contains("expected_counts")) {
        const auto& c = j.at("expected_counts");
        manifest.expected_counts = ExpectedCounts{c.at("n").get<std::int64_t>(),
                                                  c.at("supported").get<std::int64_t>(),
                                                  c.at("refuted").get<std::int64_t>()};
    }
    return manifest;
}

Label binarize(RawLabel3 label) {
    switch (label) {
        case RawLabel3::Supported: return Label::Supported;
        case RawLabel3::PartiallySupported: return Label::Refuted;
        case RawLabel3::Refuted: return Label::Refuted;
    }
    return Label::Refuted;
}

std::vector<ClaimInstance> load_jsonl(const std::filesystem::path& path, LabelScheme scheme) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open dataset " + path.string());

    std::vector<ClaimInstance> instances;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) raise(ErrorKind::SchemaError, where + ": invalid JSON");
        try {
            ClaimInstance instance;
            instance.id = j.at("id").get<std::string>();
            instance.claim = j.at("claim").get<std::string>();
            instance.evidence = j.at("evidence").get<std::vector<std::string>>();
            const std::string label = j.at("label").get<std::string>();
            instance.gold = scheme == LabelScheme::Wice3 ? binarize(parse_raw_label3(label))
                                                         : parse_label(label);
            if (j.contains("subclaims")) {
                instance.subclaims = j.at("subclaims").get<std::vector<std::string>>();
            }
            instance.validate();
            if (!ids.insert(instance.id).second) {
                raise(ErrorKind::SchemaError, where + ": duplicate id '" + instance.id + "'");
            }
            instances.push_back(std::move(instance));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            raise(ErrorKind::SchemaError, where + ": " + e.what());
        }
    }
    return instances;
}

std::vector<ClaimInstance> load(const DatasetManifest& manifest) {
    auto instances = load_jsonl(manifest.path, manifest.label_scheme);
    if (manifest.expected_counts) {
        const auto& expected = *manifest.expected_counts;
        std::int64_t supported = 0;
        for (const auto& instance : instances) {
            if (instance.gold == Label::Supported) ++supported;
        }
        const auto n = static_cast<std::int64_t>(instances.size());
        const auto refuted = n - supported;
        if (n != expected.n || supported != expected.supported || refuted != expected.refuted) {
            std::ostringstream msg;
            msg << manifest.name << ": expected (n=" << expected.n << ", supported="
                << expected.supported << ", refuted=" << expected.refuted << ") but loaded (n=" << n
                << ", supported=" << supported << ", refuted=" << refuted << ")";
            raise(ErrorKind::CountMismatch, msg.str());
        }
    }
    return instances;
}

void save_jsonl(const std::vector<ClaimInstance>& instances, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write dataset " + path.string());
    for (const auto& instance : instances) {
        Json j = instance.to_json();
        j["label"] = j.at("gold");
        j.erase("gold");
        out << j.dump() << "\n";
    }
}

namespace {

// Bounded uniform draw by rejection; mt19937_64 output is pinned by the
// standard, so selections reproduce across platforms (std distributions
// are not and must stay out of this path).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t value = rng();
    while (value >= limit) value = rng();
    return value % n;
}

std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t k,
                                                    std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace

std::vector<ClaimInstance> balanced_subsample(const std::vector<ClaimInstance>& instances,
                                              std::size_t n_per_class, std::uint64_t seed) {
    if (n_per_class == 0) return {};

    std::vector<std::size_t> supported, refuted;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        (instances[i].gold == Label::Supported ? supported : refuted).push_back(i);
    }
    auto check = [&](const std::vector<std::size_t>& pool, Label label) {
        if (pool.size() < n_per_class) {
            raise(ErrorKind::InsufficientClass,
                  to_string(label) + ": have " + std::to_string(pool.size()) + ", need " +
                      std::to_string(n_per_class));
        }
    };
    check(supported, Label::Supported);
    check(refuted, Label::Refuted);

    std::mt19937_64 rng(seed);
    std::vector<ClaimInstance> out;
    out.reserve(n_per_class * 2);
    for (auto index : sample_without_replacement(supported, n_per_class, rng)) {
        out.push_back(instances[index]);
    }
    for (auto index : sample_without_replacement(refuted, n_per_class, rng)) {
        out.push_back(instances[index]);
    }
    std::sort(out.begin(), out.end(),
              [](const ClaimInstance& a, const ClaimInstance& b) { return a.id < b.id; });
    return out;
}

namespace {

std::int64_t word_count(const std::string& text) {
    std::istringstream words(text);
    std::string word;
    std::int64_t count = 0;
    while (words >> word) ++count;
    return count;
}

}  // namespace

DatasetStats stats(const std::vector<ClaimInstance>& instances) {
    if (instances.empty()) raise(ErrorKind::EmptyList, "stats: no instances");
    DatasetStats out;
    out.n = static_cast<std::int64_t>(instances.size());
    std::int64_t claim_words = 0;
    std::int64_t evidence_words = 0;
    for (const auto& instance : instances) {
        if (instance.gold == Label::Supported) {
            ++out.supported;
        } else {
            ++out.refuted;
        }
        claim_words += word_count(instance.claim);
        for (const auto& doc : instance.evidence) evidence_words += word_count(doc);
    }
    out.mean_claim_words = static_cast<double>(claim_words) / static_cast<double>(out.n);
    out.mean_evidence_words = static_cast<double>(evidence_words) / static_cast<double>(out.n);
    return out;
}

}  // namespace skeptic::datasets
