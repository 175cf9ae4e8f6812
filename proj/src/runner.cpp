#include "skeptic/runner.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "skeptic/decomposition.hpp"
#include "skeptic/digest.hpp"
#include "skeptic/reasoner.hpp"

namespace skeptic::runner {

namespace fs = std::filesystem;

namespace {

Json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        raise(ErrorKind::Io, path.string() + ": " + e.what());
    }
    return j;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorKind::Io, "cannot write " + tmp);
        out << text;
    }
    fs::rename(tmp, path);
}

}  // namespace

Json RunRecord::to_json() const {
    Json j{
        {"instance_id", instance_id},
        {"run_index", run_index},
        {"mode", to_string(mode)},
        {"variant", to_string(variant)},
        {"gold", to_string(gold)},
        {"label", verdict.label ? Json(to_string(*verdict.label)) : Json(nullptr)},
        {"parse_status", to_string(verdict.parse_status)},
        {"raw_digest", raw_digest},
        {"question_set_digest", question_set_digest},
        {"fingerprint", fingerprint},
    };
    if (error) j["error"] = *error;
    return j;
}

RunRecord RunRecord::from_json(const Json& j) {
    RunRecord record;
    record.instance_id = j.at("instance_id").get<std::string>();
    record.run_index = j.at("run_index").get<int>();
    record.mode = parse_run_mode(j.at("mode").get<std::string>());
    record.variant = parse_prompt_variant(j.at("variant").get<std::string>());
    record.gold = parse_label(j.at("gold").get<std::string>());
    if (!j.at("label").is_null()) {
        record.verdict.label = parse_label(j.at("label").get<std::string>());
    }
    record.verdict.parse_status = parse_parse_status(j.at("parse_status").get<std::string>());
    record.verdict.validate();
    record.raw_digest = j.at("raw_digest").get<std::string>();
    record.question_set_digest = j.at("question_set_digest").get<std::string>();
    record.fingerprint = j.at("fingerprint").get<std::string>();
    if (j.contains("error")) record.error = j.at("error").get<std::string>();
    return record;
}

Engine::Engine(const prompts::Registry& registry, std::shared_ptr<backend::Backend> transport,
               EngineOptions options)
    : registry_(registry), transport_(std::move(transport)) {
    std::shared_ptr<backend::CacheStore> cache;
    if (options.cache_dir) cache = std::make_shared<backend::CacheStore>(*options.cache_dir);
    caching_ = std::make_shared<backend::CachingBackend>(transport_, std::move(cache));
}

fs::path Engine::run_dir_for(const RunManifest& manifest, const fs::path& out_root) {
    return out_root / ("run-" + manifest.experiment_digest().substr(0, 16));
}

fs::path Engine::questionset_dir_for(const RunManifest& manifest, const fs::path& out_root) {
    // Shared across prompt variants: variants differ only at the reasoner.
    Json key{
        {"dataset_path", manifest.dataset_path},
        {"decomposer_model", manifest.decomposer_model},
        {"mode", to_string(manifest.mode)},
        {"decoding", manifest.decoding},
        {"run_index", manifest.run_index},
    };
    return out_root / "questionsets" / ("qs-" + sha256_hex(key.dump()).substr(0, 16));
}

QuestionSet Engine::question_set_for(const ClaimInstance& instance, const RunManifest& manifest,
                                     const fs::path& qs_dir) {
    const auto path = qs_dir / (instance.id + ".json");
    if (fs::exists(path)) return QuestionSet::from_json(read_json_file(path));

    auto set = decomposition::build_question_set(
        instance.claim, manifest.mode, *caching_,
        {manifest.decomposer_model, manifest.decoding}, registry_, instance.id);
    write_text_atomic(path, set.to_json().dump() + "\n");
    return set;
}

RunResult Engine::run(const RunManifest& manifest, const std::vector<ClaimInstance>& instances,
                      const fs::path& out_root) {
    manifest.validate();
    {
        std::set<std::string> ids;
        for (const auto& instance : instances) {
            instance.validate();
            if (!ids.insert(instance.id).second) {
                raise(ErrorKind::SchemaError, "duplicate instance id '" + instance.id + "'");
            }
        }
    }

    const auto run_dir = run_dir_for(manifest, out_root);
    fs::create_directories(run_dir);
    const auto manifest_path = run_dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        auto existing = RunManifest::from_json(read_json_file(manifest_path));
        auto a = existing.to_json();
        auto b = manifest.to_json();
        a.erase("concurrency_limit");
        b.erase("concurrency_limit");
        if (a != b) {
            raise(ErrorKind::Config, "run directory " + run_dir.string() +
                                         " belongs to a different manifest");
        }
    } else {
        write_text_atomic(manifest_path, manifest.canonical() + "\n");
    }

    std::vector<std::string> fingerprints;
    fingerprints.reserve(instances.size());
    for (const auto& instance : instances) {
        fingerprints.push_back(instance_fingerprint(instance, manifest));
    }

    const auto records_path = run_dir / "records.jsonl";
    std::map<std::string, RunRecord> recorded;
    if (fs::exists(records_path)) {
        for (auto& record : load_records(records_path)) {
            recorded.emplace(record.fingerprint, std::move(record));
        }
    }

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (!recorded.count(fingerprints[i])) pending.push_back(i);
    }

    fs::path qs_dir;
    if (manifest.mode != RunMode::OnlyReasoner) {
        qs_dir = questionset_dir_for(manifest, out_root);
        fs::create_directories(qs_dir);
    }

    const reasoner::ReasonerConfig reasoner_config{manifest.reasoner_model, manifest.decoding};

    auto process = [&](std::size_t index) {
        const auto& instance = instances[index];
        RunRecord record;
        record.instance_id = instance.id;
        record.run_index = manifest.run_index;
        record.mode = manifest.mode;
        record.variant = manifest.prompt_variant;
        record.gold = instance.gold;
        record.fingerprint = fingerprints[index];
        const auto start = std::chrono::steady_clock::now();
        try {
            std::optional<QuestionSet> questions;
            if (manifest.mode != RunMode::OnlyReasoner) {
                questions = question_set_for(instance, manifest, qs_dir);
                record.question_set_digest = questions->digest();
            }
            reasoner::VerifyTask task{instance, std::move(questions), manifest.prompt_variant,
                                      manifest.mode};
            const auto request = reasoner::build_verify_request(task, reasoner_config, registry_);
            auto response = caching_->complete(request);
            auto verdict = reasoner::parse_verdict(response.content, manifest.prompt_variant);
            if (verdict.parse_status == ParseStatus::Failed) {
                // One cache-bypassed re-ask; a second failure scores as wrong.
                response = caching_->complete_fresh(request);
                verdict = reasoner::parse_verdict(response.content, manifest.prompt_variant);
            }
            record.raw_digest = sha256_hex(verdict.raw);
            record.verdict = std::move(verdict);
        } catch (const std::exception& e) {
            record.error = e.what();
            record.verdict = Verdict{};
            record.raw_digest = sha256_hex(record.verdict.raw);
        }
        record.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
        return record;
    };

    // Records are flushed in instance order no matter which worker finishes
    // first, keeping records.jsonl byte-identical run to run.
    const std::int64_t resumed = static_cast<std::int64_t>(recorded.size());
    if (!pending.empty()) {
        std::ofstream records_out(records_path, std::ios::binary | std::ios::app);
        if (!records_out) raise(ErrorKind::Io, "cannot append to " + records_path.string());

        std::atomic<std::size_t> next{0};
        std::mutex flush_mutex;
        std::map<std::size_t, RunRecord> finished;
        std::size_t next_to_flush = 0;
        std::exception_ptr failure;

        auto worker = [&] {
            while (true) {
                const std::size_t slot = next.fetch_add(1);
                if (slot >= pending.size()) break;
                RunRecord record = process(pending[slot]);
                std::lock_guard lock(flush_mutex);
                finished.emplace(slot, std::move(record));
                while (true) {
                    auto ready = finished.find(next_to_flush);
                    if (ready == finished.end()) break;
                    try {
                        records_out << ready->second.to_json().dump() << "\n";
                        records_out.flush();
                        recorded.emplace(ready->second.fingerprint, ready->second);
                    } catch (...) {
                        if (!failure) failure = std::current_exception();
                    }
                    finished.erase(ready);
                    ++next_to_flush;
                }
            }
        };

        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(manifest.concurrency_limit),
                                  pending.size());
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
        if (failure) std::rethrow_exception(failure);
    }

    RunResult result;
    result.run_dir = run_dir;
    result.resumed = resumed;
    result.records.reserve(instances.size());
    std::vector<std::optional<Label>> preds;
    std::vector<Label> golds;
    preds.reserve(instances.size());
    golds.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        auto it = recorded.find(fingerprints[i]);
        if (it == recorded.end()) {
            raise(ErrorKind::Io, "no record produced for instance '" + instances[i].id + "'");
        }
        preds.push_back(it->second.verdict.label);
        golds.push_back(instances[i].gold);
        result.records.push_back(it->second);
    }
    result.report = metrics::balanced_accuracy(preds, golds);
    write_text_atomic(run_dir / "metrics.json", result.report.to_json().dump() + "\n");
    return result;
}

std::vector<RunRecord> load_records(const fs::path& records_path) {
    std::ifstream in(records_path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open " + records_path.string());
    std::vector<RunRecord> records;
    std::set<std::string> keys;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            raise(ErrorKind::SchemaError,
                  records_path.string() + " line " + std::to_string(line_no) + ": invalid JSON");
        }
        auto record = RunRecord::from_json(j);
        std::string key = record.instance_id + "|" + std::to_string(record.run_index) + "|" +
                          to_string(record.mode) + "|" + to_string(record.variant);
        if (!keys.insert(key).second) {
            raise(ErrorKind::SchemaError,
                  records_path.string() + ": duplicate record for (" + key + ")");
        }
        records.push_back(std::move(record));
    }
    return records;
}

RunDirData load_run_dir(const fs::path& dir) {
    RunDirData data;
    data.dir = dir;
    data.manifest = RunManifest::from_json(read_json_file(dir / "manifest.json"));
    data.report = metrics::MetricsReport::from_json(read_json_file(dir / "metrics.json"));
    return data;
}

std::vector<RunDirData> discover_run_dirs(const fs::path& out_root) {
    std::vector<fs::path> dirs;
    if (fs::exists(out_root)) {
        for (const auto& entry : fs::directory_iterator(out_root)) {
            if (entry.is_directory() && fs::exists(entry.path() / "manifest.json") &&
                fs::exists(entry.path() / "metrics.json")) {
                dirs.push_back(entry.path());
            }
        }
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<RunDirData> runs;
    runs.reserve(dirs.size());
    for (const auto& dir : dirs) runs.push_back(load_run_dir(dir));
    return runs;
}

}  // namespace skeptic::runner
