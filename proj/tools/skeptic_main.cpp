// skeptic: claim verification through presupposition-free question
// decomposition. Subcommands cover single runs, experiment grids, question
// coverage judging, report rendering and dataset utilities.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "skeptic/backend.hpp"
#include "skeptic/datasets.hpp"
#include "skeptic/metrics.hpp"
#include "skeptic/prompts.hpp"
#include "skeptic/runner.hpp"

namespace fs = std::filesystem;
using namespace skeptic;

namespace {

struct DatasetArgs {
    std::string path;
    std::string manifest_path;
    std::string scheme = "binary";
    std::vector<std::int64_t> expect;  // n, supported, refuted

    void attach(CLI::App* cmd, bool required = true) {
        auto* p = cmd->add_option("--dataset", path, "normalized JSONL dataset");
        cmd->add_option("--dataset-manifest", manifest_path,
                        "dataset manifest JSON (alternative to --dataset)");
        cmd->add_option("--label-scheme", scheme, "binary | wice3")->capture_default_str();
        cmd->add_option("--expect", expect, "expected counts: N SUPPORTED REFUTED")
            ->expected(3);
        if (required) p->check(CLI::ExistingFile);
    }

    datasets::DatasetManifest manifest() const {
        if (!manifest_path.empty()) {
            std::ifstream in(manifest_path);
            if (!in) raise(ErrorKind::Io, "cannot open dataset manifest " + manifest_path);
            Json j;
            in >> j;
            return datasets::DatasetManifest::from_json(j);
        }
        if (path.empty()) raise(ErrorKind::Config, "--dataset or --dataset-manifest is required");
        datasets::DatasetManifest manifest;
        manifest.name = fs::path(path).filename().string();
        manifest.path = path;
        manifest.label_scheme = datasets::parse_label_scheme(scheme);
        if (!expect.empty()) {
            manifest.expected_counts = datasets::ExpectedCounts{expect[0], expect[1], expect[2]};
        }
        return manifest;
    }
};

struct BackendArgs {
    std::string mock_script;
    std::string cache_dir;
    bool no_cache = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mock", mock_script, "mock script JSON; no network traffic")
            ->check(CLI::ExistingFile);
        cmd->add_option("--cache-dir", cache_dir, "response cache directory");
        cmd->add_flag("--no-cache", no_cache, "disable the response cache");
    }

    std::shared_ptr<backend::Backend> transport() const {
        if (!mock_script.empty()) {
            return std::make_shared<backend::MockBackend>(
                backend::MockScript::from_file(mock_script));
        }
        return std::make_shared<backend::HttpBackend>(backend::HttpConfig::from_env());
    }

    runner::EngineOptions engine_options(const fs::path& out_root) const {
        runner::EngineOptions options;
        if (!no_cache) {
            options.cache_dir = cache_dir.empty() ? out_root / "cache" : fs::path(cache_dir);
        }
        return options;
    }
};

struct RunArgs {
    DatasetArgs dataset;
    BackendArgs backend;
    std::string mode = "only";
    std::string prompt = "sg1";
    std::string model;
    std::string decomposer_model;
    int runs = 1;
    int run_index = 0;
    std::int64_t seed = 0;
    int concurrency = 1;
    std::string out_dir = "out";
    std::string prompt_dir;
    std::optional<double> temperature;
    std::string reasoning_effort;
    std::optional<int> max_tokens;

    void attach(CLI::App* cmd) {
        dataset.attach(cmd, false);
        backend.attach(cmd);
        cmd->add_option("--mode", mode, "only | decomp | depresup")->capture_default_str();
        cmd->add_option("--prompt", prompt, "sg1 | sg2 | minicheck")->capture_default_str();
        cmd->add_option("--model", model, "reasoner model name")->required();
        cmd->add_option("--decomposer-model", decomposer_model,
                        "question decomposer model (defaults to --model)");
        cmd->add_option("--runs", runs, "number of run indices to execute")
            ->capture_default_str();
        cmd->add_option("--run-index", run_index, "first run index")->capture_default_str();
        cmd->add_option("--seed", seed, "experiment seed, recorded in the manifest")
            ->capture_default_str();
        cmd->add_option("--concurrency", concurrency, "max in-flight backend requests")
            ->capture_default_str();
        cmd->add_option("--out", out_dir, "output root directory")->capture_default_str();
        cmd->add_option("--prompt-dir", prompt_dir, "prompt asset directory override");
        cmd->add_option("--temperature", temperature, "sampling temperature (omitted by default)");
        cmd->add_option("--reasoning-effort", reasoning_effort, "low | medium | high");
        cmd->add_option("--max-tokens", max_tokens, "completion token cap");
    }

    RunMode run_mode() const {
        if (mode == "only") return RunMode::OnlyReasoner;
        if (mode == "decomp") return RunMode::Decomp;
        if (mode == "depresup") return RunMode::DecompDepresup;
        raise(ErrorKind::Config, "unknown --mode '" + mode + "'");
    }

    PromptVariant prompt_variant() const {
        if (prompt == "sg1") return PromptVariant::Sg1;
        if (prompt == "sg2") return PromptVariant::Sg2;
        if (prompt == "minicheck") return PromptVariant::MiniCheck;
        raise(ErrorKind::Config, "unknown --prompt '" + prompt + "'");
    }

    Json decoding() const {
        Json j = Json::object();
        if (temperature) j["temperature"] = *temperature;
        if (!reasoning_effort.empty()) j["reasoning_effort"] = reasoning_effort;
        if (max_tokens) j["max_tokens"] = *max_tokens;
        return j;
    }

    RunManifest manifest(int index) const {
        RunManifest m;
        m.dataset_path = dataset.manifest().path.string();
        m.mode = run_mode();
        m.prompt_variant = prompt_variant();
        m.reasoner_model = model;
        if (m.mode != RunMode::OnlyReasoner) {
            m.decomposer_model = decomposer_model.empty() ? model : decomposer_model;
        }
        m.decoding = decoding();
        m.run_index = index;
        m.seed = seed;
        m.concurrency_limit = concurrency;
        return m;
    }

    prompts::Registry registry() const {
        return prompt_dir.empty() ? prompts::Registry() : prompts::Registry(prompt_dir);
    }
};

void print_report(const metrics::MetricsReport& report) {
    std::cout << "  n=" << report.n << "  bacc=" << report.bacc * 100.0
              << "  supported=" << report.supported_acc * 100.0
              << "  refuted=" << report.refuted_acc * 100.0
              << "  failed_parses=" << report.failed_parses << "\n";
}

int cmd_run(const RunArgs& args, const std::vector<std::string>& prompts_list,
            const std::vector<std::string>& modes_list) {
    const auto instances = datasets::load(args.dataset.manifest());
    const auto registry = args.registry();
    const fs::path out_root = args.out_dir;
    fs::create_directories(out_root);
    runner::Engine engine(registry, args.backend.transport(),
                          args.backend.engine_options(out_root));

    auto prompts_to_run = prompts_list.empty() ? std::vector<std::string>{args.prompt}
                                               : prompts_list;
    auto modes_to_run = modes_list.empty() ? std::vector<std::string>{args.mode} : modes_list;

    for (const auto& mode : modes_to_run) {
        for (const auto& prompt : prompts_to_run) {
            for (int i = args.run_index; i < args.run_index + args.runs; ++i) {
                RunArgs cell = args;
                cell.mode = mode;
                cell.prompt = prompt;
                const auto manifest = cell.manifest(i);
                std::cout << "run " << to_string(manifest.prompt_variant) << " "
                          << to_string(manifest.mode) << " run_index=" << i << "\n";
                auto result = engine.run(manifest, instances, out_root);
                std::cout << "  -> " << result.run_dir.string()
                          << " (resumed " << result.resumed << ")\n";
                print_report(result.report);
            }
        }
    }

    auto rows = runner::grid_rows(runner::discover_run_dirs(out_root));
    runner::write_reports(out_root, rows);
    std::cout << "reports written to " << (out_root / "report.md").string() << "\n";
    return 0;
}

int cmd_report(const std::string& out_dir, bool verify) {
    const fs::path out_root = out_dir;
    auto rows = runner::grid_rows(runner::discover_run_dirs(out_root));
    runner::write_reports(out_root, rows);
    std::cout << runner::render_detail_markdown(rows) << "\n"
              << runner::render_comparison_markdown(rows);
    if (verify) {
        auto mismatches = runner::verify_reports(out_root);
        if (!mismatches.empty()) {
            for (const auto& mismatch : mismatches) std::cerr << "MISMATCH: " << mismatch << "\n";
            return 1;
        }
        std::cout << "verify: all table cells match the raw records\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"claim verification through presupposition-free question decomposition"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file");

    // run
    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "execute one (dataset, mode, prompt) configuration");
    run_args.attach(run_cmd);

    // grid
    RunArgs grid_args;
    std::vector<std::string> grid_prompts{"sg1", "sg2", "minicheck"};
    std::vector<std::string> grid_modes{"only", "decomp", "depresup"};
    auto* grid_cmd = app.add_subcommand("grid", "run a mode x prompt x run_index grid");
    grid_args.attach(grid_cmd);
    grid_cmd->add_option("--prompts", grid_prompts, "prompt variants to sweep")
        ->delimiter(',')
        ->capture_default_str();
    grid_cmd->add_option("--modes", grid_modes, "run modes to sweep")
        ->delimiter(',')
        ->capture_default_str();

    // coverage
    DatasetArgs coverage_dataset;
    BackendArgs coverage_backend;
    std::vector<std::string> questionset_dirs;
    std::string judge_model;
    std::string coverage_out = "out";
    std::string coverage_prompt_dir;
    int coverage_concurrency = 1;
    auto* coverage_cmd =
        app.add_subcommand("coverage", "judge question coverage against gold subclaims");
    coverage_dataset.attach(coverage_cmd, false);
    coverage_backend.attach(coverage_cmd);
    coverage_cmd->add_option("--questionsets", questionset_dirs,
                             "question-set directories, one per generation run")
        ->delimiter(',')
        ->required();
    coverage_cmd->add_option("--judge-model", judge_model, "LLM judge model")->required();
    coverage_cmd->add_option("--out", coverage_out, "output root")->capture_default_str();
    coverage_cmd->add_option("--prompt-dir", coverage_prompt_dir, "prompt asset directory");
    coverage_cmd->add_option("--concurrency", coverage_concurrency, "judge request concurrency")
        ->capture_default_str();

    // report
    std::string report_out = "out";
    bool report_verify = false;
    auto* report_cmd = app.add_subcommand("report", "render (and optionally verify) reports");
    report_cmd->add_option("--out", report_out, "output root")->capture_default_str();
    report_cmd->add_flag("--verify", report_verify,
                         "recompute every cell from raw records and compare");

    // dataset stats | sample
    auto* dataset_cmd = app.add_subcommand("dataset", "dataset utilities");
    dataset_cmd->require_subcommand(1);
    DatasetArgs stats_dataset;
    auto* stats_cmd = dataset_cmd->add_subcommand("stats", "print dataset statistics");
    stats_dataset.attach(stats_cmd);

    DatasetArgs sample_dataset;
    std::size_t per_class = 150;
    std::uint64_t sample_seed = 0;
    std::string sample_output;
    auto* sample_cmd =
        dataset_cmd->add_subcommand("sample", "write a seeded balanced subsample");
    sample_dataset.attach(sample_cmd);
    sample_cmd->add_option("--per-class", per_class, "instances per class")
        ->capture_default_str();
    sample_cmd->add_option("--seed", sample_seed, "sampling seed")->capture_default_str();
    sample_cmd->add_option("--output", sample_output, "output JSONL path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run_args, {}, {});
        if (*grid_cmd) return cmd_run(grid_args, grid_prompts, grid_modes);
        if (*coverage_cmd) {
            const auto instances = datasets::load(coverage_dataset.manifest());
            const auto registry = coverage_prompt_dir.empty()
                                      ? prompts::Registry()
                                      : prompts::Registry(coverage_prompt_dir);
            auto transport = coverage_backend.transport();
            metrics::JudgeConfig judge{judge_model, Json::object(), coverage_concurrency};
            std::vector<fs::path> dirs(questionset_dirs.begin(), questionset_dirs.end());
            auto result = runner::coverage_eval(instances, dirs, *transport, judge, registry);
            const auto table = runner::render_coverage_markdown(judge_model, result);
            std::cout << table;
            fs::create_directories(coverage_out);
            std::ofstream out(fs::path(coverage_out) / "coverage.md",
                              std::ios::binary | std::ios::trunc);
            out << table;
            return 0;
        }
        if (*report_cmd) return cmd_report(report_out, report_verify);
        if (*stats_cmd) {
            const auto instances = datasets::load(stats_dataset.manifest());
            const auto s = datasets::stats(instances);
            std::cout << "samples " << s.n << "\nsupported " << s.supported << "\nrefuted "
                      << s.refuted << "\nmean claim words " << s.mean_claim_words
                      << "\nmean evidence words " << s.mean_evidence_words << "\n";
            return 0;
        }
        if (*sample_cmd) {
            const auto instances = datasets::load(sample_dataset.manifest());
            const auto sampled = datasets::balanced_subsample(instances, per_class, sample_seed);
            datasets::save_jsonl(sampled, sample_output);
            std::cout << "wrote " << sampled.size() << " instances to " << sample_output << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
