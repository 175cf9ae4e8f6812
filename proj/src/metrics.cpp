#include "skeptic/metrics.hpp"

#include <cctype>
#include <cmath>

namespace skeptic::metrics {

Json ConfusionCounts::to_json() const {
    return Json{{"tp", tp}, {"fn", fn}, {"tn", tn}, {"fp", fp}};
}

ConfusionCounts ConfusionCounts::from_json(const Json& j) {
    return ConfusionCounts{j.at("tp").get<std::int64_t>(), j.at("fn").get<std::int64_t>(),
                           j.at("tn").get<std::int64_t>(), j.at("fp").get<std::int64_t>()};
}

Json MetricsReport::to_json() const {
    return Json{{"bacc", bacc},
                {"supported_acc", supported_acc},
                {"refuted_acc", refuted_acc},
                {"n", n},
                {"failed_parses", failed_parses},
                {"confusion", confusion.to_json()}};
}

MetricsReport MetricsReport::from_json(const Json& j) {
    MetricsReport report;
    report.bacc = j.at("bacc").get<double>();
    report.supported_acc = j.at("supported_acc").get<double>();
    report.refuted_acc = j.at("refuted_acc").get<double>();
    report.n = j.at("n").get<std::int64_t>();
    report.failed_parses = j.at("failed_parses").get<std::int64_t>();
    report.confusion = ConfusionCounts::from_json(j.at("confusion"));
    return report;
}

double combine_class_accuracies(double supported_acc, double refuted_acc) {
    return (supported_acc + refuted_acc) / 2.0;
}

MetricsReport balanced_accuracy(const std::vector<std::optional<Label>>& preds,
                                const std::vector<Label>& golds) {
    if (preds.size() != golds.size()) {
        raise(ErrorKind::LengthMismatch, "preds " + std::to_string(preds.size()) + " vs golds " +
                                             std::to_string(golds.size()));
    }
    MetricsReport report;
    report.n = static_cast<std::int64_t>(golds.size());
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const bool correct = preds[i].has_value() && *preds[i] == golds[i];
        if (!preds[i].has_value()) report.failed_parses += 1;
        if (golds[i] == Label::Supported) {
            correct ? ++report.confusion.tp : ++report.confusion.fn;
        } else {
            correct ? ++report.confusion.tn : ++report.confusion.fp;
        }
    }
    const auto positives = report.confusion.tp + report.confusion.fn;
    const auto negatives = report.confusion.tn + report.confusion.fp;
    if (positives == 0 || negatives == 0) {
        raise(ErrorKind::SingleClassDataset, "need at least one gold of each class");
    }
    report.supported_acc = static_cast<double>(report.confusion.tp) / static_cast<double>(positives);
    report.refuted_acc = static_cast<double>(report.confusion.tn) / static_cast<double>(negatives);
    report.bacc = combine_class_accuracies(report.supported_acc, report.refuted_acc);
    return report;
}

double population_std(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return std::sqrt(sq / static_cast<double>(values.size()));
}

Json AggregateReport::to_json() const {
    auto stats_json = [](const MetricsStats& s) {
        return Json{{"bacc", s.bacc},
                    {"supported_acc", s.supported_acc},
                    {"refuted_acc", s.refuted_acc},
                    {"n", s.n},
                    {"failed_parses", s.failed_parses}};
    };
    return Json{{"mean", stats_json(mean)}, {"std", stats_json(std)}, {"runs", runs}};
}

AggregateReport aggregate(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) raise(ErrorKind::EmptyList, "aggregate: no reports");
    for (const auto& report : reports) {
        if (report.n != reports.front().n) {
            raise(ErrorKind::InconsistentGrid, "aggregate: reports cover different n");
        }
    }

    AggregateReport out;
    out.runs = static_cast<int>(reports.size());
    auto field = [&](auto getter) {
        std::vector<double> values;
        values.reserve(reports.size());
        for (const auto& report : reports) values.push_back(getter(report));
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        return std::pair<double, double>{mean, population_std(values)};
    };

    std::tie(out.mean.bacc, out.std.bacc) = field([](const auto& r) { return r.bacc; });
    std::tie(out.mean.supported_acc, out.std.supported_acc) =
        field([](const auto& r) { return r.supported_acc; });
    std::tie(out.mean.refuted_acc, out.std.refuted_acc) =
        field([](const auto& r) { return r.refuted_acc; });
    std::tie(out.mean.n, out.std.n) =
        field([](const auto& r) { return static_cast<double>(r.n); });
    std::tie(out.mean.failed_parses, out.std.failed_parses) =
        field([](const auto& r) { return static_cast<double>(r.failed_parses); });
    return out;
}

std::optional<CoverageAnswer> parse_coverage_answer(const std::string& raw) {
    static constexpr std::string_view kMarker = "answer:";
    std::size_t last = std::string::npos;
    for (std::size_t pos = 0; pos + kMarker.size() <= raw.size(); ++pos) {
        bool match = true;
        for (std::size_t i = 0; i < kMarker.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(raw[pos + i])) != kMarker[i]) {
                match = false;
                break;
            }
        }
        if (match) last = pos;
    }
    if (last == std::string::npos) return std::nullopt;

    std::size_t cursor = last + kMarker.size();
    while (cursor < raw.size() && !std::isalpha(static_cast<unsigned char>(raw[cursor]))) ++cursor;
    std::string token;
    while (cursor < raw.size() && std::isalpha(static_cast<unsigned char>(raw[cursor]))) {
        token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[cursor]))));
        ++cursor;
    }
    if (token == "yes") return CoverageAnswer::Yes;
    if (token == "no") return CoverageAnswer::No;
    return std::nullopt;
}

CoverageResult coverage(const std::vector<std::string>& subclaims,
                        const std::vector<std::string>& questions, const std::string& evidence,
                        backend::Backend& backend, const JudgeConfig& judge,
                        const prompts::Registry& registry, const std::string& instance_id) {
    if (subclaims.empty()) raise(ErrorKind::EmptyList, "coverage: no subclaims");
    if (questions.empty()) raise(ErrorKind::EmptyQuestionList, "coverage: no questions");

    const std::string question_block = prompts::format_questions(questions);
    std::vector<backend::ChatRequest> requests;
    requests.reserve(subclaims.size());
    for (std::size_t i = 0; i < subclaims.size(); ++i) {
        const std::string prompt = registry.render(
            prompts::TemplateId::CoverageJudge,
            {{"claim", subclaims[i]}, {"evidence", evidence}, {"questions", question_block}});
        const std::string sub_id =
            instance_id.empty() ? instance_id : instance_id + "#s" + std::to_string(i);
        requests.push_back(backend::make_chat_request(
            judge.model, prompt, judge.decoding,
            {to_string(prompts::TemplateId::CoverageJudge), sub_id}));
    }

    auto outcomes = backend::batch_complete(backend, requests, judge.concurrency);

    CoverageResult result;
    result.verdicts.reserve(subclaims.size());
    for (std::size_t i = 0; i < subclaims.size(); ++i) {
        SubclaimVerdict verdict;
        verdict.subclaim = subclaims[i];
        if (outcomes[i].ok()) {
            verdict.raw = outcomes[i].response->content;
            auto answer = parse_coverage_answer(verdict.raw);
            if (!answer) {
                verdict.flagged = true;
            } else {
                verdict.covered = *answer == CoverageAnswer::Yes;
            }
        } else {
            verdict.raw = *outcomes[i].error;
            verdict.flagged = true;
        }
        if (verdict.covered) result.yes += 1;
        result.verdicts.push_back(std::move(verdict));
    }
    result.coverage = static_cast<double>(result.yes) / static_cast<double>(subclaims.size());
    return result;
}

}  // namespace skeptic::metrics
