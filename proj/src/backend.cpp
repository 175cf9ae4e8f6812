#include "skeptic/backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "skeptic/digest.hpp"

namespace skeptic::backend {

std::string to_string(Role role) { return role == Role::System ? "system" : "user"; }

// --- ChatRequest -----------------------------------------------------------

void ChatRequest::validate() const {
    if (model.empty()) raise(ErrorKind::Config, "chat request: model is empty");
    bool has_user = false;
    for (const auto& message : messages) {
        if (message.content.empty()) raise(ErrorKind::Config, "chat request: empty message content");
        if (message.role == Role::User) has_user = true;
    }
    if (!has_user) raise(ErrorKind::Config, "chat request: at least one user message required");
}

Json ChatRequest::canonical_json() const {
    Json msgs = Json::array();
    for (const auto& message : messages) {
        msgs.push_back({{"role", to_string(message.role)}, {"content", message.content}});
    }
    Json j{{"model", model}, {"messages", msgs}};
    if (temperature) j["temperature"] = *temperature;
    if (reasoning_effort) j["reasoning_effort"] = *reasoning_effort;
    if (max_tokens) j["max_tokens"] = *max_tokens;
    return j;
}

std::string ChatRequest::canonical() const { return canonical_json().dump(); }

std::string ChatRequest::digest() const { return sha256_hex(canonical()); }

ChatRequest make_chat_request(const std::string& model, const std::string& user_content,
                              const Json& decoding, RequestTag tag) {
    ChatRequest request;
    request.model = model;
    request.messages.push_back({Role::User, user_content});
    request.tag = std::move(tag);
    if (decoding.contains("temperature")) {
        request.temperature = decoding.at("temperature").get<double>();
    }
    if (decoding.contains("reasoning_effort")) {
        request.reasoning_effort = decoding.at("reasoning_effort").get<std::string>();
    }
    if (decoding.contains("max_tokens")) {
        request.max_tokens = decoding.at("max_tokens").get<int>();
    }
    return request;
}

// --- ChatResponse ----------------------------------------------------------

Json ChatResponse::to_json() const {
    Json j{{"content", content}, {"model", model}, {"from_cache", from_cache}};
    if (usage) {
        j["usage"] = Json{{"prompt_tokens", usage->prompt_tokens},
                          {"completion_tokens", usage->completion_tokens},
                          {"total_tokens", usage->total_tokens}};
    }
    return j;
}

ChatResponse ChatResponse::from_json(const Json& j) {
    ChatResponse response;
    response.content = j.at("content").get<std::string>();
    response.model = j.at("model").get<std::string>();
    response.from_cache = j.value("from_cache", false);
    if (j.contains("usage")) {
        const auto& u = j.at("usage");
        response.usage = TokenUsage{u.value("prompt_tokens", std::int64_t{0}),
                                    u.value("completion_tokens", std::int64_t{0}),
                                    u.value("total_tokens", std::int64_t{0})};
    }
    return response;
}

// --- HTTP transport --------------------------------------------------------

double retry_delay_seconds(const RetryPolicy& policy, int attempt, double u01) {
    double delay = policy.base_delay_s * std::pow(policy.multiplier, attempt - 1);
    double jitter = 1.0 + policy.jitter_fraction * (2.0 * u01 - 1.0);
    return delay * jitter;
}

HttpConfig HttpConfig::from_env() {
    HttpConfig config;
    auto getenv_or = [](const char* primary, const char* fallback) -> std::string {
        if (const char* v = std::getenv(primary); v && *v) return v;
        if (fallback) {
            if (const char* v = std::getenv(fallback); v && *v) return v;
        }
        return {};
    };
    config.base_url = getenv_or("SKEPTIC_API_BASE", "OPENAI_BASE_URL");
    config.api_key = getenv_or("SKEPTIC_API_KEY", "OPENAI_API_KEY");
    return config;
}

Json chat_completion_body(const ChatRequest& request) {
    Json msgs = Json::array();
    for (const auto& message : request.messages) {
        msgs.push_back({{"role", to_string(message.role)}, {"content", message.content}});
    }
    Json body{{"model", request.model}, {"messages", msgs}};
    if (request.temperature) body["temperature"] = *request.temperature;
    if (request.reasoning_effort) body["reasoning_effort"] = *request.reasoning_effort;
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
    return body;
}

ChatResponse parse_chat_completion(const Json& body, const std::string& fallback_model) {
    if (!body.contains("choices") || !body.at("choices").is_array() ||
        body.at("choices").empty()) {
        raise(ErrorKind::MalformedResponse, "response has no choices");
    }
    const auto& message = body.at("choices").at(0).value("message", Json::object());
    if (!message.contains("content") || !message.at("content").is_string()) {
        raise(ErrorKind::MalformedResponse, "response has no content field");
    }
    ChatResponse response;
    response.content = message.at("content").get<std::string>();
    response.model = body.value("model", fallback_model);
    if (body.contains("usage") && body.at("usage").is_object()) {
        const auto& u = body.at("usage");
        response.usage = TokenUsage{u.value("prompt_tokens", std::int64_t{0}),
                                    u.value("completion_tokens", std::int64_t{0}),
                                    u.value("total_tokens", std::int64_t{0})};
    }
    return response;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        raise(ErrorKind::Config, "no API base URL configured (set SKEPTIC_API_BASE)");
    }
    static const std::regex url_regex(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch match;
    if (!std::regex_match(config_.base_url, match, url_regex)) {
        raise(ErrorKind::Config, "cannot parse base URL '" + config_.base_url + "'");
    }
    origin_ = match[1].str();
    path_prefix_ = match[2].matched ? match[2].str() : "";
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    request.validate();
    const std::string body = chat_completion_body(request).dump();
    const std::string endpoint = path_prefix_ + "/chat/completions";

    httplib::Headers headers{{"Content-Type", "application/json"}};
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::string last_failure = "no attempt made";
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        if (attempt > 1) {
            double delay = retry_delay_seconds(config_.retry, attempt - 1, u01(rng));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        // One client per call: httplib clients are not safe to share
        // across the worker threads that drive batch_complete.
        httplib::Client client(origin_);
        client.set_connection_timeout(config_.timeout_s);
        client.set_read_timeout(config_.timeout_s);
        client.set_write_timeout(config_.timeout_s);

        auto result = client.Post(endpoint, headers, body, "application/json");
        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        const int status = result->status;
        if (status == 200) {
            Json parsed;
            try {
                parsed = Json::parse(result->body);
            } catch (const Json::parse_error& e) {
                raise(ErrorKind::MalformedResponse, std::string("bad JSON body: ") + e.what());
            }
            return parse_chat_completion(parsed, request.model);
        }
        if (status == 401 || status == 403) {
            raise(ErrorKind::Auth, "HTTP " + std::to_string(status) + ": " + result->body);
        }
        if (status == 429 || status >= 500) {
            last_failure = "HTTP " + std::to_string(status);
            continue;
        }
        raise(ErrorKind::Config, "HTTP " + std::to_string(status) + ": " + result->body);
    }
    raise(ErrorKind::ExhaustedRetries,
          "gave up after " + std::to_string(config_.retry.max_attempts) +
              " attempts (last: " + last_failure + ")");
}

// --- Mock ------------------------------------------------------------------

MockScript MockScript::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open mock script " + path.string());
    Json script;
    try {
        in >> script;
    } catch (const Json::parse_error& e) {
        raise(ErrorKind::Io, "mock script " + path.string() + ": " + e.what());
    }
    return from_json(script);
}

MockScript MockScript::from_json(const Json& script) {
    MockScript out;
    auto parse_entry = [](const Json& value) {
        Entry entry;
        if (value.is_string()) {
            entry.response = value.get<std::string>();
        } else if (value.is_object()) {
            if (value.contains("response")) entry.response = value.at("response").get<std::string>();
            if (value.contains("error")) entry.error = value.at("error").get<std::string>();
        }
        if (!entry.response && !entry.error) {
            raise(ErrorKind::Config, "mock script entry needs a response or an error");
        }
        return entry;
    };
    if (script.contains("responses")) {
        for (const auto& [digest, value] : script.at("responses").items()) {
            out.by_digest[digest] = parse_entry(value);
        }
    }
    if (script.contains("fallbacks")) {
        for (const auto& fallback : script.at("fallbacks")) {
            out.fallbacks.push_back(Fallback{fallback.at("template").get<std::string>(),
                                             fallback.at("instance").get<std::string>(),
                                             parse_entry(fallback)});
        }
    }
    return out;
}

ChatResponse MockBackend::serve(const MockScript::Entry& entry, const ChatRequest& request) {
    if (entry.error) raise(ErrorKind::ScriptedFailure, *entry.error);
    ChatResponse response;
    response.content = *entry.response;
    response.model = request.model;
    return response;
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
    request.validate();
    calls_.fetch_add(1);
    {
        std::lock_guard lock(mutex_);
        calls_by_template_[request.tag.template_id] += 1;
        log_.push_back(request);
    }
    const std::string key = request.digest();
    if (auto it = script_.by_digest.find(key); it != script_.by_digest.end()) {
        return serve(it->second, request);
    }
    for (const auto& fallback : script_.fallbacks) {
        if (fallback.template_id == request.tag.template_id &&
            fallback.instance_id == request.tag.instance_id) {
            return serve(fallback.entry, request);
        }
    }
    raise(ErrorKind::MockMiss, "no script entry for digest " + key + " (template=" +
                                   request.tag.template_id + ", instance=" +
                                   request.tag.instance_id + ")");
}

std::int64_t MockBackend::call_count(const std::string& template_id) const {
    std::lock_guard lock(mutex_);
    auto it = calls_by_template_.find(template_id);
    return it == calls_by_template_.end() ? 0 : it->second;
}

std::vector<ChatRequest> MockBackend::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

// --- Cache -----------------------------------------------------------------

Json CacheEntry::to_json() const {
    return Json{{"key", key}, {"response", response.to_json()}, {"created_at", created_at_unix}};
}

CacheEntry CacheEntry::from_json(const Json& j) {
    CacheEntry entry;
    entry.key = j.at("key").get<std::string>();
    entry.response = ChatResponse::from_json(j.at("response"));
    entry.created_at_unix = j.at("created_at").get<std::int64_t>();
    return entry;
}

CacheStore::CacheStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path CacheStore::entry_path(const std::string& key) const {
    return dir_ / (key + ".json");
}

std::optional<ChatResponse> CacheStore::lookup(const std::string& key) {
    const auto path = entry_path(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        Json j;
        in >> j;
        auto entry = CacheEntry::from_json(j);
        if (entry.key != key) raise(ErrorKind::CacheCorrupt, "key mismatch in " + path.string());
        entry.response.from_cache = true;
        return entry.response;
    } catch (const std::exception& e) {
        std::cerr << "[skeptic] cache entry " << path.string()
                  << " is unreadable, treating as miss: " << e.what() << "\n";
        return std::nullopt;
    }
}

void CacheStore::store(const std::string& key, const ChatResponse& response) {
    CacheEntry entry;
    entry.key = key;
    entry.response = response;
    entry.response.from_cache = false;
    entry.created_at_unix = static_cast<std::int64_t>(std::time(nullptr));

    std::lock_guard lock(write_mutex_);
    const auto path = entry_path(key);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorKind::Io, "cannot write cache entry " + tmp);
        out << entry.to_json().dump() << "\n";
    }
    std::filesystem::rename(tmp, path);
}

ChatResponse complete_cached(Backend& backend, const ChatRequest& request, CacheStore& cache) {
    const std::string key = request.digest();
    if (auto hit = cache.lookup(key)) return *hit;
    auto response = backend.complete(request);
    cache.store(key, response);
    return response;
}

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<CacheStore> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

ChatResponse CachingBackend::complete(const ChatRequest& request) {
    if (!cache_) return inner_->complete(request);
    return complete_cached(*inner_, request, *cache_);
}

ChatResponse CachingBackend::complete_fresh(const ChatRequest& request) {
    auto response = inner_->complete(request);
    if (cache_) cache_->store(request.digest(), response);
    return response;
}

// --- Batch execution -------------------------------------------------------

std::vector<CompletionOutcome> batch_complete(Backend& backend,
                                              const std::vector<ChatRequest>& requests,
                                              int limit) {
    if (limit < 1) raise(ErrorKind::Config, "batch_complete: limit must be >= 1");
    std::vector<CompletionOutcome> outcomes(requests.size());
    if (requests.empty()) return outcomes;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) break;
            try {
                outcomes[i].response = backend.complete(requests[i]);
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(limit),
                                                      requests.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
    return outcomes;
}

}  // namespace skeptic::backend
