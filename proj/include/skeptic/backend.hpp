#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "skeptic/core.hpp"

namespace skeptic::backend {

enum class Role {
    System,
    User,
};

std::string to_string(Role role);

struct Message {
    Role role = Role::User;
    std::string content;
};

/// Routing metadata for mock scripts and logs. Not part of the wire
/// request and not part of the cache key.
struct RequestTag {
    std::string template_id;
    std::string instance_id;
};

struct ChatRequest {
    std::string model;
    std::vector<Message> messages;
    std::optional<double> temperature;
    std::optional<std::string> reasoning_effort;  // low | medium | high
    std::optional<int> max_tokens;
    RequestTag tag;

    void validate() const;
    Json canonical_json() const;
    std::string canonical() const;
    /// Cache key; a pure function of the wire-visible fields.
    std::string digest() const;
};

/// Single-user-message request with decoding parameters taken from a
/// manifest decoding map (temperature / reasoning_effort / max_tokens).
ChatRequest make_chat_request(const std::string& model, const std::string& user_content,
                              const Json& decoding, RequestTag tag = {});

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t total_tokens = 0;
};

struct ChatResponse {
    std::string content;  // exactly as returned; no trimming before parse stage
    std::string model;
    std::optional<TokenUsage> usage;
    bool from_cache = false;

    Json to_json() const;
    static ChatResponse from_json(const Json& j);
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_s = 1.0;
    double multiplier = 2.0;
    double jitter_fraction = 0.25;
};

/// Backoff delay for `attempt` (1-based); u01 in [0,1) supplies the jitter.
double retry_delay_seconds(const RetryPolicy& policy, int attempt, double u01);

struct HttpConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1
    std::string api_key;
    int timeout_s = 300;
    RetryPolicy retry;

    /// SKEPTIC_API_BASE / SKEPTIC_API_KEY, falling back to
    /// OPENAI_BASE_URL / OPENAI_API_KEY.
    static HttpConfig from_env();
};

/// Extracts choices[0].message.content (and usage) from a chat-completions
/// response body. Throws MalformedResponse when no content is present.
ChatResponse parse_chat_completion(const Json& body, const std::string& fallback_model);

/// Wire JSON for an OpenAI-compatible /chat/completions POST.
Json chat_completion_body(const ChatRequest& request);

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpConfig config);
    ChatResponse complete(const ChatRequest& request) override;

private:
    HttpConfig config_;
    std::string origin_;       // scheme://host[:port]
    std::string path_prefix_;  // e.g. /v1
};

/// Mock script contents. JSON format:
///
///   {
///     "responses": { "<request digest>": "text" | {"response": "..."} | {"error": "..."} },
///     "fallbacks": [ {"template": "...", "instance": "...", "response": "..." | "error": "..."} ]
///   }
struct MockScript {
    struct Entry {
        std::optional<std::string> response;
        std::optional<std::string> error;
    };
    struct Fallback {
        std::string template_id;
        std::string instance_id;
        Entry entry;
    };

    std::map<std::string, Entry> by_digest;
    std::vector<Fallback> fallbacks;

    static MockScript from_file(const std::filesystem::path& path);
    static MockScript from_json(const Json& script);
};

/// Deterministic scripted backend. Lookup order: request digest, then the
/// (template, instance) fallback list, then MockMiss naming the digest.
class MockBackend : public Backend {
public:
    explicit MockBackend(MockScript script) : script_(std::move(script)) {}

    ChatResponse complete(const ChatRequest& request) override;

    std::int64_t call_count() const { return calls_.load(); }
    std::int64_t call_count(const std::string& template_id) const;
    std::vector<ChatRequest> requests() const;

private:
    ChatResponse serve(const MockScript::Entry& entry, const ChatRequest& request);

    MockScript script_;
    std::atomic<std::int64_t> calls_{0};
    mutable std::mutex mutex_;
    std::map<std::string, std::int64_t> calls_by_template_;
    std::vector<ChatRequest> log_;
};

struct CacheEntry {
    std::string key;
    ChatResponse response;
    std::int64_t created_at_unix = 0;

    Json to_json() const;
    static CacheEntry from_json(const Json& j);
};

/// Append-only directory of one file per entry, keyed by request digest.
/// Writes go through a temp file + rename so interrupted runs never leave
/// a half-written entry.
class CacheStore {
public:
    explicit CacheStore(std::filesystem::path dir);

    std::optional<ChatResponse> lookup(const std::string& key);
    void store(const std::string& key, const ChatResponse& response);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;

    std::filesystem::path dir_;
    std::mutex write_mutex_;
};

/// Cache hit short-circuits the backend; miss delegates and stores.
ChatResponse complete_cached(Backend& backend, const ChatRequest& request, CacheStore& cache);

/// Backend wrapper adding read-through caching. `cache` may be null, in
/// which case calls pass straight through (complete_fresh still works).
class CachingBackend : public Backend {
public:
    CachingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<CacheStore> cache);

    ChatResponse complete(const ChatRequest& request) override;
    /// Bypasses the cache read (re-ask); refreshes the stored entry.
    ChatResponse complete_fresh(const ChatRequest& request);

    Backend& inner() { return *inner_; }

private:
    std::shared_ptr<Backend> inner_;
    std::shared_ptr<CacheStore> cache_;
};

struct CompletionOutcome {
    std::optional<ChatResponse> response;
    std::optional<std::string> error;

    bool ok() const { return response.has_value(); }
};

/// Runs requests with at most `limit` in flight. Output order equals input
/// order; per-item failures are captured positionally, never fail-fast.
std::vector<CompletionOutcome> batch_complete(Backend& backend,
                                              const std::vector<ChatRequest>& requests, int limit);

}  // namespace skeptic::backend
