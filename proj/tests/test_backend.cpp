#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "httplib.h"

#include "skeptic/backend.hpp"

using namespace skeptic;
using namespace skeptic::backend;

namespace {

namespace fs = std::filesystem;

ChatRequest ping_request() {
    ChatRequest request;
    request.model = "mock-model";
    request.messages = {{Role::User, "ping"}};
    return request;
}

MockScript pong_script() {
    Json script{{"responses", Json{{ping_request().digest(), "pong"}}}};
    return MockScript::from_json(script);
}

fs::path fresh_temp_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("mock serves scripted responses by digest") {
    MockBackend mock(pong_script());
    auto response = mock.complete(ping_request());
    CHECK(response.content == "pong");
    CHECK(response.model == "mock-model");
    CHECK_FALSE(response.from_cache);
    CHECK(mock.call_count() == 1);
}

TEST_CASE("mock falls back to (template, instance) matching") {
    Json script{{"fallbacks", Json::array({Json{{"template", "REASONER_SG1"},
                                                {"instance", "wice-007"},
                                                {"response", "fallback text"}}})}};
    MockBackend mock(MockScript::from_json(script));

    auto request = ping_request();
    request.tag = {"REASONER_SG1", "wice-007"};
    CHECK(mock.complete(request).content == "fallback text");

    request.tag = {"REASONER_SG1", "wice-008"};
    CHECK_THROWS_AS(mock.complete(request), Error);
}

TEST_CASE("mock miss names the request digest") {
    MockBackend mock(MockScript{});
    const auto request = ping_request();
    try {
        mock.complete(request);
        FAIL("expected MockMiss");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MockMiss);
        CHECK(std::string(e.what()).find(request.digest()) != std::string::npos);
    }
}

TEST_CASE("mock entries can script failures") {
    Json script{{"responses", Json{{ping_request().digest(), Json{{"error", "boom"}}}}}};
    MockBackend mock(MockScript::from_json(script));
    try {
        mock.complete(ping_request());
        FAIL("expected ScriptedFailure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ScriptedFailure);
        CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
}

TEST_CASE("request digest keys on exactly the wire-visible fields") {
    auto base = ping_request();
    const auto base_digest = base.digest();

    // Tags never perturb the key.
    auto tagged = base;
    tagged.tag = {"REASONER_SG1", "x"};
    CHECK(tagged.digest() == base_digest);

    // Every wire field does, one perturbation at a time.
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
        auto perturbed = base;
        switch (rng() % 6) {
            case 0: perturbed.model += "x"; break;
            case 1: perturbed.messages[0].content += "!"; break;
            case 2: perturbed.messages.insert(perturbed.messages.begin(),
                                              {Role::System, "sys"}); break;
            case 3: perturbed.temperature = 0.25 * static_cast<double>(1 + rng() % 4); break;
            case 4: perturbed.reasoning_effort = (rng() % 2) ? "high" : "low"; break;
            case 5: perturbed.max_tokens = static_cast<int>(1 + rng() % 4096); break;
        }
        CHECK(perturbed.digest() != base_digest);
        CHECK(perturbed.digest() == perturbed.digest());
        // Key equality iff canonical equality.
        CHECK((perturbed.canonical() == base.canonical()) ==
              (perturbed.digest() == base_digest));
    }
}

TEST_CASE("make_chat_request pulls decoding parameters from the manifest map") {
    Json decoding{{"temperature", 0.6}, {"reasoning_effort", "high"}, {"max_tokens", 2048}};
    auto request = make_chat_request("m", "hello", decoding, {"T", "i"});
    CHECK(request.temperature == 0.6);
    CHECK(request.reasoning_effort == "high");
    CHECK(request.max_tokens == 2048);
    CHECK(request.tag.template_id == "T");

    auto bare = make_chat_request("m", "hello", Json::object());
    CHECK_FALSE(bare.temperature.has_value());
    CHECK_FALSE(bare.reasoning_effort.has_value());
    CHECK_FALSE(bare.max_tokens.has_value());
    // Omitted decoding fields stay off the wire (provider defaults).
    CHECK_FALSE(chat_completion_body(bare).contains("temperature"));
}

TEST_CASE("cache returns byte-identical content and marks hits") {
    auto dir = fresh_temp_dir("skeptic_cache_test");
    CacheStore cache(dir);
    MockBackend mock(pong_script());

    auto first = complete_cached(mock, ping_request(), cache);
    CHECK_FALSE(first.from_cache);
    auto second = complete_cached(mock, ping_request(), cache);
    CHECK(second.from_cache);
    CHECK(second.content == first.content);
    CHECK(mock.call_count() == 1);

    SUBCASE("corrupt entries degrade to misses") {
        for (const auto& entry : fs::directory_iterator(dir)) {
            std::ofstream out(entry.path(), std::ios::binary | std::ios::trunc);
            out << "not json at all";
        }
        auto third = complete_cached(mock, ping_request(), cache);
        CHECK_FALSE(third.from_cache);
        CHECK(third.content == "pong");
        CHECK(mock.call_count() == 2);
    }
    fs::remove_all(dir);
}

TEST_CASE("caching backend re-ask bypasses the cache read") {
    auto dir = fresh_temp_dir("skeptic_cache_fresh");
    auto mock = std::make_shared<MockBackend>(pong_script());
    CachingBackend caching(mock, std::make_shared<CacheStore>(dir));

    CHECK_FALSE(caching.complete(ping_request()).from_cache);
    CHECK(caching.complete(ping_request()).from_cache);
    CHECK(mock->call_count() == 1);
    CHECK_FALSE(caching.complete_fresh(ping_request()).from_cache);
    CHECK(mock->call_count() == 2);
    fs::remove_all(dir);
}

TEST_CASE("batch preserves input order under a concurrency limit") {
    Json responses = Json::object();
    std::vector<ChatRequest> requests;
    for (int i = 0; i < 10; ++i) {
        ChatRequest request;
        request.model = "mock-model";
        request.messages = {{Role::User, "item " + std::to_string(i)}};
        responses[request.digest()] = "reply " + std::to_string(i);
        requests.push_back(request);
    }
    MockBackend mock(MockScript::from_json(Json{{"responses", responses}}));

    auto outcomes = batch_complete(mock, requests, 3);
    REQUIRE(outcomes.size() == 10);
    for (int i = 0; i < 10; ++i) {
        REQUIRE(outcomes[i].ok());
        CHECK(outcomes[i].response->content == "reply " + std::to_string(i));
    }
    CHECK(mock.call_count() == 10);
}

TEST_CASE("batch of zero requests is an empty list") {
    MockBackend mock(MockScript{});
    CHECK(batch_complete(mock, {}, 4).empty());
    CHECK_THROWS_AS(batch_complete(mock, {}, 0), Error);
}

TEST_CASE("one scripted failure among five stays positional") {
    Json responses = Json::object();
    std::vector<ChatRequest> requests;
    for (int i = 0; i < 5; ++i) {
        ChatRequest request;
        request.model = "mock-model";
        request.messages = {{Role::User, "item " + std::to_string(i)}};
        if (i == 2) {
            responses[request.digest()] = Json{{"error", "scripted outage"}};
        } else {
            responses[request.digest()] = "ok";
        }
        requests.push_back(request);
    }
    MockBackend mock(MockScript::from_json(Json{{"responses", responses}}));

    auto outcomes = batch_complete(mock, requests, 2);
    for (int i = 0; i < 5; ++i) {
        if (i == 2) {
            CHECK_FALSE(outcomes[i].ok());
            CHECK(outcomes[i].error->find("scripted outage") != std::string::npos);
        } else {
            REQUIRE(outcomes[i].ok());
            CHECK(outcomes[i].response->content == "ok");
        }
    }
}

TEST_CASE("batch output multiset equals sequential execution") {
    Json responses = Json::object();
    std::vector<ChatRequest> requests;
    for (int i = 0; i < 12; ++i) {
        ChatRequest request;
        request.model = "mock-model";
        request.messages = {{Role::User, "q" + std::to_string(i % 5)}};  // duplicates included
        responses[request.digest()] = "a" + std::to_string(i % 5);
        requests.push_back(request);
    }
    MockBackend mock(MockScript::from_json(Json{{"responses", responses}}));

    std::multiset<std::string> sequential;
    for (const auto& request : requests) sequential.insert(mock.complete(request).content);
    std::multiset<std::string> batched;
    for (const auto& outcome : batch_complete(mock, requests, 4)) {
        REQUIRE(outcome.ok());
        batched.insert(outcome.response->content);
    }
    CHECK(batched == sequential);
}

TEST_CASE("retry delays grow exponentially with bounded jitter") {
    RetryPolicy policy;
    CHECK(retry_delay_seconds(policy, 1, 0.5) == doctest::Approx(1.0));
    CHECK(retry_delay_seconds(policy, 3, 0.5) == doctest::Approx(4.0));
    CHECK(retry_delay_seconds(policy, 2, 0.0) == doctest::Approx(2.0 * 0.75));
    CHECK(retry_delay_seconds(policy, 2, 1.0) == doctest::Approx(2.0 * 1.25));
    for (int attempt = 1; attempt < 5; ++attempt) {
        CHECK(retry_delay_seconds(policy, attempt, 1.0) <
              retry_delay_seconds(policy, attempt + 1, 0.0));
    }
}

TEST_CASE("chat completion parsing enforces a content field") {
    Json good{{"model", "served"},
              {"choices", Json::array({Json{{"message", Json{{"content", "hi"}}}}})},
              {"usage", Json{{"prompt_tokens", 3}, {"completion_tokens", 5}, {"total_tokens", 8}}}};
    auto response = parse_chat_completion(good, "fallback");
    CHECK(response.content == "hi");
    CHECK(response.model == "served");
    REQUIRE(response.usage.has_value());
    CHECK(response.usage->total_tokens == 8);

    CHECK_THROWS_AS(parse_chat_completion(Json{{"choices", Json::array()}}, "m"), Error);
    Json no_content{{"choices", Json::array({Json{{"message", Json::object()}}})}};
    CHECK_THROWS_AS(parse_chat_completion(no_content, "m"), Error);
}

TEST_CASE("http backend against a local endpoint") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int hit = ++hits;
        auto body = Json::parse(req.body);
        const std::string content = body.at("messages").at(0).at("content").get<std::string>();
        if (content == "need-auth" && req.get_header_value("Authorization") != "Bearer sk-test") {
            res.status = 401;
            res.set_content("{}", "application/json");
            return;
        }
        if (content == "flaky" && hit < 3) {
            res.status = 503;
            res.set_content("overloaded", "text/plain");
            return;
        }
        if (content == "no-content") {
            res.set_content(R"({"choices": [{"message": {}}]})", "application/json");
            return;
        }
        Json reply{{"model", "served-model"},
                   {"choices", Json::array({Json{{"message", Json{{"content", "echo: " + content}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.api_key = "sk-test";
    config.retry.base_delay_s = 0.001;  // keep test runtime flat
    HttpBackend backend(config);

    auto ask = [&](const std::string& content) {
        ChatRequest request;
        request.model = "m";
        request.messages = {{Role::User, content}};
        return request;
    };

    SUBCASE("success round-trip") {
        auto response = backend.complete(ask("hello"));
        CHECK(response.content == "echo: hello");
        CHECK(response.model == "served-model");
    }
    SUBCASE("retries through transient 5xx") {
        auto response = backend.complete(ask("flaky"));
        CHECK(response.content == "echo: flaky");
        CHECK(hits.load() == 3);
    }
    SUBCASE("401 is a non-retryable auth error") {
        HttpConfig bad = config;
        bad.api_key = "wrong";
        HttpBackend unauthorized(bad);
        try {
            unauthorized.complete(ask("need-auth"));
            FAIL("expected AuthError");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Auth);
        }
        CHECK(hits.load() == 1);
    }
    SUBCASE("missing content is malformed") {
        try {
            backend.complete(ask("no-content"));
            FAIL("expected MalformedResponse");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::MalformedResponse);
        }
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("exhausted retries surface as their own error") {
    HttpConfig config;
    config.base_url = "http://127.0.0.1:9";  // nothing listens on the discard port
    config.retry.max_attempts = 2;
    config.retry.base_delay_s = 0.001;
    config.timeout_s = 1;
    HttpBackend backend(config);
    ChatRequest request;
    request.model = "m";
    request.messages = {{Role::User, "anyone there?"}};
    try {
        backend.complete(request);
        FAIL("expected ExhaustedRetries");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ExhaustedRetries);
    }
}
