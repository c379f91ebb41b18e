#include <doctest.h>

#include <cstdlib>
#include <thread>

// Must match the library build so httplib types agree across translation units.
#ifdef WILDFIRE_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "wildfire/lm.hpp"
#include "wildfire/translator.hpp"

using namespace wildfire;

TEST_CASE("whitespace token counting")
{
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("  a b\n\tc  ") == 3);
}

TEST_CASE("prompt classification and agent ids")
{
    const auto t = build_translation_prompt("cut all trees", AgentKind::Firefighter);
    CHECK(classify_prompt(t) == PromptKind::Translate);
    CHECK(classify_prompt("hello") == PromptKind::Unknown);
    CHECK(prompt_agent_id("You are AGENT_12, and") == 12);
    CHECK(prompt_agent_id("no agent") == 0);
}

TEST_CASE("echo mock returns the last line")
{
    auto lm = make_mock_lm("echo");
    CHECK(lm->complete("first\nsecond line\n\n", CallPurpose::Action).text == "second line");
    const auto s = lm->telemetry().snapshot();
    CHECK(s.api_calls == 1);
    CHECK(s.input_tokens == 3);
    CHECK(s.output_tokens == 2);
    CHECK(s.calls(CallPurpose::Action) == 1);
}

TEST_CASE("failed calls still count")
{
    auto lm = make_mock_lm("fail_first:2");
    CHECK_THROWS_AS(lm->complete("x", CallPurpose::Plan), LmError);
    CHECK_THROWS_AS(lm->complete("x", CallPurpose::Plan), LmError);
    CHECK_NOTHROW(lm->complete("x", CallPurpose::Plan));
    CHECK(lm->telemetry().snapshot().api_calls == 3);
}

TEST_CASE("snapshot deltas")
{
    TelemetrySnapshot a;
    a.api_calls = 5;
    a.input_tokens = 50;
    a.calls_by_purpose[2] = 5;
    TelemetrySnapshot b;
    b.api_calls = 2;
    b.input_tokens = 20;
    b.calls_by_purpose[2] = 2;
    const auto d = a - b;
    CHECK(d.api_calls == 3);
    CHECK(d.input_tokens == 30);
    CHECK(d.calls_by_purpose[2] == 3);
}

TEST_CASE("unknown model specs are rejected")
{
    CHECK_THROWS_AS(make_lm("gpt", HttpLmConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(make_mock_lm("nonsense"), std::invalid_argument);
    CHECK_THROWS_AS(make_mock_lm("omniscient"), std::invalid_argument);
}

TEST_CASE("http client against a local server")
{
    httplib::Server server;
    int hits = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const auto body = nlohmann::json::parse(req.body);
        if (req.get_header_value("Authorization") != "Bearer test-key" || body["temperature"] != 0) {
            res.status = 401;
            return;
        }
        if (body["messages"][0]["content"] == "overload") {
            res.status = 429;
            return;
        }
        const nlohmann::json reply = {{"choices", {{{"message", {{"content", "Do nothing"}}}}}},
                                      {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 2}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpLmConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
    cfg.key_env = "WILDFIRE_TEST_KEY";
    cfg.timeout_seconds = 5;
    ::setenv("WILDFIRE_TEST_KEY", "test-key", 1);
    auto lm = make_http_lm(cfg);
    const auto c = lm->complete("hello there", CallPurpose::Action);
    CHECK(c.text == "Do nothing");
    CHECK(c.input_tokens == 11);
    CHECK(c.output_tokens == 2);
    try {
        lm->complete("overload", CallPurpose::Action);
        FAIL("expected LmError");
    } catch (const LmError& e) {
        CHECK(e.retriable());
    }
    ::setenv("WILDFIRE_TEST_KEY", "wrong", 1);
    try {
        lm->complete("hello", CallPurpose::Action);
        FAIL("expected LmError");
    } catch (const LmError& e) {
        CHECK_FALSE(e.retriable());
    }
    ::unsetenv("WILDFIRE_TEST_KEY");
    CHECK_THROWS_AS(lm->complete("hello", CallPurpose::Action), LmError);
    CHECK(lm->telemetry().snapshot().api_calls == 4);
    CHECK(hits == 3);
    server.stop();
    th.join();
}
