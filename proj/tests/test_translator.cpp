#include <doctest.h>

#include "fixtures.hpp"
#include "wildfire/translator.hpp"

using namespace wildfire;

namespace {

const std::string kExample = "[1, 500, 500, \"move to coordinate location of (500, 500)\"]";

std::unique_ptr<MockLm> scripted(std::vector<std::string> replies)
{
    return std::make_unique<MockLm>("script", [replies](const std::string&, PromptKind, std::int64_t i) {
        return replies[std::min<std::size_t>(static_cast<std::size_t>(i), replies.size() - 1)];
    });
}

} // namespace

TEST_CASE("firefighter catalog starts with move to location")
{
    const auto& rows = default_catalog().rows(AgentKind::Firefighter);
    REQUIRE(!rows.empty());
    CHECK(rows[0].code == 1);
    CHECK(rows[0].primitive == PrimitiveKind::MoveToLocation);
    CHECK(rows[0].title.find("Move to any coordinate location") == 0);
    const auto prompt = build_translation_prompt("go north", AgentKind::Firefighter);
    CHECK(prompt.find("Move to any coordinate location") != std::string::npos);
    CHECK(prompt.find("You MUST choose one of them") != std::string::npos);
}

TEST_CASE("drone catalog has a single fly row")
{
    const auto& rows = default_catalog().rows(AgentKind::Drone);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].primitive == PrimitiveKind::FlyToLocation);
}

TEST_CASE("catalog sizes identify the kind")
{
    for (auto k : kAllAgentKinds) CHECK(kind_from_catalog_size(default_catalog().rows(k).size()) == k);
    CHECK_FALSE(kind_from_catalog_size(99).has_value());
}

TEST_CASE("empty action text still builds a prompt that fails to parse cleanly")
{
    const auto prompt = build_translation_prompt("", AgentKind::Helicopter);
    CHECK(translation_prompt_action(prompt).empty());
    CHECK(classify_prompt(prompt) == PromptKind::Translate);
    CHECK_THROWS_AS(parse_structured_action(""), ParseError);
}

TEST_CASE("parsing the example action")
{
    const auto a = parse_structured_action(kExample);
    CHECK(a == Action{1, 500, 500, "move to coordinate location of (500, 500)"});
    CHECK_THROWS_AS(parse_structured_action("[1, 500]"), ParseError);
    CHECK(parse_structured_action(format_action(a)) == a);
    const std::string keyed =
        "{\"type\": 1, \"param1\": 500, \"param2\": 500, \"description\": \"move to coordinate location of (500, 500)\"}";
    CHECK(parse_structured_action(keyed) == a);
}

TEST_CASE("decorated outputs parse to the same action")
{
    const auto expect = parse_structured_action(kExample);
    const std::vector<std::string> prefixes = {"", "Sure. ", "Reasoning: the fire is east.\n", "```\n", "Answer:\n\n",
                                               "I will move.\nAction: ", "> ", "Output -> ", "**Action**\n", "\t"};
    const std::vector<std::string> suffixes = {"", "\n```", " Done.", "\nThis moves the agent.", "  \n"};
    int n = 0;
    for (const auto& p : prefixes) {
        for (const auto& s : suffixes) {
            CHECK(parse_structured_action(p + kExample + s) == expect);
            ++n;
        }
    }
    CHECK(n == 50);
}

TEST_CASE("validation")
{
    const Bounds b{100, 100};
    CHECK(validate_action({1, 5, 5, ""}, AgentKind::Firefighter, b).empty());
    CHECK_FALSE(validate_action({1, 500, 500, ""}, AgentKind::Firefighter, b).empty());
    CHECK_FALSE(validate_action({2, 0, 0, ""}, AgentKind::Drone, b).empty());
    CHECK_FALSE(validate_action({2, 0, 0, ""}, AgentKind::Firefighter, b).empty());
    CHECK(validate_action({2, 2, 0, ""}, AgentKind::Firefighter, b).empty());
    CHECK_FALSE(validate_action({9, 0, 0, ""}, AgentKind::Firefighter, b).empty());
}

TEST_CASE("primitive round trips through catalog codes")
{
    for (auto k : kAllAgentKinds) {
        for (const auto& row : default_catalog().rows(k)) {
            Primitive p{row.primitive, row.params == ParamUse::None ? 0 : 3,
                        row.params == ParamUse::Coordinate ? 4 : 0};
            const auto a = from_primitive(p, k);
            CHECK(a.type == row.code);
            CHECK(to_primitive(a, k) == p);
            CHECK(primitive_from_text(describe(p), k) == p);
        }
    }
}

TEST_CASE("catalog tsv round trip")
{
    const auto tsv = catalog_to_tsv(default_catalog());
    CHECK(catalog_to_tsv(catalog_from_tsv(tsv)) == tsv);
}

TEST_CASE("translator retry counts")
{
    const Bounds b{100, 100};
    {
        auto lm = scripted({"[1, 10, 10, \"go\"]"});
        const auto t = translate(*lm, "go to (10, 10)", AgentKind::Firefighter, b, 2);
        CHECK(t.calls.size() == 1);
        CHECK(lm->telemetry().snapshot().api_calls == 1);
    }
    {
        auto lm = scripted({"I am not sure", "[1, 10, 10, \"go\"]"});
        const auto t = translate(*lm, "go to (10, 10)", AgentKind::Firefighter, b, 2);
        CHECK(t.calls.size() == 2);
        CHECK(t.primitive == Primitive{PrimitiveKind::MoveToLocation, 10, 10});
        CHECK(t.calls[1].prompt.find(t.calls[0].output) != std::string::npos);
        CHECK(t.calls[1].prompt.find(t.calls[0].error) != std::string::npos);
    }
    {
        auto lm = scripted({"[1, 500]"});
        try {
            translate(*lm, "go", AgentKind::Firefighter, b, 2);
            FAIL("expected TranslationFailed");
        } catch (const TranslationFailed& e) {
            CHECK(e.calls() == 3);
        }
        CHECK(lm->telemetry().snapshot().api_calls == 3);
        CHECK(lm->telemetry().snapshot().calls(CallPurpose::Translate) == 3);
    }
}

TEST_CASE("idle phrases")
{
    CHECK(is_idle_text("Do nothing"));
    CHECK(is_idle_text("  wait "));
    CHECK_FALSE(is_idle_text("move to (3, 4)"));
}
