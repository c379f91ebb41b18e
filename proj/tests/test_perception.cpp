#include <doctest.h>

#include "fixtures.hpp"
#include "wildfire/perception.hpp"

using namespace wildfire;
using namespace wildfire::testing;

#ifndef WILDFIRE_GOLDEN_DIR
#define WILDFIRE_GOLDEN_DIR "tests/golden"
#endif

TEST_CASE("unrevealed window renders as fog except the agent's cell")
{
    AgentParams params;
    auto w = flat_world(10, 10, 1, LandType::MediumForest);
    const auto a = make_agent(1, AgentKind::Firefighter, {5, 5}, params);
    const auto mm = encode_minimap(w, a, {a});
    for (int r = 0; r < mm.height(); ++r) {
        for (int c = 0; c < mm.width(); ++c) {
            const bool self = Cell{mm.x0 + c, mm.y0 + r} == a.pos;
            CHECK(mm.cells[r][c] == (self ? "*2*" : "-"));
        }
    }
}

TEST_CASE("revealed medium forest renders as 2")
{
    AgentParams params;
    auto w = flat_world(10, 10, 1, LandType::MediumForest);
    std::vector<Agent> agents{make_agent(1, AgentKind::Firefighter, {5, 5}, params)};
    update_visibility(w, agents);
    CHECK(perceived_char(w, w.index({6, 6})) == '2');
}

TEST_CASE("constructed 5x5 window matches a hand-written grid")
{
    AgentParams params;
    auto w = flat_world(5, 5);
    fill_rect(w, {0, 0}, {4, 0}, LandType::DenseForest);
    w.set_land({0, 1}, LandType::Water);
    w.set_land({4, 1}, LandType::Building);
    w.set_land({1, 1}, LandType::LightForest);
    w.set_land({3, 3}, LandType::Rock);
    w.fire[w.index({2, 0})] = FireState::Burning;
    w.wet[w.index({2, 0})] = 4;
    w.fire[w.index({3, 0})] = FireState::Ignited;
    w.fire[w.index({1, 0})] = FireState::Extinguished;
    w.fire[w.index({4, 0})] = FireState::Extinguishing;
    w.wet[w.index({1, 1})] = 2;
    w.civilians[w.index({0, 4})] = 1;
    auto a = make_agent(1, AgentKind::Firefighter, {2, 2}, params);
    a.vision_radius = 2;
    std::vector<Agent> agents{a};
    update_visibility(w, agents);
    const std::string expect = "3 x 'f' i e\n"
                               "w '1' 0 0 B\n"
                               "0 0 *0* 0 0\n"
                               "0 0 0 0 0\n"
                               "C 0 0 0 0";
    CHECK(encode_minimap(w, agents[0], agents).render() == expect);
}

TEST_CASE("stale cells show last-known terrain")
{
    AgentParams params;
    auto w = flat_world(30, 5, 1, LandType::DenseForest);
    std::vector<Agent> agents{make_agent(1, AgentKind::Firefighter, {2, 2}, params)};
    update_visibility(w, agents);
    agents[0].pos = {25, 2};
    w.trees[w.index({2, 2})] = 1;
    w.fire[w.index({3, 2})] = FireState::Burning;
    update_visibility(w, agents);
    CHECK(perceived_char(w, w.index({2, 2})) == '3');
    CHECK(perceived_char(w, w.index({3, 2})) == '3');
    CHECK(perceived_char(w, w.index({15, 2})) == '-');
}

TEST_CASE("header states the window range")
{
    AgentParams params;
    auto w = flat_world(30, 30);
    std::vector<Agent> agents{make_agent(1, AgentKind::Firefighter, {10, 10}, params)};
    update_visibility(w, agents);
    const auto p = build_perception_prompt(agents[0], encode_minimap(w, agents[0], agents), w);
    CHECK(p.find("range X:[4-16], Y:[4-16]") != std::string::npos);
    CHECK(p.find("none\n") != std::string::npos);
}

TEST_CASE("nearby agents are listed")
{
    AgentParams params;
    auto w = flat_world(30, 30);
    std::vector<Agent> agents{make_agent(1, AgentKind::Firefighter, {10, 10}, params),
                              make_agent(2, AgentKind::Drone, {12, 9}, params),
                              make_agent(3, AgentKind::Bulldozer, {8, 14}, params),
                              make_agent(4, AgentKind::Firefighter, {28, 28}, params)};
    update_visibility(w, agents);
    const auto mm = encode_minimap(w, agents[0], agents);
    REQUIRE(mm.nearby.size() == 2);
    const auto p = build_perception_prompt(agents[0], mm, w);
    const auto at = p.find("There are other nearby agents at:");
    REQUIRE(at != std::string::npos);
    CHECK(p.find("AGENT_2", at) != std::string::npos);
    CHECK(p.find("AGENT_3", at) != std::string::npos);
    CHECK(p.find("AGENT_4", at) == std::string::npos);
}

TEST_CASE("perceive returns the model text and counts one call")
{
    AgentParams params;
    auto w = flat_world(20, 20);
    std::vector<Agent> agents{make_agent(1, AgentKind::Firefighter, {10, 10}, params)};
    update_visibility(w, agents);
    MockLm lm("fixed", [](const std::string&, PromptKind, std::int64_t) { return std::string("dense trees to the north"); });
    const auto p = perceive(lm, agents[0], w, agents);
    CHECK(p.text == "dense trees to the north");
    CHECK(lm.telemetry().snapshot().api_calls == 1);
    CHECK(lm.telemetry().snapshot().calls(CallPurpose::Perception) == 1);
    CHECK(p.input_tokens == count_tokens(p.prompt));
    CHECK(p.output_tokens == 5);
}

TEST_CASE("prompt tokens grow with window area")
{
    AgentParams params;
    auto w = flat_world(40, 40);
    std::vector<std::int64_t> tokens;
    for (int r : {2, 4, 6}) {
        auto a = make_agent(1, AgentKind::Firefighter, {20, 20}, params);
        a.vision_radius = r;
        std::vector<Agent> agents{a};
        update_visibility(w, agents);
        tokens.push_back(count_tokens(build_perception_prompt(a, encode_minimap(w, a, agents), w)));
    }
    CHECK(tokens[0] < tokens[1]);
    CHECK(tokens[1] < tokens[2]);
    // Cell count dominates: 13x13 minus 5x5 window adds 144 cell tokens.
    CHECK(tokens[2] - tokens[0] == 13 * 13 - 5 * 5);
}

TEST_CASE("perception and translation prompts match golden files")
{
    for (const auto& c : golden_cases()) {
        CAPTURE(c.name);
        CHECK(golden_matches(WILDFIRE_GOLDEN_DIR, c.name + "_perception.txt", golden_perception(c)));
        CHECK(golden_matches(WILDFIRE_GOLDEN_DIR, c.name + "_translate.txt", golden_translation(c)));
    }
}
