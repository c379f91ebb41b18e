#include <doctest.h>

#include "fixtures.hpp"
#include "wildfire/levels.hpp"

using namespace wildfire;
using namespace wildfire::testing;

TEST_CASE("catalog rows match the printed level table")
{
    REQUIRE(level_catalog().size() == std::size(kLevelTable));
    for (std::size_t k = 0; k < std::size(kLevelTable); ++k) {
        const auto& row = kLevelTable[k];
        CAPTURE(row.name);
        CHECK(level_catalog()[k].name == row.name);
        const auto ep = build_level(row.name, level_catalog()[k].seeds.front());
        CHECK(matches_table(ep, row));
        CHECK(!level_catalog()[k].seeds.empty());
    }
}

TEST_CASE("sparse small labels 18 trees")
{
    const auto ep = build_level("Cut Trees: Sparse (small)", 12345);
    std::int64_t labeled = 0;
    for (Cell c : ep.level.labeled_cells) labeled += ep.world.trees[ep.world.index(c)];
    CHECK(labeled == 18);
    CHECK(ep.agents.size() == 3);
    CHECK(ep.world.width == 30);
}

TEST_CASE("scout large and full environment rosters")
{
    const auto scout = build_level("Scout Fire (large)", 7);
    CHECK(scout.agents.size() == 5);
    CHECK(scout.world.width == 250);
    CHECK(scout.level.spec.max_score == 2);
    const auto full = build_level("Full Environment", 6434);
    CHECK(full.level.spec.roster == Roster{10, 1, 2, 2});
    CHECK(full.world.width == 200);
    CHECK(full.world.civilians_on_map() == 5);
}

TEST_CASE("level lookup accepts the alias and rejects unknown names")
{
    CHECK(find_level("Suppress Fire: Locate + Transport + Suppress").name == "Suppress Fire: Locate + Deploy + Suppress");
    CHECK(find_level("  Scout Fire   (small) ").name == "Scout Fire (small)");
    CHECK_THROWS_AS(find_level("Scout Fire (medium)"), UnknownLevel);
}

TEST_CASE("level building is deterministic")
{
    const auto a = build_level("Rescue Civilians: Search and Rescue", 8530);
    const auto b = build_level("Rescue Civilians: Search and Rescue", 8530);
    CHECK(world_digest(a.world) == world_digest(b.world));
    REQUIRE(a.agents.size() == b.agents.size());
    for (std::size_t k = 0; k < a.agents.size(); ++k) CHECK(a.agents[k].pos == b.agents[k].pos);
}

TEST_CASE("roster override")
{
    LevelOverrides ov;
    ov.roster = Roster{7, 0, 0, 0};
    const auto ep = build_level("Cut Trees: Sparse (small)", 375, ov);
    CHECK(ep.agents.size() == 7);
    ov.roster = Roster{};
    CHECK_THROWS(build_level("Cut Trees: Sparse (small)", 375, ov));
}

TEST_CASE("scoring functions")
{
    ScoreComponents c;
    c.trees_destroyed = 500;
    c.agents_lost = 1;
    CHECK(score_value(LevelFamily::SuppressExtinguish, c) == -520.0);
    c.trees_destroyed = 5500;
    CHECK(score_value(LevelFamily::FullEnvironment, c) == -5520.0);
    c.civilians_lost = 2;
    CHECK(score_value(LevelFamily::FullEnvironment, c) == -5720.0);
    CHECK(score_value(LevelFamily::SuppressContain, c) == -5520.0);
    ScoreComponents cut;
    cut.trees_cut_correct = 18;
    CHECK(score_value(LevelFamily::CutTreesSparse, cut) == 18.0);
}

TEST_CASE("termination")
{
    const auto ep = build_level("Cut Trees: Sparse (small)", 375);
    Score s;
    CHECK(termination_reason(ep.level, ep.world, s, 200, false) == TerminationReason::MaxSteps);
    CHECK_FALSE(is_terminal(ep.level, ep.world, s, 10, false));
    s.value = 18;
    CHECK(termination_reason(ep.level, ep.world, s, 10, false) == TerminationReason::MaxScore);

    const auto fire = build_level("Suppress Fire: Extinguish", 2994);
    REQUIRE(fire.world.any_active_fire());
    Score none;
    CHECK_FALSE(is_terminal(fire.level, fire.world, none, 10, false));
    CHECK(is_terminal(fire.level, fire.world, none, 400, false));
}

TEST_CASE("do-nothing on cut trees scores zero")
{
    auto ep = build_level("Cut Trees: Sparse (small)", 375);
    for (int t = 0; t < ep.level.spec.max_steps; ++t) world_step(ep.world, ep.agents, ep.fire, ep.params);
    CHECK(score(ep.level, ep.world).value == 0.0);
}

TEST_CASE("parked drones under drifting fire do not count")
{
    auto ep = build_level("Scout Fire (small)", 4651);
    for (int t = 0; t < ep.level.spec.max_steps; ++t) world_step(ep.world, ep.agents, ep.fire, ep.params);
    CHECK(score(ep.level, ep.world).value == 0.0);
}

TEST_CASE("omniscient solver reaches the maximum on sparse small")
{
    auto ep = build_level("Cut Trees: Sparse (small)", 375);
    CHECK(solve_episode(ep).value == 18.0);
}

TEST_CASE("op precondition needs fire and a civilian in one view")
{
    AgentParams params;
    auto w = flat_world(30, 30);
    std::vector<Agent> agents{make_agent(1, AgentKind::Firefighter, {5, 5}, params)};
    w.fire[w.index({7, 7})] = FireState::Burning;
    CHECK_FALSE(op_precondition(w, agents));
    w.civilians[w.index({3, 3})] = 1;
    CHECK(op_precondition(w, agents));
    agents[0].pos = {25, 25};
    CHECK_FALSE(op_precondition(w, agents));
}

TEST_CASE("task descriptions name the objective")
{
    for (const auto& spec : level_catalog()) {
        const auto ep = build_level(spec.name, spec.seeds.front());
        CHECK_FALSE(ep.level.task_description().empty());
    }
}
