#pragma once

#include <string>
#include <vector>

#include "wildfire/agents.hpp"
#include "wildfire/lm.hpp"
#include "wildfire/world.hpp"

namespace wildfire {

struct NearbyAgent
{
    int id = 0;
    AgentKind kind = AgentKind::Firefighter;
    Cell pos;
};

struct Minimap
{
    int x0 = 0;
    int x1 = 0;
    int y0 = 0;
    int y1 = 0;
    Cell self;
    std::vector<std::vector<std::string>> cells; // [row][col], decorated
    std::vector<NearbyAgent> nearby;

    int width() const noexcept { return x1 - x0 + 1; }
    int height() const noexcept { return y1 - y0 + 1; }
    std::string render() const; // rows joined by newlines, cells by spaces
};

// Legend character for a cell as the agent knows it: live state inside the
// current visibility epoch, last-known terrain for stale revealed cells, '-'
// otherwise.
char perceived_char(const WorldMap& world, std::size_t i);

Minimap encode_minimap(const WorldMap& world, const Agent& agent, const std::vector<Agent>& all);

// Plain-words description of a cell, e.g. "medium forest (2 trees)".
std::string describe_cell(const WorldMap& world, Cell c);

std::string build_perception_prompt(const Agent& agent, const Minimap& mm, const WorldMap& world);

struct Perception
{
    std::string prompt;
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

Perception perceive(LanguageModel& lm, const Agent& agent, const WorldMap& world, const std::vector<Agent>& all);

} // namespace wildfire
