#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wildfire/agents.hpp"
#include "wildfire/fire.hpp"
#include "wildfire/world.hpp"

namespace wildfire {

enum class ActionType : std::uint8_t
{
    Noop,
    Move,
    Cut,
    Spray,
    PickUpCivilian,
    DropOffCivilian,
    Refill,
    PickUpFirefighters,
    DropOffFirefighters,
    DropWater,
};

std::string_view action_type_name(ActionType t);

// One tick of low-level control emitted by a primitive.
struct LowLevelAction
{
    ActionType type = ActionType::Noop;
    std::vector<Cell> steps; // Move: cells entered this tick, in order
    Cell target;             // Spray: aim point
    bool plow = false;       // Move: clear vegetation along the way
};

struct PrimitiveStep
{
    LowLevelAction action;
    bool completed = false; // terminal condition holds once this action succeeds
    bool failed = false;
    std::string reason;
};

enum class EventType : std::uint8_t
{
    TreesCut,
    AgentLost,
    CivilianLost,
    CivilianPickedUp,
    CivilianDropped,
    CivilianRescued,
    FirefightersBoarded,
    FirefightersDropped,
    WaterSprayed,
    WaterDropped,
    Refilled,
    FirefighterArrived,
    PrimitiveCompleted,
    PrimitiveAborted,
    InvalidAction,
};

std::string_view event_name(EventType t);

struct Event
{
    std::int64_t step = 0;
    EventType type = EventType::InvalidAction;
    int agent = 0;
    Cell cell;
    std::int64_t count = 0;
    std::string detail;
};

using EventList = std::vector<Event>;

bool ground_passable(const WorldMap& world, Cell c) noexcept;
bool passable(const WorldMap& world, AgentKind kind, Cell c) noexcept;

// Full route from `from` (exclusive) to `to` (inclusive). Ground agents use A*
// with a Chebyshev heuristic, ties broken by lower cell index; air agents fly a
// Bresenham line. Empty optional when unreachable; empty path when from == to.
std::optional<std::vector<Cell>> find_path(const WorldMap& world, AgentKind kind, Cell from, Cell to);

// Next cell along find_path, or nullopt when unreachable.
std::optional<Cell> plan_path(const WorldMap& world, AgentKind kind, Cell from, Cell to);

// First step of a Bresenham line; from != to.
Cell line_step(Cell from, Cell to) noexcept;

// Emits one tick of low-level action for an agent's active primitive. Updates
// the primitive's path cache and move phase.
PrimitiveStep execute_primitive(Agent& agent, const WorldMap& world, const AgentParams& params);

// Marks cells within each live agent's vision radius as revealed and visible
// for the current epoch. Returns the revealed mask.
const std::vector<std::uint8_t>& update_visibility(WorldMap& world, const std::vector<Agent>& agents);

struct StepOptions
{
    FireExec fire_exec;
};

struct StepResult
{
    EventList events;
    FireDelta fire;
};

// One tick: primitives emit actions, actions resolve in ascending id order,
// fire advances, agents and civilians on burning cells are lost, visibility
// refreshes, and the step counter advances.
StepResult world_step(WorldMap& world, std::vector<Agent>& agents, const FireConfig& fire_cfg,
                      const AgentParams& params, StepOptions opts = {});

// Sets an agent's active primitive. Wait completes on the next tick.
void assign_primitive(Agent& agent, const Primitive& prim);

} // namespace wildfire
