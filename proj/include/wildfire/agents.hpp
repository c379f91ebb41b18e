#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wildfire/world.hpp"

namespace wildfire {

enum class AgentKind : std::uint8_t
{
    Firefighter,
    Bulldozer,
    Drone,
    Helicopter,
};

inline constexpr std::array<AgentKind, 4> kAllAgentKinds{AgentKind::Firefighter, AgentKind::Bulldozer, AgentKind::Drone,
                                                         AgentKind::Helicopter};

std::string_view kind_name(AgentKind k);
AgentKind parse_kind(std::string_view name);

constexpr bool is_air(AgentKind k) noexcept
{
    return k == AgentKind::Drone || k == AgentKind::Helicopter;
}

struct KindParams
{
    int cells_per_move = 1;  // cells advanced on a moving tick
    int ticks_per_move = 1;  // ticks between moves
    int water_capacity = 0;  // units; one spray or drop uses one
    int vision_radius = 6;   // Chebyshev cells
    int seats = 0;           // firefighters carried

    friend bool operator==(const KindParams&, const KindParams&) = default;
};

struct AgentParams
{
    KindParams firefighter{1, 1, 5, 6, 0};
    KindParams bulldozer{1, 2, 0, 6, 0};
    KindParams drone{3, 1, 0, 15, 0};
    KindParams helicopter{3, 1, 1, 10, 4};
    double cone_half_angle_deg = 45.0;
    double cone_range = 3.0;
    int drop_radius = 1;    // helicopter payload covers a (2r+1)^2 square
    int pickup_radius = 1;  // civilians and boarding firefighters
    int refill_radius = 1;  // distance to a water cell for refills

    const KindParams& of(AgentKind k) const noexcept;
    KindParams& of(AgentKind k) noexcept;

    friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

enum class PrimitiveKind : std::uint8_t
{
    Wait,
    MoveToLocation,
    CutXTrees,
    CutAllTrees,
    PickUpCivilian,
    DropOffCivilian,
    SprayWaterCone,
    RefillWater,
    DriveNoCut,
    DriveClearPath,
    FlyToLocation,
    PickUpFirefighters,
    DropOffFirefighters,
    DropWater,
};

std::string_view primitive_name(PrimitiveKind k);
std::optional<PrimitiveKind> parse_primitive_name(std::string_view name);

constexpr bool is_multi_step(PrimitiveKind k) noexcept
{
    switch (k) {
    case PrimitiveKind::MoveToLocation:
    case PrimitiveKind::CutXTrees:
    case PrimitiveKind::CutAllTrees:
    case PrimitiveKind::DriveNoCut:
    case PrimitiveKind::DriveClearPath:
    case PrimitiveKind::FlyToLocation: return true;
    default: return false;
    }
}

constexpr bool is_movement(PrimitiveKind k) noexcept
{
    return k == PrimitiveKind::MoveToLocation || k == PrimitiveKind::DriveNoCut || k == PrimitiveKind::DriveClearPath ||
           k == PrimitiveKind::FlyToLocation;
}

// Whether an agent kind may run a primitive. Wait is allowed for everyone.
bool allowed_for(AgentKind agent, PrimitiveKind prim) noexcept;

struct Primitive
{
    PrimitiveKind kind = PrimitiveKind::Wait;
    int p1 = 0;
    int p2 = 0;

    Cell target() const noexcept { return {p1, p2}; }
    friend bool operator==(const Primitive&, const Primitive&) = default;
};

std::string describe(const Primitive& p);

struct ActivePrimitive
{
    Primitive prim;
    int progress = 0;         // successful cuts for CutXTrees
    int phase = 0;            // ticks since last move
    int ticks = 0;            // ticks spent so far
    std::vector<Cell> path;   // cached ground route, excludes the start cell
    std::size_t path_pos = 0;
};

struct Agent
{
    int id = 0; // 1-based, unique
    AgentKind kind = AgentKind::Firefighter;
    Cell pos;
    bool alive = true;
    int water = 0;
    int carried_civilian = 0;       // firefighters only, 0 or 1
    std::vector<int> passengers;    // helicopter: boarded firefighter ids
    int aboard = 0;                 // firefighter: helicopter id, 0 when on foot
    bool plow_lowered = false;
    bool reached_target = false;    // firefighter stood on the level target region
    int refills = 0;
    int water_used = 0;
    std::int64_t cells_moved = 0;
    int vision_radius = 6;
    std::optional<ActivePrimitive> active;
    std::vector<std::string> action_history;
    std::vector<std::string> message_history;

    std::string name() const { return "AGENT_" + std::to_string(id); }
    bool idle() const noexcept { return alive && !active.has_value(); }
    int passenger_civilians(const std::vector<Agent>& all) const;
};

Agent make_agent(int id, AgentKind kind, Cell pos, const AgentParams& params);

void digest_agents(Digest& d, const std::vector<Agent>& agents);

} // namespace wildfire
