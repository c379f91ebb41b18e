#include "wildfire/agents.hpp"

#include <stdexcept>

namespace wildfire {

std::string_view kind_name(AgentKind k)
{
    switch (k) {
    case AgentKind::Firefighter: return "Firefighter";
    case AgentKind::Bulldozer: return "Bulldozer";
    case AgentKind::Drone: return "Drone";
    case AgentKind::Helicopter: return "Helicopter";
    }
    return "Unknown";
}

AgentKind parse_kind(std::string_view name)
{
    for (auto k : kAllAgentKinds) {
        if (kind_name(k) == name) return k;
    }
    throw std::invalid_argument("unknown agent kind: " + std::string(name));
}

const KindParams& AgentParams::of(AgentKind k) const noexcept
{
    switch (k) {
    case AgentKind::Firefighter: return firefighter;
    case AgentKind::Bulldozer: return bulldozer;
    case AgentKind::Drone: return drone;
    case AgentKind::Helicopter: return helicopter;
    }
    return firefighter;
}

KindParams& AgentParams::of(AgentKind k) noexcept
{
    return const_cast<KindParams&>(static_cast<const AgentParams&>(*this).of(k));
}

namespace {

struct PrimitiveNameEntry
{
    PrimitiveKind kind;
    std::string_view name;
};

constexpr PrimitiveNameEntry kPrimitiveNames[] = {
    {PrimitiveKind::Wait, "Wait"},
    {PrimitiveKind::MoveToLocation, "MoveToLocation"},
    {PrimitiveKind::CutXTrees, "CutXTrees"},
    {PrimitiveKind::CutAllTrees, "CutAllTrees"},
    {PrimitiveKind::PickUpCivilian, "PickUpCivilian"},
    {PrimitiveKind::DropOffCivilian, "DropOffCivilian"},
    {PrimitiveKind::SprayWaterCone, "SprayWaterCone"},
    {PrimitiveKind::RefillWater, "RefillWater"},
    {PrimitiveKind::DriveNoCut, "DriveNoCut"},
    {PrimitiveKind::DriveClearPath, "DriveClearPath"},
    {PrimitiveKind::FlyToLocation, "FlyToLocation"},
    {PrimitiveKind::PickUpFirefighters, "PickUpFirefighters"},
    {PrimitiveKind::DropOffFirefighters, "DropOffFirefighters"},
    {PrimitiveKind::DropWater, "DropWater"},
};

} // namespace

std::string_view primitive_name(PrimitiveKind k)
{
    for (const auto& e : kPrimitiveNames) {
        if (e.kind == k) return e.name;
    }
    return "Unknown";
}

std::optional<PrimitiveKind> parse_primitive_name(std::string_view name)
{
    for (const auto& e : kPrimitiveNames) {
        if (e.name == name) return e.kind;
    }
    return std::nullopt;
}

bool allowed_for(AgentKind agent, PrimitiveKind prim) noexcept
{
    if (prim == PrimitiveKind::Wait) return true;
    switch (agent) {
    case AgentKind::Firefighter:
        return prim == PrimitiveKind::MoveToLocation || prim == PrimitiveKind::CutXTrees ||
               prim == PrimitiveKind::CutAllTrees || prim == PrimitiveKind::PickUpCivilian ||
               prim == PrimitiveKind::DropOffCivilian || prim == PrimitiveKind::SprayWaterCone ||
               prim == PrimitiveKind::RefillWater;
    case AgentKind::Bulldozer: return prim == PrimitiveKind::DriveNoCut || prim == PrimitiveKind::DriveClearPath;
    case AgentKind::Drone: return prim == PrimitiveKind::FlyToLocation;
    case AgentKind::Helicopter:
        return prim == PrimitiveKind::FlyToLocation || prim == PrimitiveKind::PickUpFirefighters ||
               prim == PrimitiveKind::DropOffFirefighters || prim == PrimitiveKind::RefillWater ||
               prim == PrimitiveKind::DropWater;
    }
    return false;
}

std::string describe(const Primitive& p)
{
    const std::string at = to_string(p.target());
    switch (p.kind) {
    case PrimitiveKind::Wait: return "Do nothing";
    case PrimitiveKind::MoveToLocation: return "Move to " + at;
    case PrimitiveKind::CutXTrees: return "Cut " + std::to_string(p.p1) + " trees in current cell";
    case PrimitiveKind::CutAllTrees: return "Cut all trees in current cell";
    case PrimitiveKind::PickUpCivilian: return "Pick up civilian";
    case PrimitiveKind::DropOffCivilian: return "Drop off civilian";
    case PrimitiveKind::SprayWaterCone: return "Spray water cone toward " + at;
    case PrimitiveKind::RefillWater: return "Refill water";
    case PrimitiveKind::DriveNoCut: return "Drive to " + at + " without cutting";
    case PrimitiveKind::DriveClearPath: return "Drive to " + at + " clearing a path";
    case PrimitiveKind::FlyToLocation: return "Fly to " + at;
    case PrimitiveKind::PickUpFirefighters: return "Pick up firefighters";
    case PrimitiveKind::DropOffFirefighters: return "Drop off firefighters";
    case PrimitiveKind::DropWater: return "Drop water";
    }
    return "Unknown";
}

int Agent::passenger_civilians(const std::vector<Agent>& all) const
{
    int n = 0;
    for (int pid : passengers) {
        for (const auto& a : all) {
            if (a.id == pid) n += a.carried_civilian;
        }
    }
    return n;
}

Agent make_agent(int id, AgentKind kind, Cell pos, const AgentParams& params)
{
    Agent a;
    a.id = id;
    a.kind = kind;
    a.pos = pos;
    a.water = params.of(kind).water_capacity;
    a.vision_radius = params.of(kind).vision_radius;
    return a;
}

void digest_agents(Digest& d, const std::vector<Agent>& agents)
{
    d.add_u64(agents.size());
    for (const auto& a : agents) {
        d.add_i64(a.id);
        d.add_i64(static_cast<int>(a.kind));
        d.add_i64(a.pos.x);
        d.add_i64(a.pos.y);
        d.add_i64(a.alive);
        d.add_i64(a.water);
        d.add_i64(a.carried_civilian);
        d.add_i64(a.aboard);
        d.add_i64(a.plow_lowered);
        d.add_i64(a.reached_target);
        d.add_i64(a.refills);
        d.add_i64(a.water_used);
        d.add_i64(a.cells_moved);
        d.add_u64(a.passengers.size());
        for (int p : a.passengers) d.add_i64(p);
        d.add_i64(a.active.has_value());
        if (a.active) {
            d.add_i64(static_cast<int>(a.active->prim.kind));
            d.add_i64(a.active->prim.p1);
            d.add_i64(a.active->prim.p2);
            d.add_i64(a.active->progress);
            d.add_i64(a.active->phase);
            d.add_i64(a.active->ticks);
        }
        d.add_u64(a.action_history.size());
    }
}

} // namespace wildfire
