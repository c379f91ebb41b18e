#include "wildfire/simulation.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace wildfire {

std::string_view action_type_name(ActionType t)
{
    switch (t) {
    case ActionType::Noop: return "noop";
    case ActionType::Move: return "move";
    case ActionType::Cut: return "cut";
    case ActionType::Spray: return "spray";
    case ActionType::PickUpCivilian: return "pickup_civilian";
    case ActionType::DropOffCivilian: return "dropoff_civilian";
    case ActionType::Refill: return "refill";
    case ActionType::PickUpFirefighters: return "pickup_firefighters";
    case ActionType::DropOffFirefighters: return "dropoff_firefighters";
    case ActionType::DropWater: return "drop_water";
    }
    return "unknown";
}

std::string_view event_name(EventType t)
{
    switch (t) {
    case EventType::TreesCut: return "trees_cut";
    case EventType::AgentLost: return "agent_lost";
    case EventType::CivilianLost: return "civilian_lost";
    case EventType::CivilianPickedUp: return "civilian_picked_up";
    case EventType::CivilianDropped: return "civilian_dropped";
    case EventType::CivilianRescued: return "civilian_rescued";
    case EventType::FirefightersBoarded: return "firefighters_boarded";
    case EventType::FirefightersDropped: return "firefighters_dropped";
    case EventType::WaterSprayed: return "water_sprayed";
    case EventType::WaterDropped: return "water_dropped";
    case EventType::Refilled: return "refilled";
    case EventType::FirefighterArrived: return "firefighter_arrived";
    case EventType::PrimitiveCompleted: return "primitive_completed";
    case EventType::PrimitiveAborted: return "primitive_aborted";
    case EventType::InvalidAction: return "invalid_action";
    }
    return "unknown";
}

bool ground_passable(const WorldMap& world, Cell c) noexcept
{
    if (!world.in_bounds(c)) return false;
    const auto i = world.index(c);
    return world.land[i] != LandType::Water && world.fire[i] != FireState::Burning;
}

bool passable(const WorldMap& world, AgentKind kind, Cell c) noexcept
{
    if (is_air(kind)) return world.in_bounds(c);
    return ground_passable(world, c);
}

Cell line_step(Cell from, Cell to) noexcept
{
    const int dx = std::abs(to.x - from.x);
    const int dy = -std::abs(to.y - from.y);
    const int sx = from.x < to.x ? 1 : -1;
    const int sy = from.y < to.y ? 1 : -1;
    const int err = dx + dy;
    const int e2 = 2 * err;
    Cell next = from;
    if (e2 >= dy) next.x += sx;
    if (e2 <= dx) next.y += sy;
    return next;
}

namespace {

// Reusable A* scratch; stamps avoid clearing between searches.
struct SearchScratch
{
    std::vector<std::uint32_t> stamp;
    std::vector<std::int32_t> g;
    std::vector<std::uint32_t> parent;
    std::vector<std::uint8_t> closed;
    std::uint32_t generation = 0;

    void prepare(std::size_t n)
    {
        if (stamp.size() != n) {
            stamp.assign(n, 0);
            g.assign(n, 0);
            parent.assign(n, 0);
            closed.assign(n, 0);
            generation = 0;
        }
        if (++generation == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            generation = 1;
        }
    }
};

std::optional<std::vector<Cell>> ground_path(const WorldMap& world, Cell from, Cell to)
{
    if (!ground_passable(world, to)) return std::nullopt;
    thread_local SearchScratch s;
    s.prepare(world.size());

    using Node = std::tuple<std::int32_t, std::uint32_t>; // (f, cell index)
    std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
    const auto start = static_cast<std::uint32_t>(world.index(from));
    const auto goal = static_cast<std::uint32_t>(world.index(to));
    s.stamp[start] = s.generation;
    s.g[start] = 0;
    s.closed[start] = 0;
    open.emplace(chebyshev(from, to), start);

    while (!open.empty()) {
        const auto [f, cur] = open.top();
        open.pop();
        if (s.closed[cur]) continue;
        s.closed[cur] = 1;
        if (cur == goal) break;
        const Cell c = world.cell_at(cur);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const Cell nb{c.x + dx, c.y + dy};
                if (!ground_passable(world, nb)) continue;
                const auto ni = static_cast<std::uint32_t>(world.index(nb));
                const auto ng = s.g[cur] + 1;
                if (s.stamp[ni] != s.generation) {
                    s.stamp[ni] = s.generation;
                    s.closed[ni] = 0;
                } else if (s.closed[ni] || ng >= s.g[ni]) {
                    continue;
                }
                s.g[ni] = ng;
                s.parent[ni] = cur;
                open.emplace(ng + chebyshev(nb, to), ni);
            }
        }
    }
    if (s.stamp[goal] != s.generation || !s.closed[goal]) return std::nullopt;

    std::vector<Cell> path;
    for (auto at = goal; at != start; at = s.parent[at]) {
        path.push_back(world.cell_at(at));
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace

std::optional<std::vector<Cell>> find_path(const WorldMap& world, AgentKind kind, Cell from, Cell to)
{
    if (!world.in_bounds(from) || !world.in_bounds(to)) return std::nullopt;
    if (from == to) return std::vector<Cell>{};
    if (is_air(kind)) {
        std::vector<Cell> path;
        for (Cell c = from; c != to;) {
            c = line_step(c, to);
            path.push_back(c);
        }
        return path;
    }
    return ground_path(world, from, to);
}

std::optional<Cell> plan_path(const WorldMap& world, AgentKind kind, Cell from, Cell to)
{
    if (is_air(kind)) {
        if (!world.in_bounds(to) || from == to) return std::nullopt;
        return line_step(from, to);
    }
    auto path = find_path(world, kind, from, to);
    if (!path || path->empty()) return std::nullopt;
    return path->front();
}

namespace {

std::optional<Cell> nearest_civilian(const WorldMap& world, Cell at, int radius)
{
    // Distance rings outward; row-major within a ring.
    for (int r = 0; r <= radius; ++r) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                const Cell c{at.x + dx, at.y + dy};
                if (world.in_bounds(c) && world.civilians[world.index(c)] > 0) return c;
            }
        }
    }
    return std::nullopt;
}

bool near_water(const WorldMap& world, Cell at, int radius)
{
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const Cell c{at.x + dx, at.y + dy};
            if (world.in_bounds(c) && world.land[world.index(c)] == LandType::Water) return true;
        }
    }
    return false;
}

Agent* find_agent(std::vector<Agent>& agents, int id)
{
    if (id >= 1 && static_cast<std::size_t>(id) <= agents.size() && agents[static_cast<std::size_t>(id) - 1].id == id) {
        return &agents[static_cast<std::size_t>(id) - 1];
    }
    for (auto& a : agents) {
        if (a.id == id) return &a;
    }
    return nullptr;
}

PrimitiveStep fail(std::string reason)
{
    PrimitiveStep s;
    s.completed = true;
    s.failed = true;
    s.reason = std::move(reason);
    return s;
}

PrimitiveStep movement_step(Agent& agent, const WorldMap& world, const AgentParams& params)
{
    auto& active = *agent.active;
    const Cell target = active.prim.target();
    if (!world.in_bounds(target)) return fail("target out of bounds");
    PrimitiveStep out;
    if (agent.pos == target) {
        out.completed = true;
        return out;
    }
    const auto& kp = params.of(agent.kind);
    if (++active.phase < kp.ticks_per_move) return out;
    active.phase = 0;

    out.action.type = ActionType::Move;
    out.action.plow = active.prim.kind == PrimitiveKind::DriveClearPath;
    Cell at = agent.pos;
    for (int k = 0; k < kp.cells_per_move && at != target; ++k) {
        Cell next;
        if (is_air(agent.kind)) {
            next = line_step(at, target);
        } else {
            const bool cached = active.path_pos < active.path.size() &&
                                chebyshev(active.path[active.path_pos], at) == 1 &&
                                ground_passable(world, active.path[active.path_pos]) && active.path.back() == target;
            if (!cached) {
                auto route = find_path(world, agent.kind, at, target);
                if (!route || route->empty()) {
                    if (out.action.steps.empty()) return fail("unreachable");
                    break;
                }
                active.path = std::move(*route);
                active.path_pos = 0;
            }
            next = active.path[active.path_pos++];
        }
        out.action.steps.push_back(next);
        at = next;
    }
    out.completed = at == target;
    return out;
}

} // namespace

PrimitiveStep execute_primitive(Agent& agent, const WorldMap& world, const AgentParams& params)
{
    if (!agent.alive || !agent.active) return fail("no active primitive");
    auto& active = *agent.active;
    const auto kind = active.prim.kind;
    if (!allowed_for(agent.kind, kind)) {
        return fail(std::string(primitive_name(kind)) + " is not available to " + std::string(kind_name(agent.kind)));
    }
    if (agent.aboard != 0 && kind != PrimitiveKind::Wait) return fail("aboard a helicopter");

    const auto here = world.index(agent.pos);
    PrimitiveStep out;
    switch (kind) {
    case PrimitiveKind::Wait: out.completed = true; return out;

    case PrimitiveKind::MoveToLocation:
    case PrimitiveKind::DriveNoCut:
    case PrimitiveKind::DriveClearPath:
    case PrimitiveKind::FlyToLocation: return movement_step(agent, world, params);

    case PrimitiveKind::CutAllTrees:
        if (world.trees[here] == 0) {
            out.completed = true;
            return out;
        }
        out.action.type = ActionType::Cut;
        out.completed = world.trees[here] == 1;
        return out;

    case PrimitiveKind::CutXTrees:
        if (active.prim.p1 < 1) return fail("tree count must be at least 1");
        if (active.progress >= active.prim.p1 || world.trees[here] == 0) {
            out.completed = true;
            return out;
        }
        out.action.type = ActionType::Cut;
        out.completed = active.progress + 1 >= active.prim.p1 || world.trees[here] == 1;
        return out;

    case PrimitiveKind::PickUpCivilian:
        if (agent.carried_civilian > 0) return fail("already carrying a civilian");
        if (!nearest_civilian(world, agent.pos, params.pickup_radius)) return fail("no civilian nearby");
        out.action.type = ActionType::PickUpCivilian;
        out.completed = true;
        return out;

    case PrimitiveKind::DropOffCivilian:
        if (agent.carried_civilian == 0) return fail("not carrying a civilian");
        out.action.type = ActionType::DropOffCivilian;
        out.completed = true;
        return out;

    case PrimitiveKind::SprayWaterCone: {
        if (agent.water <= 0) return fail("no water");
        if (active.prim.target() == agent.pos) return fail("spray target is the current cell");
        out.action.type = ActionType::Spray;
        out.action.target = active.prim.target();
        out.completed = true;
        return out;
    }

    case PrimitiveKind::RefillWater:
        if (!near_water(world, agent.pos, params.refill_radius)) return fail("no water source nearby");
        out.action.type = ActionType::Refill;
        out.completed = true;
        return out;

    case PrimitiveKind::PickUpFirefighters:
        if (static_cast<int>(agent.passengers.size()) >= params.of(agent.kind).seats) return fail("no free seats");
        out.action.type = ActionType::PickUpFirefighters;
        out.completed = true;
        return out;

    case PrimitiveKind::DropOffFirefighters:
        if (agent.passengers.empty()) return fail("no passengers");
        if (!ground_passable(world, agent.pos)) return fail("cannot unload over impassable ground");
        out.action.type = ActionType::DropOffFirefighters;
        out.completed = true;
        return out;

    case PrimitiveKind::DropWater:
        if (agent.water <= 0) return fail("no water");
        out.action.type = ActionType::DropWater;
        out.completed = true;
        return out;
    }
    return fail("unknown primitive");
}

const std::vector<std::uint8_t>& update_visibility(WorldMap& world, const std::vector<Agent>& agents)
{
    ++world.visibility_epoch;
    if (world.visibility_epoch == 0) {
        std::fill(world.seen_epoch.begin(), world.seen_epoch.end(), 0);
        world.visibility_epoch = 1;
    }
    const auto epoch = world.visibility_epoch;
    for (const auto& a : agents) {
        if (!a.alive) continue;
        const int r = a.vision_radius;
        const int x0 = std::max(0, a.pos.x - r);
        const int x1 = std::min(world.width - 1, a.pos.x + r);
        const int y0 = std::max(0, a.pos.y - r);
        const int y1 = std::min(world.height - 1, a.pos.y + r);
        for (int y = y0; y <= y1; ++y) {
            auto i = world.index({x0, y});
            for (int x = x0; x <= x1; ++x, ++i) {
                world.revealed[i] = 1;
                world.seen_epoch[i] = epoch;
                world.known_trees[i] = world.trees[i];
            }
        }
    }
    return world.revealed;
}

void assign_primitive(Agent& agent, const Primitive& prim)
{
    ActivePrimitive active;
    active.prim = prim;
    agent.active = std::move(active);
    agent.plow_lowered = agent.kind == AgentKind::Bulldozer && prim.kind == PrimitiveKind::DriveClearPath;
}

namespace {

// Removes all trees from a cell on behalf of an agent; returns trees removed.
int clear_cell(WorldMap& world, Cell c)
{
    const auto i = world.index(c);
    const int removed = world.trees[i];
    world.trees[i] = 0;
    world.flags[i] |= cell_flag::kCleared;
    world.tally.trees_cut += removed;
    if (world.has_flag(i, cell_flag::kLabeled)) world.tally.trees_cut_labeled += removed;
    return removed;
}

bool primitive_done(const Agent& agent, const WorldMap& world)
{
    const auto& active = *agent.active;
    switch (active.prim.kind) {
    case PrimitiveKind::MoveToLocation:
    case PrimitiveKind::DriveNoCut:
    case PrimitiveKind::DriveClearPath:
    case PrimitiveKind::FlyToLocation: return agent.pos == active.prim.target();
    case PrimitiveKind::CutAllTrees: return world.trees[world.index(agent.pos)] == 0;
    case PrimitiveKind::CutXTrees:
        return active.progress >= active.prim.p1 || world.trees[world.index(agent.pos)] == 0;
    default: return true;
    }
}

struct Emitted
{
    PrimitiveStep step;
    bool rejected = false;
};

} // namespace

StepResult world_step(WorldMap& world, std::vector<Agent>& agents, const FireConfig& fire_cfg,
                      const AgentParams& params, StepOptions opts)
{
    StepResult result;
    auto& events = result.events;
    const auto t = world.step;
    auto emit = [&](EventType type, int agent, Cell cell, std::int64_t count = 0, std::string detail = {}) {
        events.push_back({t, type, agent, cell, count, std::move(detail)});
    };

    std::vector<std::size_t> order(agents.size());
    for (std::size_t k = 0; k < agents.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return agents[a].id < agents[b].id; });

    // (1) primitives emit actions
    std::vector<std::optional<Emitted>> emitted(agents.size());
    for (auto k : order) {
        auto& a = agents[k];
        if (!a.alive || !a.active) continue;
        ++a.active->ticks;
        emitted[k] = Emitted{execute_primitive(a, world, params)};
    }

    // (2) resolve in ascending id order
    for (auto k : order) {
        if (!emitted[k]) continue;
        auto& a = agents[k];
        auto& em = *emitted[k];
        const auto& act = em.step.action;
        auto reject = [&](std::string why) {
            em.rejected = true;
            emit(EventType::InvalidAction, a.id, a.pos, 0, std::move(why));
        };
        switch (act.type) {
        case ActionType::Noop: break;
        case ActionType::Move: {
            if (act.plow) {
                const int removed = clear_cell(world, a.pos);
                if (removed > 0) emit(EventType::TreesCut, a.id, a.pos, removed, "plow");
            }
            for (const Cell c : act.steps) {
                a.pos = c;
                ++a.cells_moved;
                if (act.plow) {
                    const int removed = clear_cell(world, c);
                    if (removed > 0) emit(EventType::TreesCut, a.id, c, removed, "plow");
                }
            }
            for (int pid : a.passengers) {
                if (auto* p = find_agent(agents, pid)) p->pos = a.pos;
            }
            break;
        }
        case ActionType::Cut: {
            const auto i = world.index(a.pos);
            if (world.trees[i] == 0) {
                reject("no trees left to cut");
                break;
            }
            --world.trees[i];
            if (world.trees[i] == 0) world.flags[i] |= cell_flag::kCleared;
            ++world.tally.trees_cut;
            if (world.has_flag(i, cell_flag::kLabeled)) ++world.tally.trees_cut_labeled;
            ++a.active->progress;
            emit(EventType::TreesCut, a.id, a.pos, 1);
            break;
        }
        case ActionType::Spray: {
            if (a.water <= 0) {
                reject("no water");
                break;
            }
            const auto pattern =
                WaterPattern::cone(a.pos, act.target.x - a.pos.x, act.target.y - a.pos.y, params.cone_half_angle_deg,
                                   params.cone_range);
            const auto res = apply_water(world, pattern, fire_cfg);
            --a.water;
            ++a.water_used;
            emit(EventType::WaterSprayed, a.id, act.target, static_cast<std::int64_t>(res.affected.size()));
            break;
        }
        case ActionType::PickUpCivilian: {
            const auto c = nearest_civilian(world, a.pos, params.pickup_radius);
            if (!c || a.carried_civilian > 0) {
                reject("no civilian to pick up");
                break;
            }
            --world.civilians[world.index(*c)];
            a.carried_civilian = 1;
            emit(EventType::CivilianPickedUp, a.id, *c, 1);
            break;
        }
        case ActionType::DropOffCivilian: {
            if (a.carried_civilian == 0) {
                reject("not carrying a civilian");
                break;
            }
            a.carried_civilian = 0;
            const auto i = world.index(a.pos);
            if (world.has_flag(i, cell_flag::kTarget)) {
                ++world.tally.civilians_rescued;
                emit(EventType::CivilianRescued, a.id, a.pos, 1);
            } else {
                ++world.civilians[i];
                emit(EventType::CivilianDropped, a.id, a.pos, 1);
            }
            break;
        }
        case ActionType::Refill:
            a.water = params.of(a.kind).water_capacity;
            ++a.refills;
            emit(EventType::Refilled, a.id, a.pos, a.water);
            break;
        case ActionType::PickUpFirefighters: {
            const int seats = params.of(a.kind).seats;
            int boarded = 0;
            for (auto j : order) {
                if (static_cast<int>(a.passengers.size()) >= seats) break;
                auto& ff = agents[j];
                if (ff.kind != AgentKind::Firefighter || !ff.alive || ff.aboard != 0) continue;
                if (chebyshev(ff.pos, a.pos) > params.pickup_radius) continue;
                ff.aboard = a.id;
                ff.pos = a.pos;
                if (ff.active) {
                    emit(EventType::PrimitiveAborted, ff.id, ff.pos, 0, describe(ff.active->prim) + ": boarded");
                    ff.action_history.push_back(describe(ff.active->prim) + " [interrupted: boarded]");
                    ff.active.reset();
                    emitted[j].reset();
                }
                a.passengers.push_back(ff.id);
                ++boarded;
            }
            if (boarded == 0) {
                reject("no firefighters in boarding range");
                break;
            }
            emit(EventType::FirefightersBoarded, a.id, a.pos, boarded);
            break;
        }
        case ActionType::DropOffFirefighters: {
            if (a.passengers.empty() || !ground_passable(world, a.pos)) {
                reject("cannot drop off firefighters here");
                break;
            }
            const auto n = static_cast<std::int64_t>(a.passengers.size());
            for (int pid : a.passengers) {
                if (auto* p = find_agent(agents, pid)) {
                    p->aboard = 0;
                    p->pos = a.pos;
                }
            }
            a.passengers.clear();
            emit(EventType::FirefightersDropped, a.id, a.pos, n);
            break;
        }
        case ActionType::DropWater: {
            if (a.water <= 0) {
                reject("no water");
                break;
            }
            const auto res = apply_water(world, WaterPattern::area(a.pos, params.drop_radius), fire_cfg);
            --a.water;
            ++a.water_used;
            emit(EventType::WaterDropped, a.id, a.pos, static_cast<std::int64_t>(res.affected.size()));
            break;
        }
        }
    }

    // Completion is judged on the post-resolution state.
    const auto tick_cap = static_cast<int>(std::min<std::int64_t>(
        static_cast<std::int64_t>(world.width) * world.height * 3, 1'000'000'000));
    for (auto k : order) {
        auto& a = agents[k];
        if (!emitted[k] || !a.active) continue;
        const auto& em = *emitted[k];
        const bool multi = is_multi_step(a.active->prim.kind);
        bool done = em.step.failed || primitive_done(a, world);
        bool failed = em.step.failed;
        std::string reason = em.step.reason;
        if (!multi && em.rejected) failed = true, reason = "rejected";
        if (!done && a.active->ticks >= tick_cap) {
            done = true;
            failed = true;
            reason = "timed out";
        }
        if (!done) continue;
        std::string entry = describe(a.active->prim);
        if (failed) {
            entry += " [failed: " + reason + "]";
            emit(EventType::PrimitiveAborted, a.id, a.pos, 0, entry);
        } else {
            emit(EventType::PrimitiveCompleted, a.id, a.pos, 0, entry);
        }
        a.action_history.push_back(std::move(entry));
        a.active.reset();
        a.plow_lowered = false;
    }

    // (3) fire
    result.fire = fire_step(world, t, fire_cfg, opts.fire_exec);

    // (4) losses on cells that just started burning
    for (const auto& tr : result.fire.transitions) {
        if (tr.to != FireState::Burning) continue;
        auto& civ = world.civilians[tr.cell];
        if (civ > 0) {
            world.tally.civilians_lost += civ;
            emit(EventType::CivilianLost, 0, world.cell_at(tr.cell), civ);
            civ = 0;
        }
    }
    for (auto k : order) {
        auto& a = agents[k];
        if (!a.alive || is_air(a.kind) || a.aboard != 0) continue;
        if (world.fire[world.index(a.pos)] != FireState::Burning) continue;
        a.alive = false;
        ++world.tally.agents_lost;
        emit(EventType::AgentLost, a.id, a.pos, 1);
        if (a.carried_civilian > 0) {
            world.tally.civilians_lost += a.carried_civilian;
            emit(EventType::CivilianLost, a.id, a.pos, a.carried_civilian);
            a.carried_civilian = 0;
        }
        if (a.active) {
            a.action_history.push_back(describe(a.active->prim) + " [failed: agent lost]");
            a.active.reset();
        }
    }

    // Level bookkeeping: arrivals and drones over fire.
    std::int64_t over_fire = 0;
    for (auto k : order) {
        auto& a = agents[k];
        if (!a.alive) continue;
        const auto i = world.index(a.pos);
        if (a.kind == AgentKind::Firefighter && a.aboard == 0 && !a.reached_target &&
            world.has_flag(i, cell_flag::kTarget)) {
            a.reached_target = true;
            ++world.tally.firefighters_arrived;
            emit(EventType::FirefighterArrived, a.id, a.pos, 1);
        }
        // Only drones that have flown count; fire drifting under a parked drone is not scouting.
        if (a.kind == AgentKind::Drone && a.cells_moved > 0 && is_spreading(world.fire[i])) ++over_fire;
    }
    world.tally.drones_over_fire = over_fire;
    world.tally.max_drones_over_fire = std::max(world.tally.max_drones_over_fire, over_fire);

    // (5) visibility, then the clock
    update_visibility(world, agents);
    ++world.step;
    return result;
}

} // namespace wildfire
