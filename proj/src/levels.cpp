#include "wildfire/levels.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>

#include "wildfire/rng.hpp"
#include "wildfire/simulation.hpp"

namespace wildfire {

std::string_view behavior_name(Behavior b)
{
    switch (b) {
    case Behavior::TD: return "TD";
    case Behavior::AC: return "AC";
    case Behavior::SR: return "SR";
    case Behavior::OS: return "OS";
    case Behavior::RC: return "RC";
    case Behavior::PA: return "PA";
    case Behavior::OP: return "OP";
    }
    return "?";
}

std::string_view behavior_long_name(Behavior b)
{
    switch (b) {
    case Behavior::TD: return "Task Designation";
    case Behavior::AC: return "Agent Capitalization";
    case Behavior::SR: return "Spatial Reasoning";
    case Behavior::OS: return "Observation Sharing";
    case Behavior::RC: return "Realtime Coordination";
    case Behavior::PA: return "Plan Adaptation";
    case Behavior::OP: return "Objective Prioritization";
    }
    return "?";
}

Behavior parse_behavior(std::string_view s)
{
    for (auto b : kAllBehaviors) {
        if (behavior_name(b) == s) return b;
    }
    throw std::invalid_argument("unknown behavior: " + std::string(s));
}

int Roster::count(AgentKind k) const noexcept
{
    switch (k) {
    case AgentKind::Firefighter: return firefighters;
    case AgentKind::Bulldozer: return bulldozers;
    case AgentKind::Drone: return drones;
    case AgentKind::Helicopter: return helicopters;
    }
    return 0;
}

std::string Roster::to_string() const
{
    std::string out;
    auto part = [&](int n, char c) {
        if (n == 0) return;
        if (!out.empty()) out += ", ";
        out += std::to_string(n) + " " + c;
    };
    part(firefighters, 'F');
    part(bulldozers, 'B');
    part(drones, 'D');
    part(helicopters, 'H');
    return out;
}

bool LevelSpec::has_tag(Behavior b) const noexcept
{
    return std::find(tags.begin(), tags.end(), b) != tags.end();
}

namespace {

using B = Behavior;
using F = LevelFamily;

LevelSpec row(std::string name, F family, std::string objective, Roster roster, int map, int max_score,
              std::vector<Behavior> tags, int max_steps, std::vector<std::uint64_t> seeds)
{
    LevelSpec s;
    s.name = std::move(name);
    s.family = family;
    s.objective = std::move(objective);
    s.roster = roster;
    s.map_size = map;
    s.scoring = max_score > 0 ? ScoringKind::Finite : ScoringKind::OpenEnded;
    s.max_score = max_score;
    s.tags = std::move(tags);
    s.max_steps = max_steps;
    s.seeds = std::move(seeds);
    return s;
}

std::vector<LevelSpec> make_catalog()
{
    const std::string cut_cells = "Cut all trees in labeled cells";
    const std::string cut_lines = "Cut all the labeled lines of trees";
    const std::string scout = "Scout and confirm a fire within the map";
    const std::string transport = "Transport all firefighters to a target location";
    const std::string rescue = "Rescue all civilians to a target location";
    const std::string locate_rescue = "Locate and rescue all civilians to a target location";
    const std::string unknown_fire = "Suppress the fire at an unknown location";

    std::vector<LevelSpec> c;
    c.push_back(row("Cut Trees: Sparse (small)", F::CutTreesSparse, cut_cells, {3, 0, 0, 0}, 30, 18, {B::TD}, 200,
                    {375, 483, 43, 6370, 9964}));
    c.push_back(row("Cut Trees: Sparse (large)", F::CutTreesSparse, cut_cells, {10, 0, 0, 0}, 60, 75, {B::TD}, 400,
                    {212, 981, 1530}));
    c.push_back(row("Cut Trees: Lines (small)", F::CutTreesLines, cut_lines, {2, 1, 0, 0}, 30, 30, {B::TD, B::AC},
                    200, {9259, 4881, 8456}));
    c.back().cut_lines = 2;
    c.push_back(row("Cut Trees: Lines (large)", F::CutTreesLines, cut_lines, {4, 3, 0, 0}, 60, 105, {B::TD, B::AC},
                    400, {820, 5406, 6503}));
    c.back().cut_lines = 7;
    c.push_back(row("Scout Fire (small)", F::ScoutFire, scout, {0, 0, 3, 0}, 100, 2, {B::TD, B::SR, B::OS}, 200,
                    {4651, 6841, 7593, 1012, 8528}));
    c.push_back(row("Scout Fire (large)", F::ScoutFire, scout, {0, 0, 5, 0}, 250, 2, {B::TD, B::SR, B::OS}, 400,
                    {5324, 3603, 8592}));
    c.push_back(row("Transport Firefighters (small)", F::TransportFirefighters, transport, {6, 0, 0, 1}, 100, 6,
                    {B::AC, B::SR, B::RC}, 200, {283, 2461, 2478, 7622, 7647}));
    c.push_back(row("Transport Firefighters (large)", F::TransportFirefighters, transport, {12, 0, 0, 2}, 250, 12,
                    {B::AC, B::SR, B::RC}, 400, {741, 7305, 9528}));
    c.push_back(row("Rescue Civilians: Known Location (small)", F::RescueKnown, rescue, {3, 0, 0, 0}, 40, 3,
                    {B::TD, B::SR, B::PA}, 200, {9502, 3972, 6545, 5884, 8491}));
    c.push_back(row("Rescue Civilians: Known Location (large)", F::RescueKnown, rescue, {3, 0, 0, 0}, 40, 9,
                    {B::TD, B::SR, B::PA}, 400, {7979, 1539, 2269}));
    c.push_back(row("Rescue Civilians: Search and Rescue", F::SearchAndRescue, locate_rescue, {5, 0, 2, 0}, 100, 5,
                    {B::TD, B::SR, B::OS, B::PA}, 400, {8530, 9838, 1403}));
    c.push_back(row("Rescue Civilians: Search + Rescue + Transport", F::SearchRescueTransport, locate_rescue,
                    {10, 0, 2, 2}, 150, 10, {B::TD, B::AC, B::SR, B::OS, B::RC, B::PA}, 400, {7711, 1093, 3259}));
    c.push_back(row("Suppress Fire: Extinguish", F::SuppressExtinguish,
                    "Extinguish the fire at a known location with water", {8, 0, 0, 0}, 60, 0,
                    {B::TD, B::SR, B::PA}, 400, {2994, 4936, 4847}));
    c.push_back(row("Suppress Fire: Contain", F::SuppressContain,
                    "Contain the fire at a known location without water", {5, 1, 0, 0}, 60, 0,
                    {B::TD, B::AC, B::SR, B::PA}, 400, {733, 7765, 8049}));
    c.push_back(row("Suppress Fire: Locate and Suppress", F::SuppressLocate, unknown_fire, {5, 1, 2, 0}, 100, 0,
                    {B::TD, B::AC, B::OS, B::SR, B::PA}, 400, {2142, 2628, 5280, 3971}));
    c.push_back(row("Suppress Fire: Locate + Deploy + Suppress", F::SuppressLocateDeploy, unknown_fire,
                    {10, 0, 2, 2}, 150, 0, {B::TD, B::AC, B::OS, B::SR, B::RC, B::PA}, 400, {6309, 3821, 6117}));
    c.push_back(row("Full Environment", F::FullEnvironment, "Locate and Suppress the fire while rescuing civilians",
                    {10, 1, 2, 2}, 200, 0, {B::TD, B::AC, B::SR, B::OS, B::RC, B::PA, B::OP}, 800,
                    {6434, 1908, 9424, 9500}));

    for (auto& s : c) {
        switch (s.family) {
        case F::ScoutFire:
        case F::SuppressLocate:
        case F::SuppressLocateDeploy: s.has_fire = true; break;
        case F::SuppressExtinguish:
        case F::SuppressContain:
            s.has_fire = true;
            s.fire_known = true;
            break;
        case F::FullEnvironment:
            s.has_fire = true;
            s.civilians = 5;
            break;
        case F::RescueKnown:
            s.civilians = s.max_score;
            s.civilians_known = true;
            break;
        case F::SearchAndRescue:
        case F::SearchRescueTransport: s.civilians = s.max_score; break;
        default: break;
        }
    }
    return c;
}

std::string normalize_name(std::string_view s)
{
    std::string out;
    bool space = false;
    for (char ch : s) {
        if (ch == ' ' || ch == '\t') {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(ch);
    }
    return out;
}

} // namespace

const std::vector<LevelSpec>& level_catalog()
{
    static const std::vector<LevelSpec> catalog = make_catalog();
    return catalog;
}

const LevelSpec& find_level(std::string_view name)
{
    auto wanted = normalize_name(name);
    // The seeds table names the fourth Suppress row differently.
    if (wanted == "Suppress Fire: Locate + Transport + Suppress") wanted = "Suppress Fire: Locate + Deploy + Suppress";
    for (const auto& s : level_catalog()) {
        if (s.name == wanted) return s;
    }
    std::string msg = "unknown level '" + std::string(name) + "'; valid levels:";
    for (const auto& s : level_catalog()) msg += "\n  " + s.name;
    throw UnknownLevel(msg);
}

std::string LevelInstance::task_description() const
{
    std::string out = spec.objective + ".";
    auto cells = [](const std::vector<Cell>& v) {
        std::string s;
        for (const auto& c : v) {
            if (!s.empty()) s += ", ";
            s += to_string(c);
        }
        return s;
    };
    switch (spec.family) {
    case F::CutTreesSparse: out += " Labeled cells: " + cells(labeled_cells) + "."; break;
    case F::CutTreesLines:
        out += " Labeled lines:";
        for (const auto& line : labeled_lines) out += " " + to_string(line.front()) + " to " + to_string(line.back()) + ";";
        break;
    case F::TransportFirefighters:
    case F::RescueKnown:
    case F::SearchAndRescue:
    case F::SearchRescueTransport:
    case F::FullEnvironment:
        if (!target_region.empty()) {
            out += " Target location: " + to_string(target_region.front()) + " to " + to_string(target_region.back()) + ".";
        }
        break;
    default: break;
    }
    if (spec.civilians_known) out += " Civilians at: " + cells(civilian_cells) + ".";
    if (spec.fire_known && fire_origin) out += " Fire at: " + to_string(*fire_origin) + ".";
    return out;
}

namespace {

struct Builder
{
    WorldMap& world;
    CounterRng rng;
    std::vector<std::int32_t> component; // label per cell, -1 for water
    std::vector<std::uint32_t> main_cells; // largest ground component, ascending
    std::vector<std::uint8_t> taken;

    Builder(WorldMap& w, std::uint64_t seed) : world(w), rng(hash_key({seed, 0x1e7e1ULL}))
    {
        label_components();
        taken.assign(world.size(), 0);
    }

    void label_components()
    {
        component.assign(world.size(), -1);
        std::int32_t next = 0;
        std::size_t best_size = 0;
        std::int32_t best = -1;
        std::deque<std::uint32_t> queue;
        for (std::size_t s = 0; s < world.size(); ++s) {
            if (component[s] != -1 || world.land[s] == LandType::Water) continue;
            std::size_t count = 0;
            component[s] = next;
            queue.push_back(static_cast<std::uint32_t>(s));
            while (!queue.empty()) {
                const auto i = queue.front();
                queue.pop_front();
                ++count;
                const Cell c = world.cell_at(i);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const Cell n{c.x + dx, c.y + dy};
                        if (!world.in_bounds(n)) continue;
                        const auto j = world.index(n);
                        if (component[j] != -1 || world.land[j] == LandType::Water) continue;
                        component[j] = next;
                        queue.push_back(static_cast<std::uint32_t>(j));
                    }
                }
            }
            if (count > best_size) {
                best_size = count;
                best = next;
            }
            ++next;
        }
        if (best < 0) throw GenerationRefused("map has no land");
        for (std::size_t i = 0; i < world.size(); ++i) {
            if (component[i] == best) main_cells.push_back(static_cast<std::uint32_t>(i));
        }
    }

    bool in_main(Cell c) const
    {
        return world.in_bounds(c) && component[world.index(c)] == component[main_cells.front()];
    }

    Cell sample(const std::function<bool(Cell)>& ok, std::string_view what)
    {
        for (int attempt = 0; attempt < 4096; ++attempt) {
            const Cell c = world.cell_at(main_cells[rng.next_below(main_cells.size())]);
            if (!taken[world.index(c)] && ok(c)) return c;
        }
        for (auto i : main_cells) {
            const Cell c = world.cell_at(i);
            if (!taken[i] && ok(c)) return c;
        }
        throw GenerationRefused("cannot place " + std::string(what));
    }

    void take(Cell c) { taken[world.index(c)] = 1; }
};

void reveal(WorldMap& world, Cell c)
{
    if (!world.in_bounds(c)) return;
    const auto i = world.index(c);
    world.revealed[i] = 1;
    world.known_trees[i] = world.trees[i];
}

LandType forest_with(int trees)
{
    return trees >= 3 ? LandType::DenseForest : trees == 2 ? LandType::MediumForest : LandType::LightForest;
}

void place_sparse(Builder& b, LevelInstance& level)
{
    auto& w = b.world;
    std::vector<std::uint32_t> order = b.main_cells;
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[b.rng.next_below(k)]);
    int remaining = level.spec.max_score;
    for (auto i : order) {
        if (remaining == 0) break;
        if (b.taken[i] || !is_forest(w.land[i]) || w.trees[i] > remaining) continue;
        remaining -= w.trees[i];
        level.labeled_cells.push_back(w.cell_at(i));
        b.taken[i] = 1;
    }
    while (remaining > 0) {
        const Cell c = b.sample([&](Cell c) { return !is_forest(w.land[w.index(c)]); }, "labeled cell");
        const int n = std::min(3, remaining);
        w.set_land(c, forest_with(n));
        remaining -= n;
        level.labeled_cells.push_back(c);
        b.take(c);
    }
    std::sort(level.labeled_cells.begin(), level.labeled_cells.end(),
              [](Cell a, Cell c) { return std::tie(a.y, a.x) < std::tie(c.y, c.x); });
    for (auto c : level.labeled_cells) w.flags[w.index(c)] |= cell_flag::kLabeled;
}

void place_lines(Builder& b, LevelInstance& level)
{
    auto& w = b.world;
    for (int line = 0; line < level.spec.cut_lines; ++line) {
        bool placed = false;
        for (int attempt = 0; attempt < 8192 && !placed; ++attempt) {
            const Cell start = w.cell_at(b.main_cells[b.rng.next_below(b.main_cells.size())]);
            const bool horizontal = b.rng.next_below(2) == 0;
            std::vector<Cell> cells;
            for (int k = 0; k < kLineLength; ++k) {
                const Cell c = horizontal ? Cell{start.x + k, start.y} : Cell{start.x, start.y + k};
                if (!b.in_main(c) || b.taken[w.index(c)]) break;
                cells.push_back(c);
            }
            if (static_cast<int>(cells.size()) != kLineLength) continue;
            for (auto c : cells) {
                w.set_land(c, LandType::DenseForest);
                w.flags[w.index(c)] |= cell_flag::kLabeled;
                b.take(c);
            }
            level.labeled_lines.push_back(std::move(cells));
            placed = true;
        }
        if (!placed) throw GenerationRefused("cannot place labeled line");
    }
}

void place_target_region(Builder& b, LevelInstance& level, int min_dist, int max_dist)
{
    auto& w = b.world;
    const Cell center = b.sample(
        [&](Cell c) {
            const int d = chebyshev(c, level.muster);
            if (d < min_dist || d > max_dist) return false;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const Cell n{c.x + dx, c.y + dy};
                    if (!b.in_main(n) || b.taken[w.index(n)]) return false;
                }
            }
            return true;
        },
        "target region");
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const Cell n{center.x + dx, center.y + dy};
            w.flags[w.index(n)] |= cell_flag::kTarget;
            level.target_region.push_back(n);
            b.take(n);
        }
    }
}

void place_fire(Builder& b, LevelInstance& level)
{
    auto& w = b.world;
    const int size = level.spec.map_size;
    const Cell origin = b.sample(
        [&](Cell c) {
            const int d = chebyshev(c, level.muster);
            return d >= size / 5 && d <= size / 3;
        },
        "fire origin");
    // A dense patch keeps the fire alive long enough to matter.
    for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
            const Cell c{origin.x + dx, origin.y + dy};
            if (!w.in_bounds(c) || w.land[w.index(c)] == LandType::Water || b.taken[w.index(c)]) continue;
            w.set_land(c, LandType::DenseForest);
            b.take(c);
        }
    }
    const auto i = w.index(origin);
    w.fire[i] = FireState::Ignited;
    w.fire_age[i] = 0;
    level.fire_origin = origin;
}

void place_civilians(Builder& b, LevelInstance& level, int max_dist_from_target)
{
    auto& w = b.world;
    const Cell anchor = level.target_region.empty() ? level.muster : level.target_region[4];
    for (int k = 0; k < level.spec.civilians; ++k) {
        const Cell c = b.sample(
            [&](Cell c) {
                const int d = chebyshev(c, anchor);
                if (d < 3 || d > max_dist_from_target) return false;
                return !level.fire_origin || chebyshev(c, *level.fire_origin) > 3;
            },
            "civilian");
        w.civilians[w.index(c)] = 1;
        level.civilian_cells.push_back(c);
        b.take(c);
    }
    w.tally.civilians_initial = w.civilians_on_map();
}

std::vector<Agent> spawn_agents(Builder& b, const LevelInstance& level, const AgentParams& params)
{
    auto& w = b.world;
    const int n = level.spec.roster.total();
    std::vector<Cell> spots;
    for (int r = 0; static_cast<int>(spots.size()) < n && r < std::max(w.width, w.height); ++r) {
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                const Cell c{level.muster.x + dx, level.muster.y + dy};
                if (!b.in_main(c)) continue;
                const auto i = w.index(c);
                if (w.has_flag(i, cell_flag::kTarget) || w.has_flag(i, cell_flag::kLabeled) || w.civilians[i] > 0 ||
                    is_active_fire(w.fire[i])) {
                    continue;
                }
                spots.push_back(c);
            }
        }
    }
    if (spots.empty()) throw GenerationRefused("no spawn cells");
    std::vector<Agent> agents;
    int id = 1;
    for (auto kind : kAllAgentKinds) {
        for (int k = 0; k < level.spec.roster.count(kind); ++k, ++id) {
            const Cell at = spots[static_cast<std::size_t>(id - 1) % spots.size()];
            agents.push_back(make_agent(id, kind, at, params));
        }
    }
    return agents;
}

} // namespace

Episode build_level(std::string_view name, std::uint64_t seed, const LevelOverrides& overrides)
{
    Episode ep;
    ep.level.spec = find_level(name);
    ep.level.seed = seed;
    if (overrides.max_steps) ep.level.spec.max_steps = *overrides.max_steps;
    if (overrides.roster) {
        if (overrides.roster->total() < 1) throw std::invalid_argument("roster override needs at least one agent");
        ep.level.spec.roster = *overrides.roster;
    }
    ep.gen = overrides.gen.value_or(GenConfig{});
    ep.gen.seed = seed;
    ep.gen.width = ep.gen.height = ep.level.spec.map_size;
    ep.gen.civilian_count = 0;
    ep.fire = overrides.fire.value_or(FireConfig{});
    ep.params = overrides.agents.value_or(AgentParams{});
    ep.fire.validate();

    ep.world = generate_world(ep.gen);
    auto& w = ep.world;
    auto& level = ep.level;
    Builder b(w, seed);
    level.muster = w.cell_at(b.main_cells[b.rng.next_below(b.main_cells.size())]);
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const Cell c{level.muster.x + dx, level.muster.y + dy};
            if (w.in_bounds(c)) b.take(c);
        }
    }

    const int size = level.spec.map_size;
    switch (level.spec.family) {
    case F::CutTreesSparse: place_sparse(b, level); break;
    case F::CutTreesLines: place_lines(b, level); break;
    case F::TransportFirefighters: place_target_region(b, level, size / 4, size / 3); break;
    case F::RescueKnown:
    case F::SearchAndRescue:
    case F::SearchRescueTransport:
        place_target_region(b, level, 3, std::max(4, size / 4));
        place_civilians(b, level, std::max(6, size / 3));
        break;
    case F::FullEnvironment:
        place_fire(b, level);
        place_target_region(b, level, 3, std::max(4, size / 8));
        place_civilians(b, level, size / 2);
        break;
    default:
        if (level.spec.has_fire) place_fire(b, level);
        break;
    }

    for (auto c : level.labeled_cells) reveal(w, c);
    for (const auto& line : level.labeled_lines) {
        for (auto c : line) reveal(w, c);
    }
    for (auto c : level.target_region) reveal(w, c);
    if (level.spec.civilians_known) {
        for (auto c : level.civilian_cells) reveal(w, c);
    }
    if (level.spec.fire_known && level.fire_origin) {
        for (int dy = -3; dy <= 3; ++dy) {
            for (int dx = -3; dx <= 3; ++dx) reveal(w, {level.fire_origin->x + dx, level.fire_origin->y + dy});
        }
    }

    ep.agents = spawn_agents(b, level, ep.params);
    update_visibility(w, ep.agents);
    return ep;
}

double score_value(LevelFamily family, const ScoreComponents& c) noexcept
{
    switch (family) {
    case F::CutTreesSparse:
    case F::CutTreesLines: return static_cast<double>(c.trees_cut_correct);
    case F::ScoutFire: return static_cast<double>(c.drones_over_fire);
    case F::TransportFirefighters: return static_cast<double>(c.agents_at_target);
    case F::RescueKnown:
    case F::SearchAndRescue:
    case F::SearchRescueTransport: return static_cast<double>(c.civilians_at_target);
    case F::SuppressExtinguish:
    case F::SuppressContain:
    case F::SuppressLocate:
    case F::SuppressLocateDeploy: return -static_cast<double>(c.trees_destroyed + 20 * c.agents_lost);
    case F::FullEnvironment:
        return -static_cast<double>(c.trees_destroyed + 20 * c.agents_lost + 100 * c.civilians_lost);
    }
    return 0.0;
}

Score score(const LevelInstance& level, const WorldMap& world)
{
    const auto& t = world.tally;
    Score s;
    s.components.trees_cut_correct = t.trees_cut_labeled;
    s.components.drones_over_fire = std::min<std::int64_t>(2, t.max_drones_over_fire);
    s.components.agents_at_target = t.firefighters_arrived;
    s.components.civilians_at_target = t.civilians_rescued;
    s.components.trees_destroyed = t.trees_destroyed;
    s.components.agents_lost = t.agents_lost;
    s.components.civilians_lost = t.civilians_lost;
    s.value = score_value(level.spec.family, s.components);
    return s;
}

std::string_view termination_name(TerminationReason r)
{
    switch (r) {
    case TerminationReason::None: return "running";
    case TerminationReason::MaxSteps: return "max_steps";
    case TerminationReason::MaxScore: return "max_score";
    case TerminationReason::FireOut: return "fire_out";
    case TerminationReason::Aborted: return "aborted";
    }
    return "unknown";
}

TerminationReason termination_reason(const LevelInstance& level, const WorldMap& world, const Score& s,
                                      std::int64_t t, bool any_agent_busy)
{
    if (level.spec.finite() && s.value >= level.spec.max_score) return TerminationReason::MaxScore;
    if (level.spec.has_fire && !any_agent_busy && !world.any_active_fire()) return TerminationReason::FireOut;
    if (t >= level.spec.max_steps) return TerminationReason::MaxSteps;
    return TerminationReason::None;
}

bool is_terminal(const LevelInstance& level, const WorldMap& world, const Score& s, std::int64_t t,
                 bool any_agent_busy)
{
    return termination_reason(level, world, s, t, any_agent_busy) != TerminationReason::None;
}

bool op_precondition(const WorldMap& world, const std::vector<Agent>& agents)
{
    for (const auto& a : agents) {
        if (!a.alive) continue;
        bool fire = false;
        bool civilian = false;
        const int r = a.vision_radius;
        for (int y = std::max(0, a.pos.y - r); y <= std::min(world.height - 1, a.pos.y + r); ++y) {
            for (int x = std::max(0, a.pos.x - r); x <= std::min(world.width - 1, a.pos.x + r); ++x) {
                const auto i = world.index({x, y});
                fire = fire || is_spreading(world.fire[i]);
                civilian = civilian || world.civilians[i] > 0;
            }
        }
        if (fire && civilian) return true;
    }
    return false;
}

namespace {

// Movement targets and work sites already covered by some agent.
std::vector<Cell> claimed_cells(const Episode& ep)
{
    std::vector<Cell> out;
    for (const auto& a : ep.agents) {
        if (!a.alive || !a.active) continue;
        const auto& p = a.active->prim;
        if (is_movement(p.kind)) out.push_back(p.target());
        if (p.kind == PrimitiveKind::CutAllTrees || p.kind == PrimitiveKind::CutXTrees) out.push_back(a.pos);
    }
    return out;
}

bool contains(const std::vector<Cell>& v, Cell c)
{
    return std::find(v.begin(), v.end(), c) != v.end();
}

std::optional<Cell> nearest(const std::vector<Cell>& candidates, Cell from, const std::vector<Cell>& claimed)
{
    std::optional<Cell> best;
    int best_d = 0;
    for (auto c : candidates) {
        if (contains(claimed, c)) continue;
        const int d = chebyshev(c, from);
        if (!best || d < best_d) {
            best = c;
            best_d = d;
        }
    }
    return best;
}

PrimitiveKind move_kind(AgentKind k)
{
    switch (k) {
    case AgentKind::Bulldozer: return PrimitiveKind::DriveClearPath;
    case AgentKind::Drone:
    case AgentKind::Helicopter: return PrimitiveKind::FlyToLocation;
    default: return PrimitiveKind::MoveToLocation;
    }
}

Primitive go(AgentKind k, Cell c)
{
    return {move_kind(k), c.x, c.y};
}

void plan_cut(const Episode& ep, std::vector<Assignment>& out)
{
    const auto& w = ep.world;
    std::vector<Cell> remaining;
    for (auto c : ep.level.labeled_cells) {
        if (w.trees[w.index(c)] > 0) remaining.push_back(c);
    }
    for (const auto& line : ep.level.labeled_lines) {
        for (auto c : line) {
            if (w.trees[w.index(c)] > 0) remaining.push_back(c);
        }
    }
    auto claimed = claimed_cells(ep);
    for (const auto& a : ep.agents) {
        if (!a.idle() || a.aboard != 0) continue;
        if (a.kind == AgentKind::Firefighter && w.trees[w.index(a.pos)] > 0 && contains(remaining, a.pos) &&
            !contains(claimed, a.pos)) {
            out.push_back({a.id, {PrimitiveKind::CutAllTrees, 0, 0}});
            claimed.push_back(a.pos);
            continue;
        }
        if (a.kind != AgentKind::Firefighter && a.kind != AgentKind::Bulldozer) continue;
        if (auto c = nearest(remaining, a.pos, claimed)) {
            out.push_back({a.id, go(a.kind, *c)});
            claimed.push_back(*c);
        }
    }
}

void plan_scout(const Episode& ep, std::vector<Assignment>& out)
{
    const auto& w = ep.world;
    std::vector<Cell> fire;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (is_spreading(w.fire[i])) fire.push_back(w.cell_at(i));
    }
    if (fire.empty()) return;
    for (const auto& a : ep.agents) {
        if (!a.idle() || a.kind != AgentKind::Drone) continue;
        if (is_spreading(w.fire[w.index(a.pos)]) && a.cells_moved > 0) continue;
        std::vector<Cell> elsewhere;
        for (auto c : fire) {
            if (c != a.pos) elsewhere.push_back(c);
        }
        if (auto c = nearest(elsewhere, a.pos, {})) out.push_back({a.id, go(a.kind, *c)});
    }
}

void plan_transport(const Episode& ep, std::vector<Assignment>& out)
{
    const auto& region = ep.level.target_region;
    for (const auto& a : ep.agents) {
        if (!a.idle() || a.kind != AgentKind::Firefighter || a.reached_target || a.aboard != 0) continue;
        const Cell c = region[static_cast<std::size_t>(a.id) % region.size()];
        out.push_back({a.id, go(a.kind, c)});
    }
}

void plan_rescue(const Episode& ep, std::vector<Assignment>& out)
{
    const auto& w = ep.world;
    const auto& region = ep.level.target_region;
    std::vector<Cell> civilians;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.civilians[i] > 0 && !w.has_flag(i, cell_flag::kTarget)) civilians.push_back(w.cell_at(i));
    }
    std::vector<Cell> claimed;
    for (const auto& a : ep.agents) {
        if (a.alive && a.active && a.carried_civilian == 0 && is_movement(a.active->prim.kind)) {
            claimed.push_back(a.active->prim.target());
        }
    }
    for (const auto& a : ep.agents) {
        if (!a.idle() || a.kind != AgentKind::Firefighter || a.aboard != 0) continue;
        const auto here = w.index(a.pos);
        if (a.carried_civilian > 0) {
            if (w.has_flag(here, cell_flag::kTarget)) {
                out.push_back({a.id, {PrimitiveKind::DropOffCivilian, 0, 0}});
            } else {
                out.push_back({a.id, go(a.kind, region[static_cast<std::size_t>(a.id) % region.size()])});
            }
            continue;
        }
        if (w.civilians[here] > 0 && !w.has_flag(here, cell_flag::kTarget)) {
            out.push_back({a.id, {PrimitiveKind::PickUpCivilian, 0, 0}});
            continue;
        }
        if (auto c = nearest(civilians, a.pos, claimed)) {
            out.push_back({a.id, go(a.kind, *c)});
            claimed.push_back(*c);
        }
    }
}

} // namespace

std::vector<Assignment> omniscient_plan(const Episode& ep)
{
    std::vector<Assignment> out;
    switch (ep.level.spec.family) {
    case F::CutTreesSparse:
    case F::CutTreesLines: plan_cut(ep, out); break;
    case F::ScoutFire: plan_scout(ep, out); break;
    case F::TransportFirefighters: plan_transport(ep, out); break;
    case F::RescueKnown:
    case F::SearchAndRescue:
    case F::SearchRescueTransport: plan_rescue(ep, out); break;
    default: break;
    }
    return out;
}

Score solve_episode(Episode& ep, unsigned threads)
{
    StepOptions opts;
    opts.fire_exec.threads = threads;
    Score s = score(ep.level, ep.world);
    while (true) {
        bool busy = false;
        for (const auto& a : ep.agents) busy = busy || (a.alive && a.active);
        if (is_terminal(ep.level, ep.world, s, ep.world.step, busy)) break;
        for (const auto& asg : omniscient_plan(ep)) assign_primitive(ep.agents[static_cast<std::size_t>(asg.agent) - 1], asg.prim);
        world_step(ep.world, ep.agents, ep.fire, ep.params, opts);
        s = score(ep.level, ep.world);
    }
    return s;
}

} // namespace wildfire
