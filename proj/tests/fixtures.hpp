#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wildfire/agents.hpp"
#include "wildfire/fire.hpp"
#include "wildfire/levels.hpp"
#include "wildfire/rng.hpp"
#include "wildfire/terrain.hpp"
#include "wildfire/perception.hpp"
#include "wildfire/simulation.hpp"
#include "wildfire/translator.hpp"
#include "wildfire/world.hpp"

namespace wildfire::testing {

// Brush world with neutral elevation and moisture.
inline WorldMap flat_world(int w, int h, std::uint64_t seed = 1, LandType land = LandType::Brush)
{
    WorldMap world(w, h, seed);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) world.set_land({x, y}, land);
    }
    return world;
}

inline void fill_rect(WorldMap& world, Cell a, Cell b, LandType land)
{
    for (int y = a.y; y <= b.y; ++y) {
        for (int x = a.x; x <= b.x; ++x) world.set_land({x, y}, land);
    }
}

// Straight-line evaluation of the spread rule from raw scalars.
inline double reference_spread(double elev_src, double elev_dst, double moisture, double wind_x, double wind_y, int dx,
                               int dy, bool wet, const FireConfig& cfg)
{
    double slope = 1.0 + cfg.slope_gain * (elev_dst - elev_src);
    if (slope < cfg.slope_min) slope = cfg.slope_min;
    if (slope > cfg.slope_max) slope = cfg.slope_max;
    const double m = cfg.moisture_term_mode == MoistureTermMode::Literal ? moisture / cfg.moisture_constant
                                                                         : (1.0 - moisture) / cfg.moisture_constant;
    double wind = 1.0;
    const double wl = std::sqrt(wind_x * wind_x + wind_y * wind_y);
    if (wl > 0.0) {
        const double dl = std::sqrt(double(dx * dx + dy * dy));
        wind = (wind_x * dx + wind_y * dy) / (wl * dl) + 1.0;
    }
    double p = slope * m * wind;
    if (wet) p *= cfg.wet_spread_multiplier;
    return p < 0.0 ? 0.0 : p;
}

// Sequential row-major reference for the ignition set of one step.
inline std::vector<std::uint32_t> reference_ignitions(const WorldMap& w, std::int64_t step, const FireConfig& cfg)
{
    std::vector<std::uint32_t> out;
    for (int y = 0; y < w.height; ++y) {
        for (int x = 0; x < w.width; ++x) {
            const auto d = w.index({x, y});
            if (w.fire[d] != FireState::None || !w.flammable(d)) continue;
            bool lit = false;
            for (int sy = y - 1; sy <= y + 1 && !lit; ++sy) {
                for (int sx = x - 1; sx <= x + 1 && !lit; ++sx) {
                    if ((sx == x && sy == y) || !w.in_bounds({sx, sy})) continue;
                    const auto s = w.index({sx, sy});
                    if (!is_spreading(w.fire[s])) continue;
                    const double p = reference_spread(w.elevation[s], w.elevation[d], w.moisture[d], w.wind_x[s],
                                                      w.wind_y[s], x - sx, y - sy, w.wet[d] > 0, cfg);
                    const double q = std::clamp(cfg.base_spread_rate * p, 0.0, 1.0);
                    lit = spread_draw(w.seed, step, d, s) < q;
                }
            }
            if (lit) out.push_back(static_cast<std::uint32_t>(d));
        }
    }
    return out;
}

// Generated world with a few seeded ignitions.
inline WorldMap burning_world(std::uint64_t seed, int size, int fires)
{
    GenConfig g;
    g.seed = seed;
    g.width = size;
    g.height = size;
    g.base_frequency = 1.0 / 16.0;
    auto w = generate_world(g);
    CounterRng rng(seed ^ 0xf1e5ULL);
    for (int k = 0; k < fires; ++k) {
        const auto i = static_cast<std::size_t>(rng.next_below(w.size()));
        if (w.flammable(i)) w.fire[i] = FireState::Burning;
    }
    return w;
}

// Level table as printed: name, F, B, D, H, map size, max score (-1 when open-ended).
struct TableRow
{
    const char* name;
    int f, b, d, h;
    int map;
    int max_score;
};

inline constexpr TableRow kLevelTable[] = {
    {"Cut Trees: Sparse (small)", 3, 0, 0, 0, 30, 18},
    {"Cut Trees: Sparse (large)", 10, 0, 0, 0, 60, 75},
    {"Cut Trees: Lines (small)", 2, 1, 0, 0, 30, 30},
    {"Cut Trees: Lines (large)", 4, 3, 0, 0, 60, 105},
    {"Scout Fire (small)", 0, 0, 3, 0, 100, 2},
    {"Scout Fire (large)", 0, 0, 5, 0, 250, 2},
    {"Transport Firefighters (small)", 6, 0, 0, 1, 100, 6},
    {"Transport Firefighters (large)", 12, 0, 0, 2, 250, 12},
    {"Rescue Civilians: Known Location (small)", 3, 0, 0, 0, 40, 3},
    {"Rescue Civilians: Known Location (large)", 3, 0, 0, 0, 40, 9},
    {"Rescue Civilians: Search and Rescue", 5, 0, 2, 0, 100, 5},
    {"Rescue Civilians: Search + Rescue + Transport", 10, 0, 2, 2, 150, 10},
    {"Suppress Fire: Extinguish", 8, 0, 0, 0, 60, -1},
    {"Suppress Fire: Contain", 5, 1, 0, 0, 60, -1},
    {"Suppress Fire: Locate and Suppress", 5, 1, 2, 0, 100, -1},
    {"Suppress Fire: Locate + Deploy + Suppress", 10, 0, 2, 2, 150, -1},
    {"Full Environment", 10, 1, 2, 2, 200, -1},
};

// Counts agents by kind and checks the map size against a table row.
inline bool matches_table(const Episode& ep, const TableRow& row)
{
    int n[4] = {0, 0, 0, 0};
    for (const auto& a : ep.agents) ++n[static_cast<int>(a.kind)];
    return n[0] == row.f && n[1] == row.b && n[2] == row.d && n[3] == row.h && ep.world.width == row.map &&
           ep.world.height == row.map && (row.max_score < 0 ? !ep.level.spec.finite()
                                                           : ep.level.spec.max_score == row.max_score);
}

struct GoldenCase
{
    std::string name;
    WorldMap world;
    std::vector<Agent> agents;
    int subject = 0;          // index into agents
    std::string action_text;  // translator input
};

// Three hand-built worlds covering fog, fire, wetness, civilians and neighbors.
inline std::vector<GoldenCase> golden_cases()
{
    const AgentParams params;
    std::vector<GoldenCase> out;
    {
        GoldenCase c{"forest_edge", flat_world(20, 20, 11), {}, 0, "move to coordinate location of (12, 7)"};
        fill_rect(c.world, {0, 0}, {19, 4}, LandType::DenseForest);
        fill_rect(c.world, {0, 5}, {9, 9}, LandType::MediumForest);
        fill_rect(c.world, {14, 10}, {17, 13}, LandType::Water);
        c.world.set_land({3, 15}, LandType::Building);
        c.agents.push_back(make_agent(1, AgentKind::Firefighter, {10, 10}, params));
        update_visibility(c.world, c.agents);
        out.push_back(std::move(c));
    }
    {
        GoldenCase c{"active_fire", flat_world(16, 12, 12), {}, 0, "drive to (2, 9) clearing a path"};
        fill_rect(c.world, {0, 0}, {15, 5}, LandType::LightForest);
        c.world.set_land({8, 3}, LandType::DenseForest);
        c.world.fire[c.world.index({8, 3})] = FireState::Burning;
        c.world.wet[c.world.index({8, 3})] = 5;
        c.world.fire[c.world.index({9, 3})] = FireState::Ignited;
        c.world.fire[c.world.index({7, 4})] = FireState::Extinguishing;
        c.world.fire[c.world.index({6, 4})] = FireState::Extinguished;
        c.world.wet[c.world.index({5, 6})] = 3;
        c.world.civilians[c.world.index({11, 8})] = 1;
        c.agents.push_back(make_agent(1, AgentKind::Bulldozer, {7, 6}, params));
        c.agents.push_back(make_agent(2, AgentKind::Firefighter, {10, 7}, params));
        c.agents.push_back(make_agent(3, AgentKind::Drone, {3, 2}, params));
        update_visibility(c.world, c.agents);
        out.push_back(std::move(c));
    }
    {
        GoldenCase c{"fog_corner", flat_world(30, 30, 13), {}, 0, "fly to (25, 3)"};
        fill_rect(c.world, {0, 0}, {29, 29}, LandType::MediumForest);
        fill_rect(c.world, {4, 4}, {8, 8}, LandType::Water);
        c.agents.push_back(make_agent(1, AgentKind::Helicopter, {2, 2}, params));
        c.agents.push_back(make_agent(2, AgentKind::Firefighter, {27, 27}, params));
        update_visibility(c.world, c.agents);
        // The helicopter has moved on; the old window stays revealed but stale.
        c.agents[0].pos = {20, 3};
        c.world.trees[c.world.index({3, 3})] = 0;
        update_visibility(c.world, c.agents);
        c.agents[0].pos = {2, 2};
        out.push_back(std::move(c));
    }
    return out;
}

inline std::string golden_perception(const GoldenCase& c)
{
    const auto& a = c.agents[static_cast<std::size_t>(c.subject)];
    return build_perception_prompt(a, encode_minimap(c.world, a, c.agents), c.world);
}

inline std::string golden_translation(const GoldenCase& c)
{
    return build_translation_prompt(c.action_text, c.agents[static_cast<std::size_t>(c.subject)].kind);
}

inline std::string read_text(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Compares against tests/golden/<file>; WILDFIRE_UPDATE_GOLDEN=1 rewrites it.
inline bool golden_matches(const std::string& dir, const std::string& file, const std::string& text)
{
    const auto path = std::filesystem::path(dir) / file;
    if (const char* u = std::getenv("WILDFIRE_UPDATE_GOLDEN"); u && std::string(u) == "1") {
        std::ofstream(path, std::ios::binary) << text;
        return true;
    }
    if (!std::filesystem::exists(path)) return false;
    return read_text(path) == text;
}

} // namespace wildfire::testing
