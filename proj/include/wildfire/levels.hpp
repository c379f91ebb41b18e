#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wildfire/agents.hpp"
#include "wildfire/fire.hpp"
#include "wildfire/terrain.hpp"
#include "wildfire/world.hpp"

namespace wildfire {

enum class LevelFamily : std::uint8_t
{
    CutTreesSparse,
    CutTreesLines,
    ScoutFire,
    TransportFirefighters,
    RescueKnown,
    SearchAndRescue,
    SearchRescueTransport,
    SuppressExtinguish,
    SuppressContain,
    SuppressLocate,
    SuppressLocateDeploy,
    FullEnvironment,
};

enum class ScoringKind : std::uint8_t
{
    Finite,
    OpenEnded,
};

enum class Behavior : std::uint8_t
{
    TD,
    AC,
    SR,
    OS,
    RC,
    PA,
    OP,
};

inline constexpr std::array<Behavior, 7> kAllBehaviors{Behavior::TD, Behavior::AC, Behavior::SR, Behavior::OS,
                                                       Behavior::RC, Behavior::PA, Behavior::OP};

std::string_view behavior_name(Behavior b);
std::string_view behavior_long_name(Behavior b);
Behavior parse_behavior(std::string_view s);

struct Roster
{
    int firefighters = 0;
    int bulldozers = 0;
    int drones = 0;
    int helicopters = 0;

    int total() const noexcept { return firefighters + bulldozers + drones + helicopters; }
    int count(AgentKind k) const noexcept;
    std::string to_string() const; // "10 F, 1 B, 2 D, 2 H"
    friend bool operator==(const Roster&, const Roster&) = default;
};

struct LevelSpec
{
    std::string name;
    LevelFamily family = LevelFamily::CutTreesSparse;
    std::string objective;
    Roster roster;
    int map_size = 0;
    ScoringKind scoring = ScoringKind::Finite;
    int max_score = 0; // finite levels only
    std::vector<Behavior> tags;
    int max_steps = 200;
    int civilians = 0;
    int cut_lines = 0;          // Lines levels: number of 5-cell lines
    bool has_fire = false;
    bool fire_known = false;    // fire origin revealed at start
    bool civilians_known = false;
    std::vector<std::uint64_t> seeds; // canonical seed list

    bool finite() const noexcept { return scoring == ScoringKind::Finite; }
    bool scores_civilians_lost() const noexcept { return family == LevelFamily::FullEnvironment; }
    bool has_tag(Behavior b) const noexcept;
};

class UnknownLevel : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// All 17 rows, in table order.
const std::vector<LevelSpec>& level_catalog();

// Accepts the canonical name or a known alias; case-sensitive after whitespace
// normalization. Throws UnknownLevel listing valid names.
const LevelSpec& find_level(std::string_view name);

inline constexpr int kLineLength = 5;

struct LevelInstance
{
    LevelSpec spec;
    std::uint64_t seed = 0;
    Cell muster;
    std::vector<Cell> labeled_cells;              // Sparse
    std::vector<std::vector<Cell>> labeled_lines; // Lines
    std::vector<Cell> target_region;              // Transport and Rescue
    std::optional<Cell> fire_origin;
    std::vector<Cell> civilian_cells;

    std::string task_description() const;
};

struct LevelOverrides
{
    std::optional<GenConfig> gen;  // width, height and seed are always taken from the level
    std::optional<FireConfig> fire;
    std::optional<AgentParams> agents;
    std::optional<int> max_steps;
    std::optional<Roster> roster;
};

struct Episode
{
    LevelInstance level;
    GenConfig gen;
    FireConfig fire;
    AgentParams params;
    WorldMap world;
    std::vector<Agent> agents;
};

Episode build_level(std::string_view name, std::uint64_t seed, const LevelOverrides& overrides = {});

struct ScoreComponents
{
    std::int64_t trees_cut_correct = 0;
    std::int64_t drones_over_fire = 0; // capped episode maximum
    std::int64_t agents_at_target = 0;
    std::int64_t civilians_at_target = 0;
    std::int64_t trees_destroyed = 0;
    std::int64_t agents_lost = 0;
    std::int64_t civilians_lost = 0;

    friend bool operator==(const ScoreComponents&, const ScoreComponents&) = default;
};

struct Score
{
    double value = 0.0;
    ScoreComponents components;
};

double score_value(LevelFamily family, const ScoreComponents& c) noexcept;
Score score(const LevelInstance& level, const WorldMap& world);

// any_agent_busy: some live agent still runs a primitive.
bool is_terminal(const LevelInstance& level, const WorldMap& world, const Score& s, std::int64_t t,
                 bool any_agent_busy);

enum class TerminationReason : std::uint8_t
{
    None,
    MaxSteps,
    MaxScore,
    FireOut,
    Aborted,
};

std::string_view termination_name(TerminationReason r);
TerminationReason termination_reason(const LevelInstance& level, const WorldMap& world, const Score& s,
                                      std::int64_t t, bool any_agent_busy);

// True when some live agent currently sees both a spreading fire cell and a civilian.
bool op_precondition(const WorldMap& world, const std::vector<Agent>& agents);

struct Assignment
{
    int agent = 0;
    Primitive prim;
};

// Ground-truth scripted policy. Stateless: the plan is a function of the
// episode state, so replays reproduce it.
std::vector<Assignment> omniscient_plan(const Episode& ep);

// Runs the solver until the level terminates. Returns the final score.
Score solve_episode(Episode& ep, unsigned threads = 1);

} // namespace wildfire
