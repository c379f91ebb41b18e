#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wildfire/world.hpp"

namespace wildfire {

enum class MoistureTermMode : std::uint8_t
{
    Literal,     // moisture / moisture_constant
    Attenuating, // (1 - moisture) / moisture_constant
};

struct FireConfig
{
    double slope_gain = 4.0;
    double slope_min = 0.25;
    double slope_max = 4.0;
    double moisture_constant = 2.0;
    MoistureTermMode moisture_term_mode = MoistureTermMode::Literal;
    double base_spread_rate = 0.25;
    int ignited_duration = 3;
    int burning_tree_period = 5;
    int extinguishing_duration = 4;
    int wet_duration = 30;
    double wet_spread_multiplier = 0.1;

    void validate() const;

    friend bool operator==(const FireConfig&, const FireConfig&) = default;
};

struct FireTransition
{
    std::uint32_t cell = 0;
    FireState from = FireState::None;
    FireState to = FireState::None;
};

struct FireDelta
{
    std::vector<std::uint32_t> ignitions; // ascending cell index
    std::vector<FireTransition> transitions;
    std::int64_t trees_destroyed = 0;

    bool empty() const noexcept { return ignitions.empty() && transitions.empty() && trees_destroyed == 0; }
};

class ContractViolation : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

// Slope term, clamped to [slope_min, slope_max].
double slope_factor(double elev_src, double elev_dst, const FireConfig& cfg) noexcept;

// Unnormalized per-neighbor spread value; dst must be one of src's 8 neighbors.
double spread_probability(Cell src, Cell dst, const WorldMap& world, const FireConfig& cfg);

// Bernoulli draw for one (src, dst) trial at a step. Order-independent.
double spread_draw(std::uint64_t world_seed, std::int64_t step, std::size_t dst, std::size_t src) noexcept;

struct FireExec
{
    unsigned threads = 1;
};

// Advances the fire automaton one step. Ignitions are decided on the
// pre-step state; newly ignited cells start aging next step.
FireDelta fire_step(WorldMap& world, std::int64_t step, const FireConfig& cfg, FireExec exec = {});

enum class WaterPatternKind : std::uint8_t
{
    Single,
    Cone,
    Area,
};

struct WaterPattern
{
    WaterPatternKind kind = WaterPatternKind::Single;
    Cell origin;           // cone apex; area center; single target
    double dir_x = 1.0;    // cone direction, need not be unit
    double dir_y = 0.0;
    double half_angle_deg = 45.0;
    double range = 3.0;    // cone radius in cells
    int radius = 1;        // area Chebyshev radius

    static WaterPattern single(Cell c) { return {WaterPatternKind::Single, c}; }
    static WaterPattern cone(Cell origin, double dx, double dy, double half_angle_deg = 45.0, double range = 3.0)
    {
        return {WaterPatternKind::Cone, origin, dx, dy, half_angle_deg, range, 1};
    }
    static WaterPattern area(Cell center, int radius)
    {
        WaterPattern p{WaterPatternKind::Area, center};
        p.radius = radius;
        return p;
    }
};

// Cells covered by a pattern, in-bounds first, row-major order. Out-of-bounds are counted.
struct PatternCells
{
    std::vector<Cell> cells;
    int out_of_bounds = 0;
};

PatternCells pattern_cells(const WorldMap& world, const WaterPattern& pattern);

struct WaterResult
{
    std::vector<Cell> affected; // in-bounds covered cells
    int out_of_bounds = 0;
    int extinguished = 0;       // cells moved to Extinguishing
};

WaterResult apply_water(WorldMap& world, const WaterPattern& pattern, const FireConfig& cfg);

} // namespace wildfire
