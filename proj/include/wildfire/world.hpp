#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire {

struct Cell
{
    int x = 0;
    int y = 0;

    friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

constexpr int chebyshev(Cell a, Cell b) noexcept
{
    const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
    const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
    return dx > dy ? dx : dy;
}

std::string to_string(Cell c);

enum class LandType : std::uint8_t
{
    Brush,
    LightForest,
    MediumForest,
    DenseForest,
    Rock,
    Water,
    Building,
};

// Trees a freshly generated cell of this type carries.
constexpr int initial_trees(LandType t) noexcept
{
    switch (t) {
    case LandType::LightForest: return 1;
    case LandType::MediumForest: return 2;
    case LandType::DenseForest: return 3;
    default: return 0;
    }
}

constexpr bool is_forest(LandType t) noexcept
{
    return t == LandType::LightForest || t == LandType::MediumForest || t == LandType::DenseForest;
}

std::string_view land_name(LandType t);

enum class FireState : std::uint8_t
{
    None,
    Ignited,
    Burning,
    Extinguishing,
    Extinguished,
};

std::string_view fire_name(FireState s);

constexpr bool is_spreading(FireState s) noexcept
{
    return s == FireState::Ignited || s == FireState::Burning;
}

constexpr bool is_active_fire(FireState s) noexcept
{
    return s == FireState::Ignited || s == FireState::Burning || s == FireState::Extinguishing;
}

namespace cell_flag {
inline constexpr std::uint8_t kLabeled = 1; // level cut target
inline constexpr std::uint8_t kTarget = 2;  // level destination region
inline constexpr std::uint8_t kCleared = 4; // vegetation removed by an agent
} // namespace cell_flag

// Cumulative episode counters; scoring reads these.
struct Tally
{
    std::int64_t trees_destroyed = 0;
    std::int64_t trees_cut = 0;
    std::int64_t trees_cut_labeled = 0;
    std::int64_t agents_lost = 0;
    std::int64_t civilians_initial = 0;
    std::int64_t civilians_lost = 0;
    std::int64_t civilians_rescued = 0;
    std::int64_t firefighters_arrived = 0;
    std::int64_t drones_over_fire = 0;
    std::int64_t max_drones_over_fire = 0;

    friend bool operator==(const Tally&, const Tally&) = default;
};

class DimensionError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Whole-grid state, stored as one array per field.
struct WorldMap
{
    WorldMap() = default;
    WorldMap(int width, int height, std::uint64_t seed);

    int width = 0;
    int height = 0;
    std::uint64_t seed = 0;
    std::int64_t step = 0;
    std::uint32_t visibility_epoch = 0;
    Tally tally;

    std::vector<LandType> land;
    std::vector<std::uint8_t> trees;
    std::vector<FireState> fire;
    std::vector<std::uint16_t> fire_age;
    std::vector<std::uint16_t> wet;
    std::vector<float> elevation; // normalized [0, 1]
    std::vector<float> moisture;  // [0, 1]
    std::vector<float> wind_x;
    std::vector<float> wind_y;
    std::vector<std::uint16_t> civilians;
    std::vector<std::uint8_t> flags;
    std::vector<std::uint8_t> revealed;
    std::vector<std::uint8_t> known_trees; // last observed tree count
    std::vector<std::uint32_t> seen_epoch; // == visibility_epoch when currently visible

    std::size_t size() const noexcept { return land.size(); }
    bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
    std::size_t index(Cell c) const noexcept
    {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
    }
    Cell cell_at(std::size_t i) const noexcept
    {
        return {static_cast<int>(i % static_cast<std::size_t>(width)), static_cast<int>(i / static_cast<std::size_t>(width))};
    }

    bool flammable(std::size_t i) const noexcept
    {
        if (trees[i] > 0) return true;
        return land[i] == LandType::Brush && (flags[i] & cell_flag::kCleared) == 0;
    }
    bool visible_now(std::size_t i) const noexcept { return visibility_epoch != 0 && seen_epoch[i] == visibility_epoch; }
    bool has_flag(std::size_t i, std::uint8_t f) const noexcept { return (flags[i] & f) != 0; }

    std::int64_t total_trees() const noexcept;
    std::int64_t civilians_on_map() const noexcept;
    bool any_active_fire() const noexcept;

    // Sets land type and resets the tree count to the type's initial value.
    void set_land(Cell c, LandType t);
};

// Character for a cell from full ground truth (no fog, no decorations).
char ground_truth_char(const WorldMap& world, std::size_t i);

// One line per row using the minimap legend characters.
std::string ascii_dump(const WorldMap& world);

// 64-bit digest over the mutable and static grid state plus tally.
class Digest
{
  public:
    void add_bytes(std::span<const std::byte> bytes) noexcept;
    template <class T>
    void add_span(std::span<const T> values) noexcept
    {
        add_bytes(std::as_bytes(values));
    }
    void add_u64(std::uint64_t v) noexcept;
    void add_i64(std::int64_t v) noexcept { add_u64(static_cast<std::uint64_t>(v)); }
    std::uint64_t value() const noexcept;

  private:
    std::uint64_t state_ = 0x6a09e667f3bcc908ULL;
    std::uint64_t length_ = 0;
};

void digest_world(Digest& d, const WorldMap& world);
std::uint64_t world_digest(const WorldMap& world);
std::string hex_digest(std::uint64_t v);

// Compact binary snapshot. Little-endian host layout; magic and version checked on load.
void save_snapshot(const WorldMap& world, std::ostream& out);
WorldMap load_snapshot(std::istream& in);

} // namespace wildfire
