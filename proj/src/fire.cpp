#include "wildfire/fire.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wildfire/parallel.hpp"
#include "wildfire/rng.hpp"

namespace wildfire {

namespace {

constexpr int kNeighborDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kNeighborDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

constexpr std::uint64_t kSpreadDomain = 0xf12eULL;

} // namespace

void FireConfig::validate() const
{
    if (!(moisture_constant > 0.0)) throw std::invalid_argument("moisture_constant must be > 0");
    if (ignited_duration < 1 || burning_tree_period < 1 || extinguishing_duration < 1 || wet_duration < 1) {
        throw std::invalid_argument("fire durations must be >= 1");
    }
    if (base_spread_rate < 0.0 || base_spread_rate > 1.0) throw std::invalid_argument("base_spread_rate must be in [0, 1]");
    if (wet_spread_multiplier < 0.0 || wet_spread_multiplier > 1.0) {
        throw std::invalid_argument("wet_spread_multiplier must be in [0, 1]");
    }
    if (slope_min > slope_max) throw std::invalid_argument("slope clamp must satisfy min <= max");
}

double slope_factor(double elev_src, double elev_dst, const FireConfig& cfg) noexcept
{
    return std::clamp(1.0 + cfg.slope_gain * (elev_dst - elev_src), cfg.slope_min, cfg.slope_max);
}

double spread_probability(Cell src, Cell dst, const WorldMap& world, const FireConfig& cfg)
{
    if (!world.in_bounds(src) || !world.in_bounds(dst) || chebyshev(src, dst) != 1) {
        throw ContractViolation("spread_probability requires 8-adjacent in-bounds cells, got " + to_string(src) +
                                " -> " + to_string(dst));
    }
    const auto s = world.index(src);
    const auto d = world.index(dst);

    const double slope = slope_factor(world.elevation[s], world.elevation[d], cfg);
    const double moisture = world.moisture[d];
    const double moisture_term = cfg.moisture_term_mode == MoistureTermMode::Literal
                                     ? moisture / cfg.moisture_constant
                                     : (1.0 - moisture) / cfg.moisture_constant;

    double wind_term = 1.0;
    const double wx = world.wind_x[s];
    const double wy = world.wind_y[s];
    const double wmag = std::hypot(wx, wy);
    if (wmag > 0.0) {
        const double dx = dst.x - src.x;
        const double dy = dst.y - src.y;
        const double dmag = std::hypot(dx, dy);
        wind_term = (wx / wmag) * (dx / dmag) + (wy / wmag) * (dy / dmag) + 1.0;
    }

    double p = slope * moisture_term * wind_term;
    if (world.wet[d] > 0) p *= cfg.wet_spread_multiplier;
    return std::max(p, 0.0);
}

double spread_draw(std::uint64_t world_seed, std::int64_t step, std::size_t dst, std::size_t src) noexcept
{
    return keyed_uniform({world_seed, kSpreadDomain, static_cast<std::uint64_t>(step), dst, src});
}

FireDelta fire_step(WorldMap& world, std::int64_t step, const FireConfig& cfg, FireExec exec)
{
    FireDelta delta;
    const std::size_t n = world.size();
    const int w = world.width;
    const int h = world.height;

    // Candidate targets: unburnt flammable neighbors of spreading cells.
    std::vector<std::uint32_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_spreading(world.fire[i])) continue;
        const Cell c = world.cell_at(i);
        for (int k = 0; k < 8; ++k) {
            const Cell nb{c.x + kNeighborDx[k], c.y + kNeighborDy[k]};
            if (nb.x < 0 || nb.y < 0 || nb.x >= w || nb.y >= h) continue;
            const auto j = world.index(nb);
            if (world.fire[j] == FireState::None && world.flammable(j)) {
                candidates.push_back(static_cast<std::uint32_t>(j));
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Each target is decided independently from the frozen pre-step state.
    std::vector<std::uint8_t> ignite(candidates.size(), 0);
    const unsigned threads = candidates.size() >= 2048 ? exec.threads : std::min(exec.threads, 4U);
    parallel_chunks(candidates.size(), threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            const auto d = candidates[k];
            const Cell dc = world.cell_at(d);
            for (int m = 0; m < 8; ++m) {
                const Cell sc{dc.x + kNeighborDx[m], dc.y + kNeighborDy[m]};
                if (sc.x < 0 || sc.y < 0 || sc.x >= w || sc.y >= h) continue;
                const auto s = world.index(sc);
                if (!is_spreading(world.fire[s])) continue;
                const double p = std::clamp(cfg.base_spread_rate * spread_probability(sc, dc, world, cfg), 0.0, 1.0);
                if (spread_draw(world.seed, step, d, s) < p) {
                    ignite[k] = 1;
                    break;
                }
            }
        }
    });

    // Lifecycle of cells already on fire, plus wet timers.
    for (std::size_t i = 0; i < n; ++i) {
        if (world.wet[i] > 0) --world.wet[i];
        const FireState s = world.fire[i];
        if (!is_active_fire(s)) continue;
        auto& age = world.fire_age[i];
        ++age;
        FireState next = s;
        switch (s) {
        case FireState::Ignited:
            if (age >= cfg.ignited_duration) next = FireState::Burning;
            break;
        case FireState::Burning:
            if (age % cfg.burning_tree_period == 0) {
                if (world.trees[i] > 0) {
                    --world.trees[i];
                    ++delta.trees_destroyed;
                }
                if (world.trees[i] == 0) next = FireState::Extinguishing;
            }
            break;
        case FireState::Extinguishing:
            if (age >= cfg.extinguishing_duration) next = FireState::Extinguished;
            break;
        default: break;
        }
        if (next != s) {
            world.fire[i] = next;
            age = 0;
            delta.transitions.push_back({static_cast<std::uint32_t>(i), s, next});
        }
    }

    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (!ignite[k]) continue;
        const auto d = candidates[k];
        world.fire[d] = FireState::Ignited;
        world.fire_age[d] = 0;
        delta.ignitions.push_back(d);
    }
    world.tally.trees_destroyed += delta.trees_destroyed;
    return delta;
}

PatternCells pattern_cells(const WorldMap& world, const WaterPattern& pattern)
{
    PatternCells out;
    auto visit = [&](Cell c) {
        if (world.in_bounds(c)) {
            out.cells.push_back(c);
        } else {
            ++out.out_of_bounds;
        }
    };
    switch (pattern.kind) {
    case WaterPatternKind::Single: visit(pattern.origin); break;
    case WaterPatternKind::Area:
        for (int dy = -pattern.radius; dy <= pattern.radius; ++dy) {
            for (int dx = -pattern.radius; dx <= pattern.radius; ++dx) {
                visit({pattern.origin.x + dx, pattern.origin.y + dy});
            }
        }
        break;
    case WaterPatternKind::Cone: {
        const double dmag = std::hypot(pattern.dir_x, pattern.dir_y);
        if (dmag == 0.0) break;
        const double ux = pattern.dir_x / dmag;
        const double uy = pattern.dir_y / dmag;
        const double cos_half = std::cos(pattern.half_angle_deg * std::numbers::pi / 180.0);
        const int reach = static_cast<int>(std::ceil(pattern.range));
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dx = -reach; dx <= reach; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const double dist = std::hypot(static_cast<double>(dx), static_cast<double>(dy));
                if (dist > pattern.range + 1e-9) continue;
                if ((dx * ux + dy * uy) / dist + 1e-9 < cos_half) continue;
                visit({pattern.origin.x + dx, pattern.origin.y + dy});
            }
        }
        break;
    }
    }
    return out;
}

WaterResult apply_water(WorldMap& world, const WaterPattern& pattern, const FireConfig& cfg)
{
    auto covered = pattern_cells(world, pattern);
    WaterResult result;
    result.out_of_bounds = covered.out_of_bounds;
    for (const Cell c : covered.cells) {
        const auto i = world.index(c);
        if (world.flammable(i) || is_spreading(world.fire[i])) {
            world.wet[i] = static_cast<std::uint16_t>(cfg.wet_duration);
        }
        if (is_spreading(world.fire[i])) {
            world.fire[i] = FireState::Extinguishing;
            world.fire_age[i] = 0;
            ++result.extinguished;
        }
    }
    result.affected = std::move(covered.cells);
    return result;
}

} // namespace wildfire
