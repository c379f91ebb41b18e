#include "wildfire/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wildfire/parallel.hpp"
#include "wildfire/rng.hpp"

namespace wildfire {

namespace {

// Keeps single-octave output inside [-1, 1]; measured over dense sampling.
constexpr double kGradientNormalization = 1.0;

constexpr double fade(double t) noexcept
{
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

constexpr double lerp(double t, double a, double b) noexcept
{
    return a + t * (b - a);
}

constexpr double grad(std::uint8_t hash, double x, double y) noexcept
{
    switch (hash & 7) {
    case 0: return x + y;
    case 1: return -x + y;
    case 2: return x - y;
    case 3: return -x - y;
    case 4: return x;
    case 5: return -x;
    case 6: return y;
    default: return -y;
    }
}

} // namespace

void GenConfig::validate() const
{
    if (width < 1 || height < 1) throw std::invalid_argument("width and height must be >= 1");
    if (octaves < 1) throw std::invalid_argument("octaves must be >= 1");
    if (!(base_frequency > 0.0)) throw std::invalid_argument("base_frequency must be > 0");
    if (!(vegetation_cuts[0] < vegetation_cuts[1] && vegetation_cuts[1] < vegetation_cuts[2])) {
        throw std::invalid_argument("vegetation cut points must be strictly increasing");
    }
    if (!(water_threshold < rock_threshold)) {
        throw std::invalid_argument("water threshold must be below rock threshold");
    }
    if (civilian_count < 0) throw std::invalid_argument("civilian_count must be >= 0");
}

NoiseLayer::NoiseLayer(std::uint64_t seed, std::uint64_t salt)
{
    CounterRng rng(hash_key({seed, salt, 0x7e77a1ULL}));
    std::array<std::uint8_t, 256> p{};
    std::iota(p.begin(), p.end(), std::uint8_t{0});
    for (std::size_t i = p.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(p[i], p[j]);
    }
    for (std::size_t i = 0; i < 512; ++i) perm_[i] = p[i & 255];
    // Fractional offsets keep integer cells off the lattice, where gradient noise is zero.
    offset_x_ = rng.next_unit() * 256.0 + 0.37;
    offset_y_ = rng.next_unit() * 256.0 + 0.61;
}

double NoiseLayer::gradient(double x, double y) const noexcept
{
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const auto xi = static_cast<std::size_t>(static_cast<std::int64_t>(fx) & 255);
    const auto yi = static_cast<std::size_t>(static_cast<std::int64_t>(fy) & 255);
    const double xf = x - fx;
    const double yf = y - fy;
    const double u = fade(xf);
    const double v = fade(yf);

    const auto aa = perm_[perm_[xi] + yi];
    const auto ab = perm_[perm_[xi] + yi + 1];
    const auto ba = perm_[perm_[xi + 1] + yi];
    const auto bb = perm_[perm_[xi + 1] + yi + 1];

    const double x1 = lerp(u, grad(aa, xf, yf), grad(ba, xf - 1.0, yf));
    const double x2 = lerp(u, grad(ab, xf, yf - 1.0), grad(bb, xf - 1.0, yf - 1.0));
    return std::clamp(lerp(v, x1, x2) * kGradientNormalization, -1.0, 1.0);
}

double NoiseLayer::fractal(double x, double y, const GenConfig& cfg) const noexcept
{
    double sum = 0.0;
    double amplitude = 1.0;
    double norm = 0.0;
    double frequency = cfg.base_frequency;
    for (int o = 0; o < cfg.octaves; ++o) {
        const double shift = 31.7 * o;
        sum += amplitude * gradient((x + offset_x_) * frequency + shift, (y + offset_y_) * frequency - shift);
        norm += amplitude;
        amplitude *= cfg.persistence;
        frequency *= cfg.lacunarity;
    }
    return std::clamp(sum / norm, -1.0, 1.0);
}

double noise2(std::uint64_t seed, std::uint64_t layer_salt, double x, double y, const GenConfig& cfg)
{
    return NoiseLayer(seed, layer_salt).fractal(x, y, cfg);
}

std::pair<LandType, int> classify_land(double elev, double veg, [[maybe_unused]] double moist, double settle,
                                       const GenConfig& cfg)
{
    LandType t;
    if (elev < cfg.water_threshold) {
        t = LandType::Water;
    } else if (settle > cfg.settlement_threshold) {
        t = LandType::Building;
    } else if (elev > cfg.rock_threshold) {
        t = LandType::Rock;
    } else if (veg < cfg.vegetation_cuts[0]) {
        t = LandType::Brush;
    } else if (veg < cfg.vegetation_cuts[1]) {
        t = LandType::LightForest;
    } else if (veg < cfg.vegetation_cuts[2]) {
        t = LandType::MediumForest;
    } else {
        t = LandType::DenseForest;
    }
    return {t, initial_trees(t)};
}

WorldMap generate_world(const GenConfig& cfg)
{
    cfg.validate();
    const auto cells = static_cast<std::size_t>(cfg.width) * static_cast<std::size_t>(cfg.height);
    if (cells > cfg.max_cells) {
        throw GenerationRefused("world of " + std::to_string(cfg.width) + "x" + std::to_string(cfg.height) +
                                " exceeds the cell budget of " + std::to_string(cfg.max_cells));
    }

    WorldMap world(cfg.width, cfg.height, cfg.seed);
    const NoiseLayer elevation(cfg.seed, cfg.layer_offsets.elevation);
    const NoiseLayer vegetation(cfg.seed, cfg.layer_offsets.vegetation);
    const NoiseLayer moisture(cfg.seed, cfg.layer_offsets.moisture);
    const NoiseLayer settlement(cfg.seed, cfg.layer_offsets.settlement);
    const NoiseLayer wind_x(cfg.seed, cfg.layer_offsets.wind_x);
    const NoiseLayer wind_y(cfg.seed, cfg.layer_offsets.wind_y);

    const unsigned threads = cells >= 65536 ? default_threads() : 1;
    parallel_chunks(static_cast<std::size_t>(cfg.height), threads, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t yy = y0; yy < y1; ++yy) {
            const double y = static_cast<double>(yy);
            for (int xx = 0; xx < cfg.width; ++xx) {
                const double x = static_cast<double>(xx);
                const auto i = yy * static_cast<std::size_t>(cfg.width) + static_cast<std::size_t>(xx);
                const double e = elevation.fractal(x, y, cfg);
                const double v = vegetation.fractal(x, y, cfg);
                const double m = moisture.fractal(x, y, cfg);
                const double s = settlement.fractal(x, y, cfg);
                const auto [land, trees] = classify_land(e, v, m, s, cfg);
                world.land[i] = land;
                world.trees[i] = static_cast<std::uint8_t>(trees);
                world.elevation[i] = static_cast<float>((e + 1.0) * 0.5);
                world.moisture[i] = static_cast<float>((m + 1.0) * 0.5);
                double wx = wind_x.fractal(x, y, cfg);
                double wy = wind_y.fractal(x, y, cfg);
                const double mag = std::hypot(wx, wy);
                if (mag > 1.0) {
                    wx /= mag;
                    wy /= mag;
                }
                world.wind_x[i] = static_cast<float>(wx);
                world.wind_y[i] = static_cast<float>(wy);
            }
        }
    });

    if (cfg.civilian_count > 0) {
        std::vector<std::size_t> land_cells;
        for (std::size_t i = 0; i < cells; ++i) {
            if (world.land[i] != LandType::Water) land_cells.push_back(i);
        }
        if (land_cells.empty()) throw GenerationRefused("no land cells available for civilians");
        CounterRng rng(hash_key({cfg.seed, 0xc1f1ULL}));
        const bool distinct = land_cells.size() >= static_cast<std::size_t>(cfg.civilian_count);
        int placed = 0;
        while (placed < cfg.civilian_count) {
            const auto i = land_cells[rng.next_below(land_cells.size())];
            if (distinct && world.civilians[i] > 0) continue;
            ++world.civilians[i];
            ++placed;
        }
    }
    world.tally.civilians_initial = world.civilians_on_map();
    return world;
}

} // namespace wildfire
