#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "wildfire/world.hpp"

namespace wildfire {

// Per-layer seed salts. Each noise layer draws its own permutation.
struct LayerSalts
{
    std::uint64_t elevation = 0x0e1e;
    std::uint64_t vegetation = 0x0e9e;
    std::uint64_t moisture = 0x0015;
    std::uint64_t settlement = 0x5e77;
    std::uint64_t wind_x = 0x0a1d;
    std::uint64_t wind_y = 0x0a1e;

    friend bool operator==(const LayerSalts&, const LayerSalts&) = default;
};

struct GenConfig
{
    std::uint64_t seed = 0;
    int width = 64;
    int height = 64;
    int octaves = 4;
    double base_frequency = 1.0 / 64.0; // cycles per cell
    double persistence = 0.5;
    double lacunarity = 2.0;
    LayerSalts layer_offsets;
    // Vegetation noise cut points: below [0] brush, then light/medium/dense.
    std::array<double, 3> vegetation_cuts{-0.2, 0.15, 0.5};
    double water_threshold = -0.55;     // elevation noise below -> water
    double rock_threshold = 0.6;        // elevation noise above -> rock
    double settlement_threshold = 0.7;  // settlement noise above -> building
    int civilian_count = 0;
    double elevation_scale = 100.0;     // meters per unit of normalized elevation
    std::size_t max_cells = 16'777'216; // generation refused beyond this budget

    // Throws std::invalid_argument on a broken invariant.
    void validate() const;

    friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

class GenerationRefused : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Seeded gradient-noise layer. The permutation depends only on (seed, salt).
class NoiseLayer
{
  public:
    NoiseLayer(std::uint64_t seed, std::uint64_t salt);

    // Single-octave gradient noise, roughly in [-1, 1].
    double gradient(double x, double y) const noexcept;

    // Fractal sum over cfg.octaves, normalized and clamped to [-1, 1].
    double fractal(double x, double y, const GenConfig& cfg) const noexcept;

  private:
    std::array<std::uint8_t, 512> perm_{};
    double offset_x_ = 0.0;
    double offset_y_ = 0.0;
};

// Pure: identical arguments give bit-identical results.
double noise2(std::uint64_t seed, std::uint64_t layer_salt, double x, double y, const GenConfig& cfg);

// Layer-to-terrain mapping. Precedence: water, building, rock, vegetation.
// Moisture does not influence the land type.
std::pair<LandType, int> classify_land(double elev, double veg, double moist, double settle, const GenConfig& cfg);

WorldMap generate_world(const GenConfig& cfg);

} // namespace wildfire
