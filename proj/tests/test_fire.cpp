#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "wildfire/fire.hpp"

using namespace wildfire;
using namespace wildfire::testing;

TEST_CASE("opposed unit wind gives zero spread")
{
    auto w = flat_world(3, 3);
    w.wind_x[w.index({1, 1})] = -1.0F;
    CHECK(spread_probability({1, 1}, {2, 1}, w, FireConfig{}) == 0.0);
}

TEST_CASE("orthogonal wind leaves slope times moisture")
{
    FireConfig cfg;
    auto w = flat_world(3, 3);
    w.wind_y[w.index({1, 1})] = 1.0F;
    w.elevation[w.index({2, 1})] = 0.6F;
    w.moisture[w.index({2, 1})] = 0.3F;
    const double slope = 1.0 + cfg.slope_gain * (0.6 - 0.5);
    CHECK(spread_probability({1, 1}, {2, 1}, w, cfg) ==
          doctest::Approx(slope * (0.3 / cfg.moisture_constant)).epsilon(1e-6));
}

TEST_CASE("spread matches the straight-line oracle on random inputs")
{
    CounterRng rng(2024);
    for (auto mode : {MoistureTermMode::Literal, MoistureTermMode::Attenuating}) {
        FireConfig cfg;
        cfg.moisture_term_mode = mode;
        for (int k = 0; k < 1000; ++k) {
            auto w = flat_world(3, 3);
            const int dx = static_cast<int>(rng.next_below(3)) - 1;
            int dy = static_cast<int>(rng.next_below(3)) - 1;
            if (dx == 0 && dy == 0) dy = 1;
            const Cell s{1, 1};
            const Cell d{1 + dx, 1 + dy};
            w.elevation[w.index(s)] = static_cast<float>(rng.next_unit());
            w.elevation[w.index(d)] = static_cast<float>(rng.next_unit());
            w.moisture[w.index(d)] = static_cast<float>(rng.next_unit());
            w.wind_x[w.index(s)] = static_cast<float>(rng.next_unit() * 2 - 1);
            w.wind_y[w.index(s)] = static_cast<float>(rng.next_unit() * 2 - 1);
            w.wet[w.index(d)] = rng.next_below(4) == 0 ? 3 : 0;
            const double ref = reference_spread(w.elevation[w.index(s)], w.elevation[w.index(d)],
                                                w.moisture[w.index(d)], w.wind_x[w.index(s)], w.wind_y[w.index(s)], dx,
                                                dy, w.wet[w.index(d)] > 0, cfg);
            REQUIRE(std::abs(spread_probability(s, d, w, cfg) - ref) <= 1e-12);
        }
    }
}

TEST_CASE("non-adjacent cells violate the contract")
{
    auto w = flat_world(5, 5);
    CHECK_THROWS_AS(spread_probability({0, 0}, {2, 0}, w, FireConfig{}), ContractViolation);
    CHECK_THROWS_AS(spread_probability({0, 0}, {0, 0}, w, FireConfig{}), ContractViolation);
}

TEST_CASE("slope factor is clamped")
{
    FireConfig cfg;
    CHECK(slope_factor(0.0, 1.0, cfg) == cfg.slope_max);
    CHECK(slope_factor(1.0, 0.0, cfg) == cfg.slope_min);
    CHECK(slope_factor(0.3, 0.3, cfg) == 1.0);
}

TEST_CASE("no fire gives an empty delta")
{
    auto w = flat_world(8, 8);
    CHECK(fire_step(w, 0, FireConfig{}).empty());
}

TEST_CASE("burning cell walled by rock burns out without spreading")
{
    FireConfig cfg;
    auto w = flat_world(5, 5, 3, LandType::Rock);
    w.set_land({2, 2}, LandType::DenseForest);
    w.fire[w.index({2, 2})] = FireState::Burning;
    std::int64_t destroyed = 0;
    for (int t = 0; t < 100; ++t) {
        const auto d = fire_step(w, t, cfg);
        CHECK(d.ignitions.empty());
        destroyed += d.trees_destroyed;
    }
    CHECK(destroyed == 3);
    CHECK(w.fire[w.index({2, 2})] == FireState::Extinguished);
    CHECK(w.trees[w.index({2, 2})] == 0);
}

TEST_CASE("parallel and sequential ignitions agree with the reference")
{
    FireConfig cfg;
    cfg.base_spread_rate = 0.6;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto a = burning_world(seed, 20, 6);
        auto b = a;
        for (int t = 0; t < 50; ++t) {
            const auto expect = reference_ignitions(a, t, cfg);
            const auto da = fire_step(a, t, cfg, {1});
            const auto db = fire_step(b, t, cfg, {8});
            REQUIRE(da.ignitions == expect);
            REQUIRE(db.ignitions == expect);
        }
        CHECK(world_digest(a) == world_digest(b));
    }
}

TEST_CASE("fire states only move forward")
{
    FireConfig cfg;
    auto w = burning_world(77, 40, 10);
    auto rank = [](FireState s) { return static_cast<int>(s); };
    for (int t = 0; t < 120; ++t) {
        const auto d = fire_step(w, t, cfg);
        std::set<std::uint32_t> seen;
        for (const auto& tr : d.transitions) {
            CHECK(rank(tr.to) > rank(tr.from));
            CHECK(tr.from != FireState::Extinguished);
            CHECK(seen.insert(tr.cell).second);
        }
        for (auto c : d.ignitions) CHECK(seen.insert(c).second);
        CHECK(d.trees_destroyed >= 0);
    }
}

TEST_CASE("water on brush wets without changing fire state")
{
    FireConfig cfg;
    auto w = flat_world(5, 5);
    const auto r = apply_water(w, WaterPattern::single({2, 2}), cfg);
    CHECK(w.wet[w.index({2, 2})] == cfg.wet_duration);
    CHECK(w.fire[w.index({2, 2})] == FireState::None);
    CHECK(r.extinguished == 0);
}

TEST_CASE("water on a burning cell starts extinguishing")
{
    FireConfig cfg;
    auto w = flat_world(5, 5);
    w.fire[w.index({1, 1})] = FireState::Burning;
    const auto r = apply_water(w, WaterPattern::area({1, 1}, 1), cfg);
    CHECK(w.fire[w.index({1, 1})] == FireState::Extinguishing);
    CHECK(r.extinguished == 1);
    CHECK(r.affected.size() == 9);
}

TEST_CASE("cone coverage equals brute-force sector membership")
{
    auto w = flat_world(21, 21);
    const Cell o{10, 10};
    const auto got = pattern_cells(w, WaterPattern::cone(o, 1.0, 0.0, 45.0, 3.0));
    std::vector<Cell> expect;
    for (int y = 0; y < 21; ++y) {
        for (int x = 0; x < 21; ++x) {
            const double dx = x - o.x;
            const double dy = y - o.y;
            const double r = std::sqrt(dx * dx + dy * dy);
            if (r == 0.0 || r > 3.0) continue;
            if (std::abs(std::atan2(dy, dx)) <= std::numbers::pi / 4 + 1e-9) expect.push_back({x, y});
        }
    }
    auto sorted = got.cells;
    std::sort(sorted.begin(), sorted.end(), [](Cell a, Cell b) { return std::pair{a.y, a.x} < std::pair{b.y, b.x}; });
    CHECK(sorted == expect);
    CHECK(got.out_of_bounds == 0);
}

TEST_CASE("patterns count out-of-bounds cells")
{
    auto w = flat_world(4, 4);
    const auto p = pattern_cells(w, WaterPattern::area({0, 0}, 1));
    CHECK(p.cells.size() == 4);
    CHECK(p.out_of_bounds == 5);
}

TEST_CASE("fire config validation")
{
    FireConfig c;
    c.moisture_constant = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    FireConfig d;
    d.slope_min = 5.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
