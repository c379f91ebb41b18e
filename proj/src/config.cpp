#include "wildfire/config.hpp"

#include <fstream>
#include <stdexcept>

#include "wildfire/levels.hpp"

namespace wildfire {

using nlohmann::json;

namespace {

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) j.at(key).get_to(out);
}

std::string mode_name(MoistureTermMode m)
{
    return m == MoistureTermMode::Literal ? "literal" : "attenuating";
}

MoistureTermMode parse_mode(const std::string& s)
{
    if (s == "literal") return MoistureTermMode::Literal;
    if (s == "attenuating") return MoistureTermMode::Attenuating;
    throw std::invalid_argument("moisture_term_mode must be literal or attenuating, got " + s);
}

} // namespace

void to_json(json& j, const GenConfig& c)
{
    j = json{{"seed", c.seed},
             {"width", c.width},
             {"height", c.height},
             {"octaves", c.octaves},
             {"base_frequency", c.base_frequency},
             {"persistence", c.persistence},
             {"lacunarity", c.lacunarity},
             {"layer_offsets",
              {{"elevation", c.layer_offsets.elevation},
               {"vegetation", c.layer_offsets.vegetation},
               {"moisture", c.layer_offsets.moisture},
               {"settlement", c.layer_offsets.settlement},
               {"wind_x", c.layer_offsets.wind_x},
               {"wind_y", c.layer_offsets.wind_y}}},
             {"vegetation_cuts", c.vegetation_cuts},
             {"water_threshold", c.water_threshold},
             {"rock_threshold", c.rock_threshold},
             {"settlement_threshold", c.settlement_threshold},
             {"civilian_count", c.civilian_count},
             {"elevation_scale", c.elevation_scale},
             {"max_cells", c.max_cells}};
}

void from_json(const json& j, GenConfig& c)
{
    read(j, "seed", c.seed);
    read(j, "width", c.width);
    read(j, "height", c.height);
    read(j, "octaves", c.octaves);
    read(j, "base_frequency", c.base_frequency);
    read(j, "persistence", c.persistence);
    read(j, "lacunarity", c.lacunarity);
    if (j.contains("layer_offsets")) {
        const auto& l = j.at("layer_offsets");
        read(l, "elevation", c.layer_offsets.elevation);
        read(l, "vegetation", c.layer_offsets.vegetation);
        read(l, "moisture", c.layer_offsets.moisture);
        read(l, "settlement", c.layer_offsets.settlement);
        read(l, "wind_x", c.layer_offsets.wind_x);
        read(l, "wind_y", c.layer_offsets.wind_y);
    }
    read(j, "vegetation_cuts", c.vegetation_cuts);
    read(j, "water_threshold", c.water_threshold);
    read(j, "rock_threshold", c.rock_threshold);
    read(j, "settlement_threshold", c.settlement_threshold);
    read(j, "civilian_count", c.civilian_count);
    read(j, "elevation_scale", c.elevation_scale);
    read(j, "max_cells", c.max_cells);
}

void to_json(json& j, const FireConfig& c)
{
    j = json{{"slope_gain", c.slope_gain},
             {"slope_min", c.slope_min},
             {"slope_max", c.slope_max},
             {"moisture_constant", c.moisture_constant},
             {"moisture_term_mode", mode_name(c.moisture_term_mode)},
             {"base_spread_rate", c.base_spread_rate},
             {"ignited_duration", c.ignited_duration},
             {"burning_tree_period", c.burning_tree_period},
             {"extinguishing_duration", c.extinguishing_duration},
             {"wet_duration", c.wet_duration},
             {"wet_spread_multiplier", c.wet_spread_multiplier}};
}

void from_json(const json& j, FireConfig& c)
{
    read(j, "slope_gain", c.slope_gain);
    read(j, "slope_min", c.slope_min);
    read(j, "slope_max", c.slope_max);
    read(j, "moisture_constant", c.moisture_constant);
    if (j.contains("moisture_term_mode")) c.moisture_term_mode = parse_mode(j.at("moisture_term_mode").get<std::string>());
    read(j, "base_spread_rate", c.base_spread_rate);
    read(j, "ignited_duration", c.ignited_duration);
    read(j, "burning_tree_period", c.burning_tree_period);
    read(j, "extinguishing_duration", c.extinguishing_duration);
    read(j, "wet_duration", c.wet_duration);
    read(j, "wet_spread_multiplier", c.wet_spread_multiplier);
}

void to_json(json& j, const KindParams& c)
{
    j = json{{"cells_per_move", c.cells_per_move},
             {"ticks_per_move", c.ticks_per_move},
             {"water_capacity", c.water_capacity},
             {"vision_radius", c.vision_radius},
             {"seats", c.seats}};
}

void from_json(const json& j, KindParams& c)
{
    read(j, "cells_per_move", c.cells_per_move);
    read(j, "ticks_per_move", c.ticks_per_move);
    read(j, "water_capacity", c.water_capacity);
    read(j, "vision_radius", c.vision_radius);
    read(j, "seats", c.seats);
}

void to_json(json& j, const AgentParams& c)
{
    j = json{{"firefighter", c.firefighter},
             {"bulldozer", c.bulldozer},
             {"drone", c.drone},
             {"helicopter", c.helicopter},
             {"cone_half_angle_deg", c.cone_half_angle_deg},
             {"cone_range", c.cone_range},
             {"drop_radius", c.drop_radius},
             {"pickup_radius", c.pickup_radius},
             {"refill_radius", c.refill_radius}};
}

void from_json(const json& j, AgentParams& c)
{
    read(j, "firefighter", c.firefighter);
    read(j, "bulldozer", c.bulldozer);
    read(j, "drone", c.drone);
    read(j, "helicopter", c.helicopter);
    read(j, "cone_half_angle_deg", c.cone_half_angle_deg);
    read(j, "cone_range", c.cone_range);
    read(j, "drop_radius", c.drop_radius);
    read(j, "pickup_radius", c.pickup_radius);
    read(j, "refill_radius", c.refill_radius);
}

void to_json(json& j, const FrameworkConfig& c)
{
    j = json{{"embodied_rounds", c.embodied_rounds},
             {"hmas_iteration_cap", c.hmas_iteration_cap},
             {"hmas_history_window", c.hmas_history_window},
             {"max_retries", c.max_retries},
             {"lm_threads", c.lm_threads},
             {"fire_threads", c.fire_threads},
             {"log_prompts", c.log_prompts}};
}

void from_json(const json& j, FrameworkConfig& c)
{
    read(j, "embodied_rounds", c.embodied_rounds);
    read(j, "hmas_iteration_cap", c.hmas_iteration_cap);
    read(j, "hmas_history_window", c.hmas_history_window);
    read(j, "max_retries", c.max_retries);
    read(j, "lm_threads", c.lm_threads);
    read(j, "fire_threads", c.fire_threads);
    read(j, "log_prompts", c.log_prompts);
}

void to_json(json& j, const HttpLmConfig& c)
{
    j = json{{"endpoint", c.endpoint},
             {"path", c.path},
             {"model", c.model},
             {"key_env", c.key_env},
             {"timeout_seconds", c.timeout_seconds}};
}

void from_json(const json& j, HttpLmConfig& c)
{
    read(j, "endpoint", c.endpoint);
    read(j, "path", c.path);
    read(j, "model", c.model);
    read(j, "key_env", c.key_env);
    read(j, "timeout_seconds", c.timeout_seconds);
}

void HarnessConfig::validate() const
{
    gen.validate();
    fire.validate();
    parse_framework(framework_name);
    if (framework.embodied_rounds < 0) throw std::invalid_argument("embodied_rounds must be >= 0");
    if (framework.hmas_iteration_cap < 1) throw std::invalid_argument("hmas_iteration_cap must be >= 1");
    if (framework.hmas_history_window < 0) throw std::invalid_argument("hmas_history_window must be >= 0");
    if (framework.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
    if (levels.empty()) throw std::invalid_argument("no levels selected");
    for (const auto& l : levels) {
        try {
            find_level(l.name);
        } catch (const UnknownLevel& e) {
            throw std::invalid_argument(e.what());
        }
        if (l.seeds.empty()) throw std::invalid_argument("level '" + l.name + "' has an empty seed list");
    }
    if (max_steps && *max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
}

HarnessConfig default_harness_config()
{
    HarnessConfig c;
    for (const auto& s : level_catalog()) c.levels.push_back({s.name, s.seeds});
    return c;
}

json config_to_json(const HarnessConfig& c)
{
    json levels = json::array();
    for (const auto& l : c.levels) levels.push_back({{"name", l.name}, {"seeds", l.seeds}});
    json j{{"gen", c.gen},
           {"fire", c.fire},
           {"agents", c.agents},
           {"framework", c.framework},
           {"framework_name", c.framework_name},
           {"lm", c.lm},
           {"http", c.http},
           {"levels", levels},
           {"out", c.out}};
    j["max_steps"] = c.max_steps ? json(*c.max_steps) : json(nullptr);
    return j;
}

HarnessConfig config_from_json(const json& j)
{
    HarnessConfig c = default_harness_config();
    read(j, "gen", c.gen);
    read(j, "fire", c.fire);
    read(j, "agents", c.agents);
    read(j, "framework", c.framework);
    read(j, "framework_name", c.framework_name);
    read(j, "lm", c.lm);
    read(j, "http", c.http);
    read(j, "out", c.out);
    if (j.contains("levels")) {
        c.levels.clear();
        for (const auto& l : j.at("levels")) {
            LevelSelection sel;
            sel.name = l.at("name").get<std::string>();
            if (l.contains("seeds")) {
                sel.seeds = l.at("seeds").get<std::vector<std::uint64_t>>();
            } else {
                sel.seeds = find_level(sel.name).seeds;
            }
            c.levels.push_back(std::move(sel));
        }
    }
    if (j.contains("max_steps") && !j.at("max_steps").is_null()) c.max_steps = j.at("max_steps").get<int>();
    return c;
}

HarnessConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    const auto j = json::parse(in, nullptr, true, true);
    return config_from_json(j);
}

} // namespace wildfire
